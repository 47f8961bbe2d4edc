#include "ulba/erosion.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace ulba;

namespace {

ErosionConfig small_config() {
  ErosionConfig c;
  c.pe_count = 4;
  c.stripe_width = 32;
  c.height = 32;
  c.rock_radius = 7;
  c.iterations = 120;
  return c;
}

int count_disk_cells(double cx, double cy, int radius, int width, int height) {
  int n = 0;
  for (int c = 0; c < width; ++c) {
    for (int r = 0; r < height; ++r) {
      const double dx = c + 0.5 - cx;
      const double dy = r + 0.5 - cy;
      n += std::hypot(dx, dy) <= radius ? 1 : 0;
    }
  }
  return n;
}

std::set<int> stripe_columns(const StripePartition& part, int p) {
  std::set<int> cols;
  for (int c = part.begin(p); c < part.end(p); ++c) {
    cols.insert(c);
  }
  return cols;
}

std::int64_t sum_weights(std::span<const std::int64_t> xs) {
  return std::accumulate(xs.begin(), xs.end(), std::int64_t{0});
}

} // namespace

TEST(InitGrid, DiskRasterizationMatchesBruteForce) {
  ErosionConfig c;
  c.pe_count = 2;
  c.stripe_width = 100;
  c.height = 100;
  c.rock_radius = 10;
  c.strong_count = 0;
  const auto [grid, disks] = init_grid(c, 1);
  ASSERT_EQ(disks.size(), 2u);
  const int expected = count_disk_cells(50, 50, 10, 100, 100);
  EXPECT_NEAR(expected, 314, 10);
  EXPECT_EQ(grid.rock_cells().size(), 2u * static_cast<std::size_t>(expected));
  for (const auto& d : disks) {
    EXPECT_DOUBLE_EQ(d.probability, c.weak_probability);
    EXPECT_DOUBLE_EQ(d.center_row, 50.0);
  }
  EXPECT_DOUBLE_EQ(disks[0].center_col, 50.0);
  EXPECT_DOUBLE_EQ(disks[1].center_col, 150.0);
  EXPECT_EQ(grid.total_weight(), 200 * 100 - 2 * expected);
}

TEST(InitGrid, StrongCountAndDeterminism) {
  ErosionConfig c = small_config();
  for (int strong = 0; strong <= c.pe_count; ++strong) {
    c.strong_count = strong;
    const auto [grid, disks] = init_grid(c, 42);
    const auto n = std::count_if(disks.begin(), disks.end(), [&](const RockDisk& d) {
      return d.probability == c.strong_probability;
    });
    EXPECT_EQ(n, strong);
    EXPECT_EQ(init_grid(c, 42).first, grid);
  }
}

TEST(InitGrid, StrongDisksDependOnSeed) {
  ErosionConfig c = small_config();
  c.pe_count = 16;
  c.strong_count = 1;
  std::set<double> positions;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (const auto& d : init_grid(c, seed).second) {
      if (d.probability == c.strong_probability) {
        positions.insert(d.center_col);
      }
    }
  }
  EXPECT_GT(positions.size(), 5u);
}

TEST(InitGrid, RejectsOverflowingDisks) {
  ErosionConfig c = small_config();
  c.rock_radius = 16;
  EXPECT_THROW(init_grid(c, 1), ConfigError);
  c = small_config();
  c.strong_count = 5;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Erosion, InteriorRockIsShielded) {
  ErosionGrid grid(5, 5, 1.0, 1.0);
  for (int c = 0; c < 5; ++c) {
    for (int r = 0; r < 5; ++r) {
      grid.place_rock(c, r, true);
    }
  }
  Rng rng(1);
  EXPECT_EQ(erosion_step(grid, rng), 0u);
  EXPECT_EQ(grid.total_weight(), 0);
}

TEST(Erosion, CertainErosionTakesExposedCells) {
  ErosionGrid grid(5, 5, 0.0, 1.0);
  for (int c = 1; c < 4; ++c) {
    for (int r = 1; r < 4; ++r) {
      grid.place_rock(c, r, true);
    }
  }
  Rng rng(1);
  EXPECT_EQ(erosion_step(grid, rng), 8u); // the ring; the centre has no fluid neighbour yet
  EXPECT_TRUE(grid.is_rock(2, 2));
  EXPECT_EQ(grid.at(1, 1), CellKind::refined);
  EXPECT_EQ(erosion_step(grid, rng), 1u);
  EXPECT_EQ(grid.total_weight(), 16 + 9 * ErosionGrid::kRefinedWeight);
}

TEST(Erosion, ZeroProbabilityNeverErodes) {
  ErosionConfig c = small_config();
  c.weak_probability = 0;
  c.strong_count = 0;
  ErosionGrid grid = init_grid(c, 3).first;
  const ErosionGrid before = grid;
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    erosion_step(grid, rng);
  }
  EXPECT_EQ(grid, before);
}

TEST(Erosion, SurvivalMatchesPerNeighbourTrials) {
  // A rock with k fluid neighbours survives one step with probability (1-p)^k.
  const double p = 0.3;
  std::array<long, 5> exposed{};
  std::array<long, 5> survived{};
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    ErosionGrid grid(12, 12, p, p);
    Rng layout(seed + 1000);
    std::bernoulli_distribution rock(0.6);
    for (int c = 0; c < 12; ++c) {
      for (int r = 0; r < 12; ++r) {
        if (rock(layout)) {
          grid.place_rock(c, r, false);
        }
      }
    }
    std::vector<std::pair<std::size_t, int>> rocks;
    for (const std::size_t cell : grid.rock_cells()) {
      const int c = static_cast<int>(cell / 12);
      const int r = static_cast<int>(cell % 12);
      int k = 0;
      for (const auto [dc, dr] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
        const int cc = c + dc;
        const int rr = r + dr;
        k += cc >= 0 && cc < 12 && rr >= 0 && rr < 12 && !grid.is_rock(cc, rr) ? 1 : 0;
      }
      rocks.emplace_back(cell, k);
    }
    Rng rng(seed);
    erosion_step(grid, rng);
    for (const auto& [cell, k] : rocks) {
      ++exposed[static_cast<std::size_t>(k)];
      const bool alive = grid.is_rock(static_cast<int>(cell / 12), static_cast<int>(cell % 12));
      survived[static_cast<std::size_t>(k)] += alive ? 1 : 0;
    }
  }
  for (int k = 0; k <= 4; ++k) {
    const double n = static_cast<double>(exposed[static_cast<std::size_t>(k)]);
    if (n < 50) {
      continue;
    }
    const double q = std::pow(1 - p, k);
    const double alive = static_cast<double>(survived[static_cast<std::size_t>(k)]);
    if (k == 0) {
      EXPECT_EQ(alive, n);
      continue;
    }
    const double chi2 = std::pow(alive - n * q, 2) / (n * q) +
                        std::pow((n - alive) - n * (1 - q), 2) / (n * (1 - q));
    EXPECT_LT(chi2, 6.635) << "k=" << k << " n=" << n; // 1 dof, 1% level
  }
}

TEST(Erosion, WeightGrowsByFourPerErodedCell) {
  ErosionConfig c = small_config();
  c.strong_count = 2;
  ErosionGrid grid = init_grid(c, 5).first;
  Rng rng(5);
  auto previous = column_workloads(grid);
  for (int step = 0; step < 60; ++step) {
    const std::size_t eroded = erosion_step(grid, rng);
    const auto now = column_workloads(grid);
    ASSERT_EQ(sum_weights(now) - sum_weights(previous),
              static_cast<std::int64_t>(eroded) * ErosionGrid::kRefinedWeight);
    for (std::size_t col = 0; col < now.size(); ++col) {
      ASSERT_EQ((now[col] - previous[col]) % ErosionGrid::kRefinedWeight, 0);
      ASSERT_GE(now[col], previous[col]);
    }
    previous = now;
  }
}

TEST(ColumnWorkloads, WeightedCount) {
  ErosionGrid grid(3, 100, 1.0, 1.0);
  for (int r = 0; r < 10; ++r) {
    grid.place_rock(1, r, false);
    grid.erode(1, r);
  }
  for (int r = 0; r < 100; ++r) {
    grid.place_rock(2, r, false);
  }
  const auto cols = column_workloads(grid);
  EXPECT_EQ(cols, (std::vector<std::int64_t>{100, 10 * 4 + 90, 0}));
}

TEST(StripePartition, ValidationAndOwner) {
  EXPECT_THROW(StripePartition({0, 3, 3, 8}, 8), ModelError);
  EXPECT_THROW(StripePartition({1, 8}, 8), ModelError);
  EXPECT_THROW(StripePartition({0, 7}, 8), ModelError);
  const StripePartition part({0, 3, 5, 8}, 8);
  EXPECT_EQ(part.owner(0), 0);
  EXPECT_EQ(part.owner(2), 0);
  EXPECT_EQ(part.owner(3), 1);
  EXPECT_EQ(part.owner(7), 2);
}

TEST(StripePartition, PrefixSumCuts) {
  const std::vector<std::int64_t> cols{4, 4, 4, 4};
  const std::vector<double> targets{8, 8};
  EXPECT_EQ(stripe_partition(cols, targets), StripePartition({0, 2, 4}, 4));

  const std::vector<std::int64_t> uniform(64, 10);
  const std::vector<double> even(5, 640.0 / 5);
  const auto part = stripe_partition(uniform, even);
  for (int p = 0; p < 5; ++p) {
    EXPECT_NEAR(part.end(p) - part.begin(p), 64.0 / 5, 1.0);
  }
  EXPECT_THROW(stripe_partition(std::vector<std::int64_t>{1, 1}, std::vector<double>{1, 0.5, 0.5}),
               ModelError);
  EXPECT_THROW(stripe_partition(cols, std::vector<double>{8, 20}), ModelError);
}

TEST(StripePartition, UnderloadedStripeGetsItsShare) {
  const std::vector<std::int64_t> cols(256, 16);
  const double total = 256 * 16;
  const int pes = 8;
  const double share = total / pes;
  std::vector<double> targets(pes, share + 0.5 * share / (pes - 1));
  targets[0] = 0.5 * share;
  const auto part = stripe_partition(cols, targets);
  const auto loads = stripe_workloads(part, cols);
  EXPECT_NEAR(static_cast<double>(loads[0]), total * 0.5 / pes, 16.0);
}

TEST(StripePartition, DeviationBoundedByHeaviestColumn) {
  Rng rng(21);
  std::uniform_int_distribution<int> weight(0, 400);
  std::uniform_int_distribution<int> pes_dist(2, 32);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int pes = pes_dist(rng);
    std::vector<std::int64_t> cols(static_cast<std::size_t>(pes * 16));
    for (auto& w : cols) {
      w = 1 + weight(rng);
    }
    const double total = static_cast<double>(sum_weights(cols));
    std::vector<double> raw(static_cast<std::size_t>(pes));
    double raw_sum = 0.0;
    for (auto& r : raw) {
      r = 0.5 + unit(rng);
      raw_sum += r;
    }
    std::vector<double> targets(raw.size());
    double assigned = 0.0;
    for (std::size_t p = 0; p + 1 < raw.size(); ++p) {
      targets[p] = total * raw[p] / raw_sum;
      assigned += targets[p];
    }
    targets.back() = total - assigned;

    const auto part = stripe_partition(cols, targets);
    ASSERT_EQ(part.stripe_count(), pes);
    ASSERT_EQ(part.cuts().front(), 0);
    ASSERT_EQ(part.cuts().back(), static_cast<int>(cols.size()));
    const auto heaviest = static_cast<double>(*std::max_element(cols.begin(), cols.end()));
    const auto loads = stripe_workloads(part, cols);
    ASSERT_EQ(sum_weights(loads), sum_weights(cols));
    for (int p = 0; p < pes; ++p) {
      ASSERT_LE(std::abs(static_cast<double>(loads[static_cast<std::size_t>(p)]) -
                         targets[static_cast<std::size_t>(p)]),
                heaviest + 1e-6)
          << "trial " << trial << " stripe " << p;
    }
  }
}

TEST(IterationTime, SlowestStripeSetsThePace) {
  const std::vector<std::int64_t> cols{10, 10, 10, 10};
  EXPECT_DOUBLE_EQ(modeled_iteration_time(StripePartition({0, 2, 4}, 4), cols, 2.0), 10.0);
  EXPECT_DOUBLE_EQ(modeled_iteration_time(StripePartition({0, 1, 4}, 4), cols, 2.0), 15.0);
  Rng rng(4);
  std::uniform_int_distribution<int> w(0, 50);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::int64_t> xs(40);
    for (auto& x : xs) {
      x = w(rng);
    }
    const auto part = StripePartition::uniform(5, 40);
    ASSERT_GE(modeled_iteration_time(part, xs, 1.0), static_cast<double>(sum_weights(xs)) / 5);
  }
}

TEST(Migration, MatchesSetDifference) {
  Rng rng(6);
  std::uniform_int_distribution<int> w(0, 40);
  for (int trial = 0; trial < 300; ++trial) {
    const int width = 60;
    const int pes = 6;
    std::vector<std::int64_t> cols(width);
    for (auto& x : cols) {
      x = w(rng);
    }
    auto random_partition = [&] {
      std::vector<int> inner(width - 1);
      std::iota(inner.begin(), inner.end(), 1);
      std::shuffle(inner.begin(), inner.end(), rng);
      std::vector<int> cuts(inner.begin(), inner.begin() + pes - 1);
      cuts.push_back(0);
      cuts.push_back(width);
      std::sort(cuts.begin(), cuts.end());
      return StripePartition(cuts, width);
    };
    const auto before = random_partition();
    const auto after = random_partition();
    std::int64_t left = 0;
    std::int64_t arrived = 0;
    for (int p = 0; p < pes; ++p) {
      const auto b = stripe_columns(before, p);
      const auto a = stripe_columns(after, p);
      for (int c : b) {
        left += a.count(c) ? 0 : cols[static_cast<std::size_t>(c)];
      }
      for (int c : a) {
        arrived += b.count(c) ? 0 : cols[static_cast<std::size_t>(c)];
      }
    }
    ASSERT_EQ(left, arrived);
    ASSERT_EQ(migrated_weight(before, after, cols), left);
    ASSERT_EQ(migrated_weight(before, before, cols), 0);
  }
}

TEST(Migration, ShiftedCutMovesOnlyTheCrossedColumns) {
  const std::vector<std::int64_t> cols{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(migrated_weight(StripePartition({0, 3, 6}, 6), StripePartition({0, 1, 6}, 6), cols),
            2 + 3);
  EXPECT_EQ(migrated_weight(StripePartition({0, 3, 6}, 6), StripePartition({0, 5, 6}, 6), cols),
            4 + 5);
}

TEST(LbCost, LinearInMigratedWeight) {
  EXPECT_DOUBLE_EQ(modeled_lb_cost(0, 0.01, 1e-6), 0.01);
  EXPECT_DOUBLE_EQ(modeled_lb_cost(1000, 0.01, 0.0), 0.01);
  EXPECT_DOUBLE_EQ(modeled_lb_cost(1000, 0.01, 1e-6), 0.011);
}

TEST(Simulation, DeterministicPerSeed) {
  const ErosionConfig c = small_config();
  EXPECT_EQ(run_simulation(c, Policy::ulba, 0.4, 9), run_simulation(c, Policy::ulba, 0.4, 9));
  EXPECT_EQ(run_simulation(c, Policy::standard, 0, 9),
            run_simulation(c, Policy::standard, 0, 9));
}

TEST(Simulation, AlphaZeroIsStandard) {
  ErosionConfig c = small_config();
  c.pe_count = 16;
  c.iterations = 200;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    EXPECT_EQ(run_simulation(c, Policy::ulba, 0.0, seed),
              run_simulation(c, Policy::standard, 0.4, seed));
  }
}

TEST(Simulation, NoStrongRockMeansNoUnderloading) {
  ErosionConfig c = small_config();
  c.pe_count = 16;
  c.strong_count = 0;
  c.iterations = 200;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const SimResult s = run_simulation(c, Policy::standard, 0, seed);
    const SimResult u = run_simulation(c, Policy::ulba, 0.4, seed);
    EXPECT_EQ(s.lb_calls(), u.lb_calls());
    EXPECT_EQ(s.total_time, u.total_time);
    for (const auto& e : u.lb_events) {
      EXPECT_EQ(e.mode, Policy::standard);
    }
  }
}

TEST(Simulation, AccountingInvariants) {
  ErosionConfig c = small_config();
  c.pe_count = 16;
  c.strong_count = 1;
  c.iterations = 300;
  for (const Policy policy : {Policy::standard, Policy::ulba}) {
    const SimResult r = run_simulation(c, policy, 0.4, 4);
    ASSERT_EQ(r.iterations.size(), 300u);
    ASSERT_EQ(r.pe_workloads.size(), 300u);
    double compute = 0.0;
    double usage = 0.0;
    std::int64_t previous_total = 0;
    std::size_t fired = 0;
    for (std::size_t i = 0; i < r.iterations.size(); ++i) {
      const auto& rec = r.iterations[i];
      const auto& loads = r.pe_workloads[i];
      const std::int64_t total = sum_weights(loads);
      const auto peak = *std::max_element(loads.begin(), loads.end());
      EXPECT_DOUBLE_EQ(rec.time, static_cast<double>(peak) / c.pe_speed);
      EXPECT_GE(rec.time * c.pe_speed * 16, static_cast<double>(total));
      EXPECT_LE(rec.pe_usage, 100.0);
      EXPECT_GE(total, previous_total);
      previous_total = total;
      compute += rec.time;
      usage += rec.pe_usage;
      fired += rec.lb_fired ? 1 : 0;
    }
    EXPECT_FALSE(r.iterations.back().lb_fired);
    EXPECT_EQ(fired, r.lb_calls());
    double lb = 0.0;
    for (const auto& e : r.lb_events) {
      EXPECT_DOUBLE_EQ(e.cost, modeled_lb_cost(e.migrated, c.lb_cost_fixed, c.lb_cost_per_unit));
      EXPECT_EQ(e.alphas.size(), 16u);
      EXPECT_EQ(r.iterations[static_cast<std::size_t>(e.iteration)].migrated, e.migrated);
      lb += e.cost;
    }
    EXPECT_NEAR(r.compute_time, compute, 1e-9);
    EXPECT_NEAR(r.lb_time, lb, 1e-12);
    EXPECT_DOUBLE_EQ(r.total_time, r.compute_time + r.lb_time);
    EXPECT_NEAR(r.mean_pe_usage, usage / 300, 1e-9);
  }
}

TEST(Simulation, LbEventsAreSpacedOut) {
  const SimResult r = run_simulation(ErosionConfig{}, Policy::ulba, 0.4, 1);
  for (std::size_t k = 1; k < r.lb_events.size(); ++k) {
    EXPECT_GT(r.lb_events[k].iteration - r.lb_events[k - 1].iteration, 1);
  }
}

TEST(Simulation, DeskConfigStrongRockIsUnderloaded) {
  // With one strong rock among 16 stripes, some rebalance must unload a PE.
  const SimResult r = run_simulation(ErosionConfig{}, Policy::ulba, 0.4, 1);
  const auto ulba_events = std::count_if(r.lb_events.begin(), r.lb_events.end(),
                                         [](const LBEvent& e) { return e.mode == Policy::ulba; });
  EXPECT_GE(ulba_events, 1);
}
