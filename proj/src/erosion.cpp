#include "ulba/erosion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ulba {

void validate(const ErosionConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) {
      throw ConfigError("invalid simulation config: " + what);
    }
  };
  require(c.pe_count >= 2, "P >= 2");
  require(c.stripe_width >= 1 && c.height >= 1, "Sx >= 1 and Sy >= 1");
  require(c.rock_radius > 0, "radius > 0");
  require(c.stripe_width > 2 * c.rock_radius, "Sx > 2*radius (disk overflows its stripe)");
  require(c.height > 2 * c.rock_radius, "Sy > 2*radius (disk overflows the domain)");
  require(c.strong_count >= 0 && c.strong_count <= c.pe_count, "0 <= strong <= P");
  require(c.weak_probability >= 0 && c.weak_probability <= 1, "weak_p in [0, 1]");
  require(c.strong_probability >= 0 && c.strong_probability <= 1, "strong_p in [0, 1]");
  require(c.iterations >= 1, "iterations >= 1");
  require(c.pe_speed > 0, "omega > 0");
  require(c.lb_cost_fixed >= 0 && c.lb_cost_per_unit >= 0 && c.lb_cost_prior >= 0,
          "LB cost parameters >= 0");
  require(c.wir_window >= 2, "wir_window >= 2");
  require(c.z_threshold > 0, "z_threshold > 0");
}

ErosionGrid::ErosionGrid(int width, int height, double weak_probability,
                         double strong_probability)
    : width_(width), height_(height), weak_probability_(weak_probability),
      strong_probability_(strong_probability),
      cells_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), CellKind::fluid),
      column_weights_(static_cast<std::size_t>(width), std::int64_t{height} * kFluidWeight) {}

bool ErosionGrid::is_rock(int col, int row) const {
  const CellKind k = at(col, row);
  return k == CellKind::weak_rock || k == CellKind::strong_rock;
}

int ErosionGrid::weight(int col, int row) const {
  switch (at(col, row)) {
  case CellKind::fluid:
    return kFluidWeight;
  case CellKind::refined:
    return kRefinedWeight;
  default:
    return 0;
  }
}

double ErosionGrid::erosion_probability(int col, int row) const {
  switch (at(col, row)) {
  case CellKind::weak_rock:
    return weak_probability_;
  case CellKind::strong_rock:
    return strong_probability_;
  default:
    return 0.0;
  }
}

void ErosionGrid::place_rock(int col, int row, bool strong) {
  const std::size_t i = index(col, row);
  if (cells_[i] != CellKind::fluid) {
    throw ModelError("rock placed on a non-fluid cell");
  }
  cells_[i] = strong ? CellKind::strong_rock : CellKind::weak_rock;
  column_weights_[static_cast<std::size_t>(col)] -= kFluidWeight;
  rock_cells_.insert(std::upper_bound(rock_cells_.begin(), rock_cells_.end(), i), i);
}

void ErosionGrid::erode(int col, int row) {
  const std::size_t i = index(col, row);
  if (!is_rock(col, row)) {
    throw ModelError("only rock cells erode");
  }
  cells_[i] = CellKind::refined;
  column_weights_[static_cast<std::size_t>(col)] += kRefinedWeight;
}

std::int64_t ErosionGrid::total_weight() const {
  return std::accumulate(column_weights_.begin(), column_weights_.end(), std::int64_t{0});
}

void ErosionGrid::compact_rock_list() {
  std::erase_if(rock_cells_, [this](std::size_t i) {
    return cells_[i] != CellKind::weak_rock && cells_[i] != CellKind::strong_rock;
  });
}

std::pair<ErosionGrid, std::vector<RockDisk>> init_grid(const ErosionConfig& config,
                                                         std::uint64_t seed) {
  validate(config);
  const int pes = config.pe_count;
  ErosionGrid grid(pes * config.stripe_width, config.height, config.weak_probability,
                   config.strong_probability);

  std::vector<int> order(static_cast<std::size_t>(pes));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> strong(static_cast<std::size_t>(pes), false);
  for (int k = 0; k < config.strong_count; ++k) {
    strong[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;
  }

  std::vector<RockDisk> disks;
  const double r = config.rock_radius;
  for (int p = 0; p < pes; ++p) {
    const bool is_strong = strong[static_cast<std::size_t>(p)];
    RockDisk disk{(p + 0.5) * config.stripe_width, config.height / 2.0, config.rock_radius,
                  is_strong ? config.strong_probability : config.weak_probability};
    const int col_lo = std::max(0, static_cast<int>(std::floor(disk.center_col - r)));
    const int col_hi = std::min(grid.width() - 1, static_cast<int>(std::ceil(disk.center_col + r)));
    const int row_lo = std::max(0, static_cast<int>(std::floor(disk.center_row - r)));
    const int row_hi = std::min(grid.height() - 1, static_cast<int>(std::ceil(disk.center_row + r)));
    for (int col = col_lo; col <= col_hi; ++col) {
      for (int row = row_lo; row <= row_hi; ++row) {
        const double dx = col + 0.5 - disk.center_col;
        const double dy = row + 0.5 - disk.center_row;
        if (dx * dx + dy * dy <= r * r) {
          grid.place_rock(col, row, is_strong);
        }
      }
    }
    disks.push_back(disk);
  }
  return {std::move(grid), std::move(disks)};
}

std::size_t erosion_step(ErosionGrid& grid, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  static constexpr int kDc[4] = {-1, 1, 0, 0};
  static constexpr int kDr[4] = {0, 0, -1, 1};

  std::vector<std::size_t> converted;
  const int h = grid.height();
  for (const std::size_t cell : grid.rock_cells()) {
    const int col = static_cast<int>(cell / static_cast<std::size_t>(h));
    const int row = static_cast<int>(cell % static_cast<std::size_t>(h));
    const double p = grid.erosion_probability(col, row);
    bool hit = false;
    for (int k = 0; k < 4; ++k) {
      const int c = col + kDc[k];
      const int r = row + kDr[k];
      if (c < 0 || c >= grid.width() || r < 0 || r >= h || grid.is_rock(c, r)) {
        continue;
      }
      hit = (unit(rng) < p) || hit;
    }
    if (hit) {
      converted.push_back(cell);
    }
  }
  for (const std::size_t cell : converted) {
    grid.erode(static_cast<int>(cell / static_cast<std::size_t>(h)),
               static_cast<int>(cell % static_cast<std::size_t>(h)));
  }
  if (!converted.empty()) {
    grid.compact_rock_list();
  }
  return converted.size();
}

std::vector<std::int64_t> column_workloads(const ErosionGrid& grid) {
  const auto w = grid.column_weights();
  return {w.begin(), w.end()};
}

StripePartition::StripePartition(std::vector<int> cuts, int width) : cuts_(std::move(cuts)) {
  if (cuts_.size() < 2 || cuts_.front() != 0 || cuts_.back() != width) {
    throw ModelError("stripe cuts must run from 0 to the domain width");
  }
  for (std::size_t k = 1; k < cuts_.size(); ++k) {
    if (cuts_[k] <= cuts_[k - 1]) {
      throw ModelError("stripes must be non-empty");
    }
  }
}

StripePartition StripePartition::uniform(int pe_count, int width) {
  if (pe_count < 1 || width < pe_count) {
    throw ModelError("cannot split " + std::to_string(width) + " columns into " +
                     std::to_string(pe_count) + " stripes");
  }
  std::vector<int> cuts(static_cast<std::size_t>(pe_count) + 1);
  for (int p = 0; p <= pe_count; ++p) {
    cuts[static_cast<std::size_t>(p)] =
        static_cast<int>(static_cast<std::int64_t>(width) * p / pe_count);
  }
  return StripePartition(std::move(cuts), width);
}

int StripePartition::owner(int col) const {
  const auto it = std::upper_bound(cuts_.begin(), cuts_.end(), col);
  return static_cast<int>(it - cuts_.begin()) - 1;
}

std::vector<std::int64_t> stripe_workloads(const StripePartition& partition,
                                           std::span<const std::int64_t> columns) {
  std::vector<std::int64_t> out(static_cast<std::size_t>(partition.stripe_count()), 0);
  for (int p = 0; p < partition.stripe_count(); ++p) {
    for (int c = partition.begin(p); c < partition.end(p); ++c) {
      out[static_cast<std::size_t>(p)] += columns[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

StripePartition stripe_partition(std::span<const std::int64_t> columns,
                                 std::span<const double> targets) {
  const int width = static_cast<int>(columns.size());
  const int pes = static_cast<int>(targets.size());
  if (pes < 1 || width < pes) {
    throw ModelError("cannot split " + std::to_string(width) + " columns into " +
                     std::to_string(pes) + " stripes");
  }
  const auto total = static_cast<double>(
      std::accumulate(columns.begin(), columns.end(), std::int64_t{0}));
  const double wanted = std::accumulate(targets.begin(), targets.end(), 0.0);
  if (std::abs(total - wanted) > 1.0 + 1e-9 * total) {
    throw ModelError("stripe targets do not sum to the total column weight");
  }

  std::vector<int> cuts{0};
  std::int64_t prefix = 0; // weight of columns [0, col)
  int col = 0;
  double cumulative = 0.0;
  for (int p = 0; p + 1 < pes; ++p) {
    cumulative += targets[static_cast<std::size_t>(p)];
    const int lowest = cuts.back() + 1;
    const int highest = width - (pes - p - 1);
    while (col < highest && (col < lowest || static_cast<double>(prefix) < cumulative)) {
      prefix += columns[static_cast<std::size_t>(col)];
      ++col;
    }
    cuts.push_back(col);
  }
  cuts.push_back(width);
  return StripePartition(std::move(cuts), width);
}

double modeled_iteration_time(const StripePartition& partition,
                              std::span<const std::int64_t> columns, double pe_speed) {
  const auto loads = stripe_workloads(partition, columns);
  return static_cast<double>(*std::max_element(loads.begin(), loads.end())) / pe_speed;
}

std::int64_t migrated_weight(const StripePartition& before, const StripePartition& after,
                             std::span<const std::int64_t> columns) {
  if (before.width() != after.width() ||
      before.width() != static_cast<int>(columns.size())) {
    throw ModelError("partitions and columns disagree on the domain width");
  }
  std::int64_t moved = 0;
  int a = 0;
  int b = 0;
  for (int c = 0; c < before.width(); ++c) {
    while (before.end(a) <= c) {
      ++a;
    }
    while (after.end(b) <= c) {
      ++b;
    }
    if (a != b) {
      moved += columns[static_cast<std::size_t>(c)];
    }
  }
  return moved;
}

double modeled_lb_cost(std::int64_t migrated, double fixed_cost, double cost_per_unit) {
  return fixed_cost + cost_per_unit * static_cast<double>(migrated);
}

namespace {

double pe_usage(std::span<const std::int64_t> loads) {
  const auto peak = *std::max_element(loads.begin(), loads.end());
  if (peak == 0) {
    return 100.0;
  }
  const double mean =
      static_cast<double>(std::accumulate(loads.begin(), loads.end(), std::int64_t{0})) /
      static_cast<double>(loads.size());
  return 100.0 * mean / static_cast<double>(peak);
}

} // namespace

SimResult run_simulation(const ErosionConfig& config, Policy policy, double alpha,
                         std::uint64_t seed) {
  validate(config);
  if (!(alpha >= 0 && alpha <= 1)) {
    throw ConfigError("invalid simulation config: alpha in [0, 1]");
  }
  if (policy == Policy::standard) {
    alpha = 0.0;
  }

  ErosionGrid grid = init_grid(config, seed).first;
  Rng erosion_rng = child_rng(seed, 1);
  Rng gossip_rng = child_rng(seed, 2);

  const int pes = config.pe_count;
  const auto window = static_cast<std::size_t>(config.wir_window);
  StripePartition partition = StripePartition::uniform(pes, grid.width());
  std::vector<WirDatabase> databases(static_cast<std::size_t>(pes));
  std::vector<std::vector<std::int64_t>> snapshots; // last `window` column states
  DegradationTracker tracker;
  bool interval_start = true;
  double lb_cost_sum = 0.0;

  SimResult result;
  result.iterations.reserve(static_cast<std::size_t>(config.iterations));
  result.pe_workloads.reserve(static_cast<std::size_t>(config.iterations));

  for (Iteration i = 0; i < config.iterations; ++i) {
    erosion_step(grid, erosion_rng);
    std::vector<std::int64_t> columns = column_workloads(grid);
    if (snapshots.size() == window) {
      snapshots.erase(snapshots.begin());
    }
    snapshots.push_back(columns);

    std::vector<std::int64_t> loads = stripe_workloads(partition, columns);
    IterationRecord record;
    record.iteration = i;
    record.time = modeled_iteration_time(partition, columns, config.pe_speed);
    record.pe_usage = pe_usage(loads);

    // Each PE measures its WIR over the columns it currently owns.
    std::vector<std::vector<double>> histories(static_cast<std::size_t>(pes));
    for (const auto& snapshot : snapshots) {
      const auto past = stripe_workloads(partition, snapshot);
      for (int p = 0; p < pes; ++p) {
        histories[static_cast<std::size_t>(p)].push_back(
            static_cast<double>(past[static_cast<std::size_t>(p)]));
      }
    }
    for (int p = 0; p < pes; ++p) {
      if (const auto wir = estimate_wir(histories[static_cast<std::size_t>(p)])) {
        databases[static_cast<std::size_t>(p)].update(p, {*wir, i});
      }
    }
    gossip_round(databases, gossip_rng);

    if (interval_start) {
      tracker.reset(record.time);
      interval_start = false;
    }
    tracker.update(record.time);

    const double avg_lb_cost =
        result.lb_events.empty() ? config.lb_cost_prior
                                 : lb_cost_sum / static_cast<double>(result.lb_events.size());
    double threshold = avg_lb_cost;
    const double total = static_cast<double>(grid.total_weight());
    if (alpha > 0) {
      const int census = overloading_census(databases[0], config.z_threshold);
      if (census > 0 && 2 * census < pes) {
        threshold += alpha * census / (pes - census) * total / (config.pe_speed * pes);
      }
    }

    if (should_balance(tracker, threshold) && i + 1 < config.iterations) {
      std::vector<double> requested(static_cast<std::size_t>(pes), 0.0);
      if (alpha > 0) {
        for (int p = 0; p < pes; ++p) {
          const auto& db = databases[static_cast<std::size_t>(p)];
          if (db.find(p) && detect_overloading(db, p, config.z_threshold)) {
            requested[static_cast<std::size_t>(p)] = alpha;
          }
        }
      }
      const AlphaVector alphas = majority_rule(AlphaVector(std::move(requested)));
      const auto targets = partition_weights(alphas, total);
      StripePartition next = stripe_partition(columns, targets);

      LBEvent event;
      event.iteration = i;
      event.mode = alphas.positive_count() > 0 ? Policy::ulba : Policy::standard;
      event.alphas.assign(alphas.values().begin(), alphas.values().end());
      event.migrated = migrated_weight(partition, next, columns);
      event.cost = modeled_lb_cost(event.migrated, config.lb_cost_fixed, config.lb_cost_per_unit);
      lb_cost_sum += event.cost;
      result.lb_time += event.cost;
      record.lb_fired = true;
      record.migrated = event.migrated;
      result.lb_events.push_back(std::move(event));

      partition = std::move(next);
      interval_start = true;
    }

    result.compute_time += record.time;
    result.mean_pe_usage += record.pe_usage;
    result.iterations.push_back(record);
    result.pe_workloads.push_back(std::move(loads));
  }

  result.total_time = result.compute_time + result.lb_time;
  result.mean_pe_usage /= static_cast<double>(config.iterations);
  return result;
}

} // namespace ulba
