#include "ulba/experiments.hpp"
#include "ulba/interval_optimizer.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace ulba;

namespace {

AppInstance small_instance(std::uint64_t id, Iteration horizon) {
  SamplingSpec spec;
  spec.seed = 99;
  spec.iterations = horizon;
  // Cheap balancing keeps the optimum away from the single-interval schedule.
  spec.cost_min = 0.01;
  spec.cost_max = 0.3;
  return sample_instance(spec, id);
}

// Plain bit-mask enumeration over LB calls at 1..gamma-1.
double brute_force_optimum(const AppInstance& inst, Policy policy) {
  const Iteration g = inst.iterations;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (g - 1)); ++mask) {
    std::vector<Iteration> calls{0};
    for (Iteration i = 1; i < g; ++i) {
      if (mask >> (i - 1) & 1) {
        calls.push_back(i);
      }
    }
    best = std::min(best, total_time(inst, policy, LBSchedule(calls, g)));
  }
  return best;
}

} // namespace

TEST(ScheduleState, RoundTripAndFlip) {
  const LBSchedule s({0, 3, 7}, 10);
  ScheduleState state = ScheduleState::from_schedule(s);
  EXPECT_EQ(state.size(), 10);
  EXPECT_TRUE(state[0]);
  EXPECT_TRUE(state[3]);
  EXPECT_FALSE(state[4]);
  EXPECT_EQ(state.to_schedule(), s);
  state.flip(4);
  EXPECT_EQ(state.to_schedule(), LBSchedule({0, 3, 4, 7}, 10));
  state.flip(4);
  EXPECT_EQ(state.to_schedule(), s);
  EXPECT_THROW(state.flip(0), ModelError);
  EXPECT_THROW(state.flip(10), ModelError);
  EXPECT_THROW(state.flip(-1), ModelError);
}

TEST(ScheduleState, NeighborFlipsExactlyOneIndex) {
  ScheduleState state(20);
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const ScheduleState next = neighbor(state, rng);
    int diff = 0;
    for (Iteration i = 0; i < 20; ++i) {
      diff += next[i] != state[i] ? 1 : 0;
    }
    ASSERT_EQ(diff, 1);
    ASSERT_TRUE(next[0]);
    state = next;
  }
  EXPECT_THROW(neighbor(ScheduleState(1), rng), ModelError);
}

TEST(Annealing, EnergyIsTotalTime) {
  const AppInstance inst = small_instance(1, 30);
  const LBSchedule s({0, 5, 17}, 30);
  EXPECT_EQ(energy(inst, Policy::ulba, ScheduleState::from_schedule(s)),
            total_time(inst, Policy::ulba, s));
}

TEST(Annealing, ExhaustiveMatchesBruteForce) {
  for (std::uint64_t id = 0; id < 10; ++id) {
    const AppInstance inst = small_instance(id, 10);
    for (const Policy policy : {Policy::standard, Policy::ulba}) {
      const ScheduleResult best = exhaustive_best(inst, policy);
      ASSERT_EQ(best.energy, energy(inst, policy, best.state));
      ASSERT_NEAR(best.energy, brute_force_optimum(inst, policy), 1e-12 * best.energy);
    }
  }
}

TEST(Annealing, ExhaustiveLimit) {
  const AppInstance inst = small_instance(0, kExhaustiveLimit + 1);
  EXPECT_THROW(exhaustive_best(inst, Policy::ulba), ModelError);
}

TEST(Annealing, FindsOptimumOnTinyHorizons) {
  AnnealParams params;
  params.steps = 200;
  for (std::uint64_t id = 0; id < 10; ++id) {
    const AppInstance inst = small_instance(id, 8 + static_cast<Iteration>(id % 5));
    params.seed = id;
    const ScheduleResult annealed = anneal(inst, Policy::ulba, params);
    const ScheduleResult best = exhaustive_best(inst, Policy::ulba);
    ASSERT_NEAR(annealed.energy, best.energy, 1e-12 * best.energy) << "instance " << id;
  }
}

TEST(Annealing, NeverWorseThanWarmStart) {
  AnnealParams params;
  params.steps = 100;
  for (std::uint64_t id = 0; id < 10; ++id) {
    const AppInstance inst = small_instance(id, 100);
    const double bound = total_time(inst, Policy::ulba, sigma_plus_schedule(inst));
    const ScheduleResult annealed = anneal(inst, Policy::ulba, params);
    ASSERT_LE(annealed.energy, bound);
    ASSERT_EQ(annealed.energy, energy(inst, Policy::ulba, annealed.state));
  }
}

TEST(Annealing, DeterministicPerSeed) {
  const AppInstance inst = small_instance(4, 60);
  AnnealParams params;
  params.steps = 50;
  params.seed = 12345;
  const ScheduleResult a = anneal(inst, Policy::ulba, params);
  const ScheduleResult b = anneal(inst, Policy::ulba, params);
  EXPECT_EQ(a.state, b.state);
  EXPECT_EQ(a.energy, b.energy);
}

TEST(Annealing, ZeroMovesReturnsStart) {
  const AppInstance inst = small_instance(2, 40);
  AnnealParams params;
  params.moves_per_temperature = 0;
  const ScheduleState start = ScheduleState::from_schedule(LBSchedule({0, 20}, 40));
  const ScheduleResult r = anneal(inst, Policy::standard, params, start);
  EXPECT_EQ(r.state, start);
}

TEST(Annealing, ParamsValidated) {
  AnnealParams p;
  p.initial_temperature = 0;
  EXPECT_ANY_THROW(validate(p));
  p = {};
  p.final_temperature = p.initial_temperature * 2;
  EXPECT_ANY_THROW(validate(p));
  p = {};
  p.steps = 0;
  EXPECT_ANY_THROW(validate(p));
  p = {};
  p.moves_per_temperature = -1;
  EXPECT_ANY_THROW(validate(p));
}

TEST(RelativeGain, SignAndScale) {
  EXPECT_DOUBLE_EQ(relative_gain(100, 90), 10.0);
  EXPECT_DOUBLE_EQ(relative_gain(100, 110), -10.0);
  EXPECT_THROW(relative_gain(0, 1), ModelError);
}
