#include "ulba/interval_optimizer.hpp"

#include <cmath>
#include <limits>

namespace ulba {

ScheduleState::ScheduleState(Iteration iterations) {
  if (iterations < 1) {
    throw ModelError("schedule state needs gamma >= 1");
  }
  decisions_.assign(static_cast<std::size_t>(iterations), 0);
  decisions_[0] = 1;
}

ScheduleState ScheduleState::from_schedule(const LBSchedule& schedule) {
  ScheduleState state(schedule.iterations());
  for (const Iteration call : schedule.calls()) {
    state.decisions_[static_cast<std::size_t>(call)] = 1;
  }
  return state;
}

void ScheduleState::flip(Iteration i) {
  if (i <= 0 || i >= size()) {
    throw ModelError("only indices in [1, gamma) may be flipped");
  }
  auto& d = decisions_[static_cast<std::size_t>(i)];
  d = d ? 0 : 1;
}

LBSchedule ScheduleState::to_schedule() const {
  std::vector<Iteration> calls;
  for (std::size_t i = 0; i < decisions_.size(); ++i) {
    if (decisions_[i]) {
      calls.push_back(static_cast<Iteration>(i));
    }
  }
  return LBSchedule(std::move(calls), size());
}

void validate(const AnnealParams& params) {
  if (!(params.initial_temperature > 0) || !(params.final_temperature > 0)) {
    throw ModelError("anneal temperatures must be > 0");
  }
  if (!(params.initial_temperature > params.final_temperature)) {
    throw ModelError("anneal initial temperature must exceed the final one");
  }
  if (params.steps < 1) {
    throw ModelError("anneal steps must be >= 1");
  }
  if (params.moves_per_temperature < 0) {
    throw ModelError("anneal moves per temperature must be >= 0");
  }
}

double energy(const AppInstance& inst, Policy policy, const ScheduleState& state) {
  return total_time(inst, policy, state.to_schedule());
}

ScheduleState neighbor(const ScheduleState& state, Rng& rng) {
  if (state.size() < 2) {
    throw ModelError("neighbor needs gamma >= 2");
  }
  std::uniform_int_distribution<Iteration> pick(1, state.size() - 1);
  ScheduleState next = state;
  next.flip(pick(rng));
  return next;
}

namespace {

ScheduleState warm_start(const AppInstance& inst) {
  try {
    return ScheduleState::from_schedule(sigma_plus_schedule(inst));
  } catch (const NoImbalance&) {
    return ScheduleState(inst.iterations);
  }
}

// Energy change of flipping `i`: only the interval(s) around `i` move.
double flip_delta(const AppInstance& inst, Policy policy, const ScheduleState& state,
                  Iteration i) {
  Iteration prev = i - 1;
  while (!state[prev]) {
    --prev;
  }
  Iteration next = i + 1;
  while (next < state.size() && !state[next]) {
    ++next;
  }
  const double joined = interval_time(inst, policy, prev, next);
  const double split = interval_time(inst, policy, prev, i) + interval_time(inst, policy, i, next);
  return state[i] ? joined - split : split - joined;
}

} // namespace

ScheduleResult anneal(const AppInstance& inst, Policy policy, const AnnealParams& params) {
  validate(inst);
  return anneal(inst, policy, params, warm_start(inst));
}

ScheduleResult anneal(const AppInstance& inst, Policy policy, const AnnealParams& params,
                      const ScheduleState& initial) {
  validate(inst);
  validate(params);
  if (initial.size() != inst.iterations) {
    throw ModelError("initial state length differs from gamma");
  }

  ScheduleState current = initial;
  double current_energy = energy(inst, policy, current);
  ScheduleState best = current;
  double best_energy = current_energy;

  if (inst.iterations < 2 || params.moves_per_temperature == 0) {
    return {best, best_energy};
  }

  const double scale = current_energy > 0 ? current_energy : 1.0;
  const double ratio =
      params.steps > 1 ? std::pow(params.final_temperature / params.initial_temperature,
                                  1.0 / (params.steps - 1))
                       : 1.0;

  Rng rng(params.seed);
  std::uniform_int_distribution<Iteration> pick(1, inst.iterations - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double temperature = params.initial_temperature * scale;
  for (int step = 0; step < params.steps; ++step) {
    for (int move = 0; move < params.moves_per_temperature; ++move) {
      const Iteration i = pick(rng);
      const double delta = flip_delta(inst, policy, current, i);
      if (delta <= 0 || unit(rng) < std::exp(-delta / temperature)) {
        current.flip(i);
        current_energy += delta;
        if (current_energy < best_energy) {
          best = current;
          best_energy = current_energy;
        }
      }
    }
    temperature *= ratio;
  }
  // Deltas accumulate rounding; report the exact energy of the best state.
  return {best, energy(inst, policy, best)};
}

ScheduleResult exhaustive_best(const AppInstance& inst, Policy policy) {
  validate(inst);
  const Iteration gamma = inst.iterations;
  if (gamma > kExhaustiveLimit) {
    throw ModelError("exhaustive search refuses gamma > " + std::to_string(kExhaustiveLimit));
  }

  // cost[p][n] for every interval [p, n)
  const auto g = static_cast<std::size_t>(gamma);
  std::vector<std::vector<double>> cost(g, std::vector<double>(g + 1, 0.0));
  for (Iteration p = 0; p < gamma; ++p) {
    for (Iteration n = p + 1; n <= gamma; ++n) {
      cost[static_cast<std::size_t>(p)][static_cast<std::size_t>(n)] =
          interval_time(inst, policy, p, n);
    }
  }

  const int free_bits = static_cast<int>(gamma - 1);
  const std::uint64_t count = std::uint64_t{1} << free_bits;
  std::uint64_t best_mask = 0;
  double best_energy = std::numeric_limits<double>::infinity();
  // Index 1 is the most significant bit, so increasing masks walk the
  // decision vectors in lexicographic order and strict improvement keeps the
  // smallest one on ties.
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    double sum = 0.0;
    std::size_t open = 0;
    for (int bit = 0; bit < free_bits; ++bit) {
      const std::size_t index = static_cast<std::size_t>(bit) + 1;
      if (mask >> (free_bits - 1 - bit) & 1u) {
        sum += cost[open][index];
        open = index;
      }
    }
    sum += cost[open][g];
    if (sum < best_energy) {
      best_energy = sum;
      best_mask = mask;
    }
  }

  ScheduleState best(gamma);
  for (int bit = 0; bit < free_bits; ++bit) {
    if (best_mask >> (free_bits - 1 - bit) & 1u) {
      best.flip(bit + 1);
    }
  }
  return {best, energy(inst, policy, best)};
}

double relative_gain(double reference, double test) {
  if (!(reference > 0)) {
    throw ModelError("relative gain needs a positive reference");
  }
  return 100.0 * (reference - test) / reference;
}

} // namespace ulba
