#pragma once

#include "ulba/model.hpp"

#include <cstdint>
#include <vector>

namespace ulba {

/// One on/off LB decision per iteration; index 0 is always on.
class ScheduleState {
public:
  explicit ScheduleState(Iteration iterations);
  static ScheduleState from_schedule(const LBSchedule& schedule);

  Iteration size() const { return static_cast<Iteration>(decisions_.size()); }
  bool operator[](Iteration i) const { return decisions_[static_cast<std::size_t>(i)] != 0; }
  /// Throws ModelError for index 0 or out-of-range indices.
  void flip(Iteration i);
  LBSchedule to_schedule() const;

  bool operator==(const ScheduleState&) const = default;
  /// Lexicographic order with false < true.
  bool operator<(const ScheduleState& other) const { return decisions_ < other.decisions_; }

private:
  std::vector<std::uint8_t> decisions_;
};

/// Geometric cooling from `initial_temperature` to `final_temperature` over
/// `steps` temperature levels. Temperatures are fractions of the energy of the
/// starting state, which keeps one parameter set usable across instances whose
/// energies differ by orders of magnitude.
struct AnnealParams {
  double initial_temperature = 1e-2;
  double final_temperature = 1e-6;
  int steps = 1000;
  int moves_per_temperature = 100;
  std::uint64_t seed = 1;
};

void validate(const AnnealParams& params);

struct ScheduleResult {
  ScheduleState state;
  double energy = 0.0;
};

/// Total time of the schedule induced by the true entries.
double energy(const AppInstance& inst, Policy policy, const ScheduleState& state);

/// Flips one uniformly chosen index in [1, gamma).
ScheduleState neighbor(const ScheduleState& state, Rng& rng);

/// Simulated annealing with Metropolis acceptance, warm-started from the
/// sigma+ schedule of `inst` (or the single-interval schedule when the bound is
/// undefined). Returns the best state ever visited.
ScheduleResult anneal(const AppInstance& inst, Policy policy, const AnnealParams& params);

/// Same, starting from `initial`.
ScheduleResult anneal(const AppInstance& inst, Policy policy, const AnnealParams& params,
                      const ScheduleState& initial);

inline constexpr Iteration kExhaustiveLimit = 20;

/// Global optimum by enumeration of all 2^(gamma-1) schedules. Ties resolve to
/// the lexicographically smallest decision vector. Throws ModelError when
/// gamma exceeds kExhaustiveLimit.
ScheduleResult exhaustive_best(const AppInstance& inst, Policy policy);

/// 100*(reference - test)/reference; positive when `test` is faster.
double relative_gain(double reference, double test);

} // namespace ulba
