#include "ulba/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

namespace ulba {

namespace {

void require(bool ok, const char* invariant) {
  if (!ok) {
    throw ModelError(std::string("invalid instance: ") + invariant);
  }
}

// alpha*N/(P-N): relative extra load of a non-overloading PE after an
// underloading rebalance.
double overload_share(const AppInstance& inst) {
  const int rest = inst.pe_count - inst.overloading_count;
  if (rest <= 0) {
    throw ModelError("invalid instance: N < P required (P = N divides by zero)");
  }
  return inst.alpha * inst.overloading_count / rest;
}

} // namespace

double AppInstance::workload_delta() const {
  return uniform_growth * pe_count + extra_growth * overloading_count;
}

double AppInstance::average_growth() const {
  return uniform_growth + extra_growth * overloading_count / pe_count;
}

double AppInstance::imbalance_growth() const {
  return extra_growth * (pe_count - overloading_count) / pe_count;
}

void validate(const AppInstance& inst) {
  require(inst.pe_count >= 2, "P >= 2");
  require(inst.overloading_count >= 0, "N >= 0");
  require(inst.overloading_count < inst.pe_count, "N < P");
  require(inst.iterations >= 1, "gamma >= 1");
  require(std::isfinite(inst.initial_workload) && inst.initial_workload >= 0, "w0 >= 0");
  require(std::isfinite(inst.uniform_growth) && inst.uniform_growth >= 0, "a >= 0");
  require(std::isfinite(inst.extra_growth) && inst.extra_growth >= 0, "m >= 0");
  require(inst.alpha >= 0 && inst.alpha <= 1, "0 <= alpha <= 1");
  require(inst.overloading_count > 0 || inst.alpha == 0, "N = 0 only with alpha = 0");
  require(std::isfinite(inst.pe_speed) && inst.pe_speed > 0, "omega > 0");
  require(std::isfinite(inst.lb_cost) && inst.lb_cost >= 0, "C >= 0");
}

LBSchedule::LBSchedule(std::vector<Iteration> calls, Iteration iterations)
    : calls_(std::move(calls)), iterations_(iterations) {
  if (iterations_ < 1) {
    throw ModelError("invalid schedule: gamma >= 1");
  }
  if (calls_.empty() || calls_.front() != 0) {
    throw ModelError("invalid schedule: first LB call must be at iteration 0");
  }
  for (std::size_t k = 1; k < calls_.size(); ++k) {
    if (calls_[k] <= calls_[k - 1]) {
      throw ModelError("invalid schedule: calls must be strictly increasing");
    }
  }
  if (calls_.back() >= iterations_) {
    throw ModelError("invalid schedule: calls must lie in [0, gamma)");
  }
}

LBSchedule LBSchedule::single(Iteration iterations) {
  return LBSchedule({0}, iterations);
}

Iteration LBSchedule::interval_end(std::size_t k) const {
  return k + 1 < calls_.size() ? calls_[k + 1] : iterations_;
}

double workload_at(const AppInstance& inst, Iteration i) {
  return inst.initial_workload + static_cast<double>(i) * inst.workload_delta();
}

double step_time_standard(const AppInstance& inst, Iteration lb_p, Iteration t) {
  const double balanced = workload_at(inst, lb_p) / inst.pe_count;
  return (balanced + (inst.extra_growth + inst.uniform_growth) * static_cast<double>(t)) /
         inst.pe_speed;
}

namespace {

// Step time once sigma- is known; lets interval sums evaluate it once.
double ulba_step(const AppInstance& inst, Iteration lb_p, Iteration t, Iteration lower) {
  const double balanced = workload_at(inst, lb_p) / inst.pe_count;
  const double td = static_cast<double>(t);
  if (t <= lower) {
    return ((1.0 + overload_share(inst)) * balanced + inst.uniform_growth * td) / inst.pe_speed;
  }
  return ((1.0 - inst.alpha) * balanced + (inst.extra_growth + inst.uniform_growth) * td) /
         inst.pe_speed;
}

} // namespace

double step_time_ulba(const AppInstance& inst, Iteration lb_p, Iteration t) {
  if (inst.alpha == 0) {
    return step_time_standard(inst, lb_p, t);
  }
  return ulba_step(inst, lb_p, t, sigma_minus(inst, lb_p));
}

double step_time(const AppInstance& inst, Policy policy, Iteration lb_p, Iteration t) {
  return policy == Policy::ulba ? step_time_ulba(inst, lb_p, t)
                                : step_time_standard(inst, lb_p, t);
}

double interval_time(const AppInstance& inst, Policy policy, Iteration lb_p, Iteration lb_n) {
  double sum = inst.lb_cost;
  if (policy == Policy::standard || inst.alpha == 0) {
    for (Iteration i = lb_p; i < lb_n; ++i) {
      sum += step_time_standard(inst, lb_p, i - lb_p);
    }
    return sum;
  }
  const Iteration lower = sigma_minus(inst, lb_p);
  for (Iteration i = lb_p; i < lb_n; ++i) {
    sum += ulba_step(inst, lb_p, i - lb_p, lower);
  }
  return sum;
}

PostLBWorkloads workload_after_lb(const AppInstance& inst, Iteration lb_p) {
  const double share = overload_share(inst);
  const double balanced = workload_at(inst, lb_p) / inst.pe_count;
  return {(1.0 - inst.alpha) * balanced, (1.0 + share) * balanced};
}

Iteration sigma_minus(const AppInstance& inst, Iteration i) {
  if (inst.extra_growth == 0) {
    throw NoImbalance();
  }
  if (inst.alpha == 0) {
    return 0;
  }
  // (1 + N/(P-N)) * alpha*W/(m*P) simplifies to alpha*W/(m*(P-N)), which keeps
  // exact integers exact.
  const int rest = inst.pe_count - inst.overloading_count;
  if (rest <= 0) {
    throw ModelError("invalid instance: N < P required (P = N divides by zero)");
  }
  return static_cast<Iteration>(
      std::floor(inst.alpha * workload_at(inst, i) / (inst.extra_growth * rest)));
}

double imbalance_cost(const AppInstance& inst, double tau) {
  return inst.imbalance_growth() * tau * tau / (2.0 * inst.pe_speed);
}

double overhead_cost(const AppInstance& inst, Iteration lb_p, double tau) {
  const double share = overload_share(inst);
  if (share == 0) {
    return 0.0;
  }
  const double horizon = static_cast<double>(lb_p + sigma_minus(inst, lb_p)) + tau;
  const double workload = inst.initial_workload + horizon * inst.workload_delta();
  return share * workload / (inst.pe_speed * inst.pe_count);
}

UpperBound upper_bound(const AppInstance& inst, Iteration i) {
  const double m_hat = inst.imbalance_growth();
  if (!(m_hat > 0)) {
    throw NoImbalance();
  }
  UpperBound bound;
  bound.lower = sigma_minus(inst, i);

  // Work-unit form (multiplied through by omega):
  //   (m_hat/2) tau^2 - k*dW/P tau - [k*(W(i) + sigma-*dW)/P + omega*C] = 0
  const double share = overload_share(inst);
  const double delta = inst.workload_delta();
  const double quad = m_hat / 2.0;
  const double lin = share * delta / inst.pe_count;
  const double constant =
      share * (workload_at(inst, i) + static_cast<double>(bound.lower) * delta) / inst.pe_count +
      inst.pe_speed * inst.lb_cost;
  assert(constant >= 0);

  if (lin == 0) {
    bound.tau = std::sqrt(constant / quad);
  } else {
    const double disc = lin * lin + 4.0 * quad * constant;
    assert(disc >= 0);
    bound.tau = (lin + std::sqrt(disc)) / (2.0 * quad);
  }
  const auto whole = static_cast<Iteration>(std::floor(bound.tau));
  bound.upper = bound.lower + std::max<Iteration>(1, whole);
  return bound;
}

Iteration sigma_plus(const AppInstance& inst, Iteration i) {
  return upper_bound(inst, i).upper;
}

double standard_interval(const AppInstance& inst) {
  const double m_hat = inst.imbalance_growth();
  if (!(m_hat > 0)) {
    throw NoImbalance();
  }
  return std::sqrt(2.0 * inst.pe_speed * inst.lb_cost / m_hat);
}

double total_time(const AppInstance& inst, Policy policy, const LBSchedule& schedule,
                  TotalTimeOptions options) {
  validate(inst);
  if (schedule.iterations() != inst.iterations) {
    throw ModelError("invalid schedule: horizon differs from gamma");
  }
  const auto calls = schedule.calls();
  double sum = 0.0;
  for (std::size_t k = 0; k < calls.size(); ++k) {
    sum += interval_time(inst, policy, calls[k], schedule.interval_end(k));
  }
  if (options.free_initial_balance) {
    sum -= inst.lb_cost;
  }
  return sum;
}

LBSchedule sigma_plus_schedule(const AppInstance& inst) {
  validate(inst);
  std::vector<Iteration> calls{0};
  for (;;) {
    const Iteration next = calls.back() + sigma_plus(inst, calls.back());
    if (next >= inst.iterations) {
      break;
    }
    calls.push_back(next);
  }
  return LBSchedule(std::move(calls), inst.iterations);
}

} // namespace ulba
