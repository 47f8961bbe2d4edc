#pragma once

#include "ulba/common.hpp"

#include <span>
#include <vector>

namespace ulba {

/// Parameter set of one synthetic iterative application.
///
/// Every PE receives `uniform_growth` work units per iteration and each of the
/// `overloading_count` overloading PEs receives `extra_growth` on top of it.
/// Workloads are in work units; `lb_cost` is the only field in seconds.
struct AppInstance {
  int pe_count = 2;              // P
  int overloading_count = 0;     // N
  Iteration iterations = 1;      // gamma
  double initial_workload = 0.0; // W_tot(0)
  double uniform_growth = 0.0;   // a
  double extra_growth = 0.0;     // m
  double alpha = 0.0;            // underloading fraction
  double pe_speed = 1.0;         // omega, work units per second
  double lb_cost = 0.0;          // C, seconds

  /// Delta_W = a*P + m*N
  double workload_delta() const;
  /// a_hat = a + m*N/P
  double average_growth() const;
  /// m_hat = m*(P-N)/P
  double imbalance_growth() const;
};

/// Throws ModelError naming the first violated invariant.
void validate(const AppInstance& inst);

/// Iterations at which the load balancer fires. The first call opens the run at
/// iteration 0; each call starts an interval that ends at the next call (or at
/// gamma for the last one).
class LBSchedule {
public:
  LBSchedule() = default;
  /// Throws ModelError unless `calls` starts at 0, is strictly increasing and
  /// stays below `iterations`.
  LBSchedule(std::vector<Iteration> calls, Iteration iterations);

  /// Single interval covering the whole run.
  static LBSchedule single(Iteration iterations);

  std::span<const Iteration> calls() const { return calls_; }
  Iteration iterations() const { return iterations_; }
  std::size_t interval_count() const { return calls_.size(); }
  /// End (exclusive) of the interval opened by calls()[k].
  Iteration interval_end(std::size_t k) const;

  bool operator==(const LBSchedule&) const = default;

private:
  std::vector<Iteration> calls_{0};
  Iteration iterations_ = 1;
};

/// Workloads right after a ULBA rebalance.
struct PostLBWorkloads {
  double overloading = 0.0;     // W*, one overloading PE
  double non_overloading = 0.0; // W, one non-overloading PE
};

/// Rebalancing bound at an LB step, with the unfloored root kept for checks.
struct UpperBound {
  Iteration lower = 0; // sigma-
  double tau = 0.0;    // largest real root of the break-even quadratic
  Iteration upper = 1; // sigma+ = sigma- + max(1, floor(tau))
};

struct TotalTimeOptions {
  /// Skip the LB cost of the interval opened at iteration 0.
  bool free_initial_balance = false;
};

double workload_at(const AppInstance& inst, Iteration i);

/// Time of step `t` after a perfect rebalance at `lb_p`.
double step_time_standard(const AppInstance& inst, Iteration lb_p, Iteration t);

/// Time of step `t` after an underloading rebalance at `lb_p`. Before the
/// overloading PEs catch up the non-overloading group dominates, afterwards
/// the overloading one does.
double step_time_ulba(const AppInstance& inst, Iteration lb_p, Iteration t);

double step_time(const AppInstance& inst, Policy policy, Iteration lb_p, Iteration t);

/// LB cost plus the step times of the interval [lb_p, lb_n).
double interval_time(const AppInstance& inst, Policy policy, Iteration lb_p, Iteration lb_n);

PostLBWorkloads workload_after_lb(const AppInstance& inst, Iteration lb_p);

/// Iterations needed by the underloaded PEs to reach the load of the others
/// after a rebalance at `i`. Throws NoImbalance when m = 0.
Iteration sigma_minus(const AppInstance& inst, Iteration i);

/// Imbalance cost accumulated over `tau` iterations, continuous form, seconds.
double imbalance_cost(const AppInstance& inst, double tau);

/// Overhead of the underloading at the next LB step, seconds.
double overhead_cost(const AppInstance& inst, Iteration lb_p, double tau);

/// Solves imbalance(tau) = overhead(lb_p, tau) + C for the bound after a
/// rebalance at `i`. Throws NoImbalance when m_hat = 0.
UpperBound upper_bound(const AppInstance& inst, Iteration i);

Iteration sigma_plus(const AppInstance& inst, Iteration i);

/// Optimal period of the standard method, sqrt(2*omega*C/m_hat) iterations.
double standard_interval(const AppInstance& inst);

/// Sum over all intervals of the LB cost plus every step time.
double total_time(const AppInstance& inst, Policy policy, const LBSchedule& schedule,
                  TotalTimeOptions options = {});

/// Calls placed every sigma+ iterations, each gap recomputed from the grown
/// workload, until gamma is reached.
LBSchedule sigma_plus_schedule(const AppInstance& inst);

} // namespace ulba
