#pragma once

#include "ulba/common.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace ulba {

inline constexpr std::size_t kDefaultWirWindow = 5;
inline constexpr double kDefaultZThreshold = 3.0;

/// Workload increase rate of one PE and the iteration it was measured at.
struct WirEntry {
  double wir = 0.0;
  Iteration stamp = 0;

  bool operator==(const WirEntry&) const = default;
};

/// Per-PE view of every PE's WIR. Merging keeps the freshest stamp per rank,
/// so merge is idempotent, commutative and associative.
class WirDatabase {
public:
  using Entries = std::map<int, WirEntry>;

  /// Inserts or replaces the entry of `rank` if `entry` is fresher.
  void update(int rank, WirEntry entry);
  void merge(const WirDatabase& other);

  std::optional<WirEntry> find(int rank) const;
  std::size_t size() const { return entries_.size(); }
  const Entries& entries() const { return entries_; }

  bool operator==(const WirDatabase&) const = default;

private:
  Entries entries_;
};

/// Least-squares slope of a per-iteration workload history. Returns nullopt
/// for fewer than two samples.
std::optional<double> estimate_wir(std::span<const double> history);

/// One synchronous push round: every PE sends a snapshot of its database to a
/// uniformly chosen other PE, which merges it. Peers are drawn in rank order.
void gossip_round(std::vector<WirDatabase>& databases, Rng& rng);

/// True when the z-score of `rank`'s WIR over all entries of `db` exceeds
/// `threshold`. Population standard deviation; fewer than two entries or zero
/// spread never flag. Throws ModelError when `rank` is missing from `db`.
bool detect_overloading(const WirDatabase& db, int rank, double threshold = kDefaultZThreshold);

/// Number of ranks in `db` that detect_overloading would flag.
int overloading_census(const WirDatabase& db, double threshold = kDefaultZThreshold);

/// Cumulative iteration-time degradation since the last rebalance.
///
/// Each update takes the median of the last (up to) three iteration times and
/// adds its excess over the reference time. The sum is signed: faster steps
/// reduce it.
class DegradationTracker {
public:
  explicit DegradationTracker(double ref_time = 0.0) { reset(ref_time); }

  /// Starts a new interval with `ref_time` as reference; clears the window.
  void reset(double ref_time);
  void update(double time);

  double ref_time() const { return ref_time_; }
  double degradation() const { return degradation_; }
  std::span<const double> recent() const { return {recent_.data(), count_}; }

private:
  double ref_time_ = 0.0;
  double degradation_ = 0.0;
  std::vector<double> recent_;
  std::size_t count_ = 0;
};

/// Inclusive threshold: fires once degradation reaches `lb_cost`.
bool should_balance(const DegradationTracker& tracker, double lb_cost);

/// Per-PE underloading fractions; a positive entry marks a self-declared
/// overloading PE.
class AlphaVector {
public:
  AlphaVector() = default;
  /// Throws ModelError for values outside [0, 1].
  explicit AlphaVector(std::vector<double> values);
  static AlphaVector zeros(int pe_count);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t p) const { return values_[p]; }
  std::span<const double> values() const { return values_; }
  int positive_count() const;

  bool operator==(const AlphaVector&) const = default;

private:
  std::vector<double> values_;
};

/// Falls back to all zeros when at least half of the PEs ask to be unloaded.
AlphaVector majority_rule(const AlphaVector& alphas);

/// Target workload per PE for a total `total_workload`.
///
/// Overloading PE p keeps (1 - alpha_p) of the even share; the shed amount is
/// split evenly over the non-overloading PEs. With one uniform alpha this is
/// the two-group post-rebalance split of the analytical model. The last PE
/// absorbs the rounding so the targets sum to `total_workload`.
std::vector<double> partition_weights(const AlphaVector& alphas, double total_workload);

} // namespace ulba
