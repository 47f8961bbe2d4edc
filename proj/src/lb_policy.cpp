#include "ulba/lb_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ulba {

namespace {

bool fresher(const WirEntry& candidate, const WirEntry& held) {
  if (candidate.stamp != held.stamp) {
    return candidate.stamp > held.stamp;
  }
  // Same stamp from two sources: pick deterministically so merge commutes.
  return candidate.wir > held.wir;
}

} // namespace

void WirDatabase::update(int rank, WirEntry entry) {
  auto [it, inserted] = entries_.try_emplace(rank, entry);
  if (!inserted && fresher(entry, it->second)) {
    it->second = entry;
  }
}

void WirDatabase::merge(const WirDatabase& other) {
  for (const auto& [rank, entry] : other.entries_) {
    update(rank, entry);
  }
}

std::optional<WirEntry> WirDatabase::find(int rank) const {
  const auto it = entries_.find(rank);
  if (it == entries_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::optional<double> estimate_wir(std::span<const double> history) {
  const std::size_t k = history.size();
  if (k < 2) {
    return std::nullopt;
  }
  const double x_mean = (static_cast<double>(k) - 1.0) / 2.0;
  const double y_mean = std::accumulate(history.begin(), history.end(), 0.0) / k;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (history[i] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

void gossip_round(std::vector<WirDatabase>& databases, Rng& rng) {
  const int pes = static_cast<int>(databases.size());
  if (pes < 2) {
    return;
  }
  const std::vector<WirDatabase> sent = databases;
  std::uniform_int_distribution<int> pick(0, pes - 2);
  for (int p = 0; p < pes; ++p) {
    int peer = pick(rng);
    if (peer >= p) {
      ++peer;
    }
    databases[static_cast<std::size_t>(peer)].merge(sent[static_cast<std::size_t>(p)]);
  }
}

namespace {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

Moments moments(const WirDatabase& db) {
  Moments out;
  const auto n = static_cast<double>(db.size());
  for (const auto& [rank, entry] : db.entries()) {
    out.mean += entry.wir;
  }
  out.mean /= n;
  double var = 0.0;
  for (const auto& [rank, entry] : db.entries()) {
    var += (entry.wir - out.mean) * (entry.wir - out.mean);
  }
  out.stddev = std::sqrt(var / n);
  return out;
}

bool exceeds(double wir, const Moments& m, double threshold) {
  if (!(m.stddev > 0)) {
    return false;
  }
  return (wir - m.mean) / m.stddev > threshold;
}

} // namespace

bool detect_overloading(const WirDatabase& db, int rank, double threshold) {
  const auto own = db.find(rank);
  if (!own) {
    throw ModelError("WIR database has no entry for rank " + std::to_string(rank));
  }
  if (db.size() < 2) {
    return false;
  }
  return exceeds(own->wir, moments(db), threshold);
}

int overloading_census(const WirDatabase& db, double threshold) {
  if (db.size() < 2) {
    return 0;
  }
  const Moments m = moments(db);
  int count = 0;
  for (const auto& [rank, entry] : db.entries()) {
    count += exceeds(entry.wir, m, threshold) ? 1 : 0;
  }
  return count;
}

void DegradationTracker::reset(double ref_time) {
  ref_time_ = ref_time;
  degradation_ = 0.0;
  recent_.assign(3, 0.0);
  count_ = 0;
}

void DegradationTracker::update(double time) {
  if (count_ == recent_.size()) {
    std::rotate(recent_.begin(), recent_.begin() + 1, recent_.end());
    recent_.back() = time;
  } else {
    recent_[count_++] = time;
  }
  std::vector<double> window(recent_.begin(), recent_.begin() + static_cast<long>(count_));
  std::sort(window.begin(), window.end());
  const std::size_t mid = count_ / 2;
  const double median = count_ % 2 ? window[mid] : (window[mid - 1] + window[mid]) / 2.0;
  degradation_ += median - ref_time_;
}

bool should_balance(const DegradationTracker& tracker, double lb_cost) {
  return tracker.degradation() >= lb_cost;
}

AlphaVector::AlphaVector(std::vector<double> values) : values_(std::move(values)) {
  for (const double a : values_) {
    if (!(a >= 0 && a <= 1)) {
      throw ModelError("alpha values must lie in [0, 1]");
    }
  }
}

AlphaVector AlphaVector::zeros(int pe_count) {
  return AlphaVector(std::vector<double>(static_cast<std::size_t>(pe_count), 0.0));
}

int AlphaVector::positive_count() const {
  return static_cast<int>(std::count_if(values_.begin(), values_.end(), [](double a) { return a > 0; }));
}

AlphaVector majority_rule(const AlphaVector& alphas) {
  // count >= P/2 without integer division
  if (2 * static_cast<std::size_t>(alphas.positive_count()) >= alphas.size()) {
    return AlphaVector::zeros(static_cast<int>(alphas.size()));
  }
  return alphas;
}

std::vector<double> partition_weights(const AlphaVector& alphas, double total_workload) {
  const std::size_t pes = alphas.size();
  if (pes == 0) {
    throw ModelError("partition_weights needs at least one PE");
  }
  const std::size_t overloading = static_cast<std::size_t>(alphas.positive_count());
  if (overloading == pes) {
    throw ModelError("partition_weights: every PE is overloading (N = P)");
  }
  if (!(total_workload > 0)) {
    throw ModelError("partition_weights needs a positive total workload");
  }

  const double share = total_workload / static_cast<double>(pes);
  double shed = 0.0;
  for (const double a : alphas.values()) {
    shed += a * share;
  }
  const double bonus = shed / static_cast<double>(pes - overloading);

  std::vector<double> targets(pes);
  double assigned = 0.0;
  for (std::size_t p = 0; p + 1 < pes; ++p) {
    targets[p] = alphas[p] > 0 ? (1.0 - alphas[p]) * share : share + bonus;
    assigned += targets[p];
  }
  targets.back() = total_workload - assigned;
  return targets;
}

} // namespace ulba
