#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ulba {

/// Iteration index or iteration count of an iterative application.
using Iteration = std::int64_t;

/// Every stochastic component draws from this engine so that a seed fully
/// determines a run.
using Rng = std::mt19937_64;

/// Builds an independent engine for item `stream` of a run seeded with
/// `master`. Parallel and serial evaluation see identical streams.
Rng child_rng(std::uint64_t master, std::uint64_t stream);

/// Raised when inputs violate a model invariant (bad parameter domain).
class ModelError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when an instance has no imbalance growth (m = 0 or m_hat = 0), so the
/// rebalancing bounds are undefined.
class NoImbalance : public ModelError {
public:
  NoImbalance() : ModelError("no-imbalance: imbalance growth rate is zero") {}
};

/// Raised for malformed or incomplete run configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Policy { standard, ulba };

std::string_view to_string(Policy policy);
Policy parse_policy(std::string_view text);

} // namespace ulba
