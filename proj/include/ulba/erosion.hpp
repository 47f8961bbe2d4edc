#pragma once

#include "ulba/lb_policy.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ulba {

/// Geometry, erosion and cost parameters of the emulated erosion application.
/// The domain is (pe_count * stripe_width) columns by `height` rows with one
/// rock disk per initial stripe.
struct ErosionConfig {
  int pe_count = 16;
  int stripe_width = 128; // Sx, columns per PE at start
  int height = 128;       // Sy
  int rock_radius = 28;
  int strong_count = 1;
  double weak_probability = 0.02;
  double strong_probability = 0.4;
  Iteration iterations = 500;
  double pe_speed = 1e6;          // work units per second
  double lb_cost_fixed = 1e-2;    // c0, seconds
  double lb_cost_per_unit = 5e-8; // c1, seconds per migrated work unit
  double lb_cost_prior = 1e-2;    // average LB cost assumed before the first LB
  double z_threshold = kDefaultZThreshold;
  int wir_window = static_cast<int>(kDefaultWirWindow);
};

/// Throws ConfigError naming the violated constraint.
void validate(const ErosionConfig& config);

enum class CellKind : std::uint8_t { fluid, refined, weak_rock, strong_rock };

/// Fluid/rock field stored column-major. Rock cells carry no work; plain fluid
/// cells weigh 1 and refined (eroded) cells weigh 4. Column weights are kept up
/// to date on every change.
class ErosionGrid {
public:
  static constexpr int kFluidWeight = 1;
  static constexpr int kRefinedWeight = 4;

  ErosionGrid(int width, int height, double weak_probability, double strong_probability);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(col) * static_cast<std::size_t>(height_) +
           static_cast<std::size_t>(row);
  }
  CellKind at(int col, int row) const { return cells_[index(col, row)]; }
  bool is_rock(int col, int row) const;
  int weight(int col, int row) const;
  double erosion_probability(int col, int row) const;

  /// Places rock; only valid on plain fluid cells during setup.
  void place_rock(int col, int row, bool strong);
  /// Converts a rock cell into refined fluid.
  void erode(int col, int row);

  std::span<const std::int64_t> column_weights() const { return column_weights_; }
  std::int64_t total_weight() const;
  /// Rock cell indices in ascending order.
  std::span<const std::size_t> rock_cells() const { return rock_cells_; }
  void compact_rock_list();

  bool operator==(const ErosionGrid&) const = default;

private:
  int width_;
  int height_;
  double weak_probability_;
  double strong_probability_;
  std::vector<CellKind> cells_;
  std::vector<std::int64_t> column_weights_;
  std::vector<std::size_t> rock_cells_;
};

struct RockDisk {
  double center_col = 0.0;
  double center_row = 0.0;
  int radius = 1;
  double probability = 0.0;
};

/// One disk per PE stripe, centred at column (p + 0.5) * Sx and mid-height. A
/// cell is rock when its centre lies within the radius. `strong_count` disks,
/// chosen uniformly from the seed, get the strong probability.
std::pair<ErosionGrid, std::vector<RockDisk>> init_grid(const ErosionConfig& config,
                                                         std::uint64_t seed);

/// Every rock cell runs one trial per fluid 4-neighbour with its probability;
/// any success turns it into refined fluid. Conversions are applied after all
/// trials. Returns the number of eroded cells.
std::size_t erosion_step(ErosionGrid& grid, Rng& rng);

std::vector<std::int64_t> column_workloads(const ErosionGrid& grid);

/// Contiguous column ranges, stripe p = [cut_p, cut_{p+1}).
class StripePartition {
public:
  /// Throws ModelError unless cuts run from 0 to `width` with non-empty stripes.
  StripePartition(std::vector<int> cuts, int width);
  static StripePartition uniform(int pe_count, int width);

  int stripe_count() const { return static_cast<int>(cuts_.size()) - 1; }
  int width() const { return cuts_.back(); }
  int begin(int p) const { return cuts_[static_cast<std::size_t>(p)]; }
  int end(int p) const { return cuts_[static_cast<std::size_t>(p) + 1]; }
  std::span<const int> cuts() const { return cuts_; }
  int owner(int col) const;

  bool operator==(const StripePartition&) const = default;

private:
  std::vector<int> cuts_;
};

std::vector<std::int64_t> stripe_workloads(const StripePartition& partition,
                                           std::span<const std::int64_t> columns);

/// Greedy prefix-sum cuts: cut p+1 is the first column boundary where the
/// accumulated weight reaches the cumulative target of stripes 0..p, clamped so
/// every stripe keeps at least one column.
StripePartition stripe_partition(std::span<const std::int64_t> columns,
                                 std::span<const double> targets);

/// Bulk-synchronous step: the slowest stripe sets the pace.
double modeled_iteration_time(const StripePartition& partition,
                              std::span<const std::int64_t> columns, double pe_speed);

/// Weight of all columns whose owner changes.
std::int64_t migrated_weight(const StripePartition& before, const StripePartition& after,
                             std::span<const std::int64_t> columns);

double modeled_lb_cost(std::int64_t migrated, double fixed_cost, double cost_per_unit);

struct LBEvent {
  Iteration iteration = 0;
  Policy mode = Policy::standard; // ulba when any alpha survived the majority rule
  std::vector<double> alphas;
  std::int64_t migrated = 0;
  double cost = 0.0;

  bool operator==(const LBEvent&) const = default;
};

struct IterationRecord {
  Iteration iteration = 0;
  double time = 0.0;      // seconds
  double pe_usage = 0.0;  // mean/max load, percent
  bool lb_fired = false;
  std::int64_t migrated = 0;

  bool operator==(const IterationRecord&) const = default;
};

struct SimResult {
  std::vector<IterationRecord> iterations;
  std::vector<std::vector<std::int64_t>> pe_workloads; // [iteration][pe]
  std::vector<LBEvent> lb_events;
  double compute_time = 0.0;
  double lb_time = 0.0;
  double total_time = 0.0;
  double mean_pe_usage = 0.0;

  std::size_t lb_calls() const { return lb_events.size(); }

  bool operator==(const SimResult&) const = default;
};

/// Runs the erosion application under `policy`. The standard policy ignores
/// `alpha`. Erosion and gossip draw from separate streams of `seed`, so both
/// policies see the same erosion history.
SimResult run_simulation(const ErosionConfig& config, Policy policy, double alpha,
                         std::uint64_t seed);

} // namespace ulba
