#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pawl/bias_state.hpp"
#include "pawl/numeric.hpp"

namespace pawl {

// Reaction coordinate: scalar summary of a state along which the space is
// partitioned. The default is the energy -log pi(x), which every target
// supports for free through its cached log-density.
struct EnergyCoordinate {
  template <class State>
  double operator()(const State&, double log_pi) const {
    return -log_pi;
  }
};

struct CoordinateProjection {
  int index = 0;
  double operator()(std::span<const double> x, double) const { return x[index]; }
  double operator()(const std::vector<double>& x, double) const { return x[index]; }
};

template <class State>
struct CustomCoordinate {
  std::function<double(const State&, double)> fn;
  double operator()(const State& x, double log_pi) const { return fn(x, log_pi); }
};

struct BoundaryEvent {
  enum class Kind { split, extend, freeze };
  std::int64_t iteration = 0;
  Kind kind = Kind::split;
  int bin = -1;      // split: index of the bin that was split
  double value = 0;  // split: new boundary; extend: new e_min
};

inline const char* to_string(BoundaryEvent::Kind k) {
  switch (k) {
    case BoundaryEvent::Kind::split: return "split";
    case BoundaryEvent::Kind::extend: return "extend";
    default: return "freeze";
  }
}

// Ordered partition of the reaction-coordinate axis:
//   [e_min, e_1), [e_1, e_2), ..., [e_{d-1}, +inf)
// Bin 0 absorbs values below e_min (the range is extended instead of adding
// bins), the last bin is right-unbounded. Ties at a boundary go right.
class BinPartition {
 public:
  BinPartition() = default;

  BinPartition(std::vector<double> inner_boundaries, double e_min)
      : inner_(std::move(inner_boundaries)), e_min_(e_min) {
    for (std::size_t i = 1; i < inner_.size(); ++i)
      if (!(inner_[i - 1] < inner_[i]))
        throw std::invalid_argument("BinPartition: boundaries must be strictly increasing");
    if (!inner_.empty() && e_min_ > inner_.front())
      e_min_ = inner_.front();
    reset_histograms();
  }

  static BinPartition equal_width(double lo, double hi, int n_bins) {
    if (n_bins < 1) throw std::invalid_argument("BinPartition: n_bins must be >= 1");
    if (!(lo < hi) && n_bins > 1)
      throw std::invalid_argument("BinPartition: need lo < hi for multiple bins");
    std::vector<double> inner;
    inner.reserve(n_bins - 1);
    const double w = (hi - lo) / n_bins;
    for (int i = 1; i < n_bins; ++i) inner.push_back(lo + w * i);
    return BinPartition(std::move(inner), lo);
  }

  int bin_count() const { return static_cast<int>(inner_.size()) + 1; }
  const std::vector<double>& inner_boundaries() const { return inner_; }
  double e_min() const { return e_min_; }
  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  int locate(double xi) const {
    return static_cast<int>(std::upper_bound(inner_.begin(), inner_.end(), xi) - inner_.begin());
  }

  double lower_edge(int i) const {
    return i == 0 ? e_min_ : inner_[i - 1];
  }
  double upper_edge(int i) const {
    return i == bin_count() - 1 ? std::numeric_limits<double>::infinity() : inner_[i];
  }
  bool bounded(int i) const { return i < bin_count() - 1; }
  double midpoint(int i) const { return 0.5 * (lower_edge(i) + upper_edge(i)); }

  // Track the lowest observed coordinate; widening bin 0 is allowed even
  // when the partition is frozen. Returns true if the range grew.
  bool extend_range(double xi) {
    if (xi >= e_min_) return false;
    e_min_ = xi;
    left_[0] = 0;
    total_[0] = 0;
    return true;
  }

  // Feed one observed coordinate into the within-bin left/right histogram.
  void observe(double xi) {
    const int i = locate(xi);
    if (!bounded(i)) return;
    ++total_[i];
    if (xi < midpoint(i)) ++left_[i];
  }

  std::int64_t histogram_total(int i) const { return total_[i]; }
  std::int64_t histogram_left(int i) const { return left_[i]; }

  // Skew test of the within-bin histogram: true if the occupied fraction of
  // the left half falls strictly below the threshold (or, symmetrically, of
  // either half when `symmetric` is set).
  bool should_split(int i, double threshold, std::int64_t min_count, bool symmetric) const {
    if (!bounded(i)) return false;
    const std::int64_t m = total_[i];
    if (m < min_count) return false;
    const double ratio = static_cast<double>(left_[i]) / static_cast<double>(m);
    if (symmetric) return std::min(ratio, 1.0 - ratio) < threshold;
    return ratio < threshold;
  }

  // Geometric split point; bin 0 splits at the midpoint of [e_min, e_1].
  double geometric_split_point(int i) const {
    if (!bounded(i)) throw std::invalid_argument("cannot split the unbounded last bin");
    return midpoint(i);
  }

  // Insert a boundary inside bin i. The caller keeps BiasState in sync via
  // BiasState::split_bin. Children start with fresh histograms.
  void apply_split(int i, double point) {
    if (frozen_) throw std::logic_error("BinPartition: split after freeze");
    if (!bounded(i)) throw std::invalid_argument("cannot split the unbounded last bin");
    if (!(point > lower_edge(i) && point < upper_edge(i)))
      throw std::invalid_argument("split point outside bin");
    inner_.insert(inner_.begin() + i, point);
    left_.insert(left_.begin() + i, 0);
    left_[i + 1] = 0;
    total_.insert(total_.begin() + i, 0);
    total_[i + 1] = 0;
  }

  void reset_histograms() {
    left_.assign(bin_count(), 0);
    total_.assign(bin_count(), 0);
  }

 private:
  std::vector<double> inner_;
  double e_min_ = 0.0;
  bool frozen_ = false;
  std::vector<std::int64_t> left_;
  std::vector<std::int64_t> total_;
};

// For discrete targets: move the candidate split point to the midpoint of
// the two nearest observed coordinate values straddling `mid`, so both
// children contain reachable states. Returns nothing when all observed
// values in the bin sit on one side (a bin with <= 1 distinct value is
// never split).
inline std::optional<double> snap_split_point(double lo, double hi, double mid,
                                              const std::set<double>& observed) {
  auto right = observed.lower_bound(mid);  // first value >= mid
  if (right == observed.end() || *right >= hi) return std::nullopt;
  if (right == observed.begin()) return std::nullopt;
  auto left = std::prev(right);
  if (*left < lo) return std::nullopt;
  if (*left == *right) return std::nullopt;
  return 0.5 * (*left + *right);
}

struct SplitOptions {
  double threshold = 0.25;                // left-fraction below this splits
  double min_occupancy_factor = 20.0;     // need >= factor/threshold points
  bool symmetric = false;                 // also test the right half
  std::int64_t period = 100;              // check every period-th iteration
};

inline std::int64_t split_min_count(const SplitOptions& o) {
  return static_cast<std::int64_t>(std::ceil(o.min_occupancy_factor / o.threshold));
}

// Periodic structural maintenance: on every period-th iteration before the
// partition is frozen, split every finite bin whose within-bin histogram is
// skewed. `observed` enables discrete snapping when non-null.
inline std::vector<BoundaryEvent> maintenance_tick(BinPartition& partition, BiasState& bias,
                                                   std::int64_t iteration, const SplitOptions& opts,
                                                   const std::set<double>* observed = nullptr) {
  std::vector<BoundaryEvent> events;
  if (partition.frozen() || opts.period <= 0 || iteration % opts.period != 0) return events;
  const std::int64_t min_count = split_min_count(opts);
  int i = 0;
  while (i < partition.bin_count()) {
    if (!partition.should_split(i, opts.threshold, min_count, opts.symmetric)) {
      ++i;
      continue;
    }
    double point = partition.geometric_split_point(i);
    if (observed) {
      auto snapped =
          snap_split_point(partition.lower_edge(i), partition.upper_edge(i), point, *observed);
      if (!snapped) {
        ++i;
        continue;
      }
      point = *snapped;
    }
    partition.apply_split(i, point);
    bias.split_bin(i);
    events.push_back({iteration, BoundaryEvent::Kind::split, i, point});
    i += 2;  // children start with empty histograms; move past both
  }
  return events;
}

struct PartitionInit {
  BinPartition partition;
  bool degenerate = false;  // all preliminary samples identical
};

// Build the initial partition from preliminary-run coordinate values:
// n_bins equal-width bins over [q10, q10 + expansion*(q90 - q10)], with the
// range anchored at the observed minimum.
inline PartitionInit init_partition(std::vector<double> xi_samples, int n_bins,
                                    double expansion = 2.0) {
  if (xi_samples.size() < 2)
    throw std::invalid_argument("init_partition: need at least two samples");
  if (n_bins < 1) throw std::invalid_argument("init_partition: n_bins must be >= 1");
  std::sort(xi_samples.begin(), xi_samples.end());
  const double mn = xi_samples.front();
  if (xi_samples.back() == mn) {
    BinPartition p({}, mn);
    return {std::move(p), true};
  }
  const double q10 = quantile_sorted(xi_samples, 0.10);
  const double q90 = quantile_sorted(xi_samples, 0.90);
  double lo = q10;
  double hi = q10 + expansion * (q90 - q10);
  if (!(lo < hi)) {  // q10 == q90: fall back to the full observed range
    lo = mn;
    hi = xi_samples.back();
  }
  BinPartition p = BinPartition::equal_width(lo, hi, n_bins);
  p.extend_range(mn);
  return {std::move(p), false};
}

}  // namespace pawl
