#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pawl/numeric.hpp"

namespace pawl {

// Per-bin bias weights log(theta), visit proportions since the last
// flat-histogram reset, desired frequencies phi and the stepsize stage k.
// theta is kept normalized (sum of exp(log_theta) == 1).
class BiasState {
 public:
  BiasState() = default;

  explicit BiasState(int n_bins, double flatness_c = 0.5) : c_(flatness_c) {
    if (n_bins < 1) throw std::invalid_argument("BiasState: need at least one bin");
    if (!(flatness_c > 0.0 && flatness_c <= 1.0))
      throw std::invalid_argument("BiasState: c must be in (0,1]");
    const double lt = -std::log(static_cast<double>(n_bins));
    log_theta_.assign(n_bins, lt);
    phi_.assign(n_bins, 1.0 / n_bins);
    counts_.assign(n_bins, 0);
  }

  int bin_count() const { return static_cast<int>(log_theta_.size()); }
  const std::vector<double>& log_theta() const { return log_theta_; }
  const std::vector<double>& phi() const { return phi_; }
  const std::vector<std::int64_t>& counts_since_reset() const { return counts_; }
  int stage() const { return k_; }
  double flatness_c() const { return c_; }

  double theta(int i) const { return std::exp(log_theta_[i]); }

  // gamma_k schedule: gamma_0 at stage 0, then 1/k
  double gamma() const { return k_ == 0 ? gamma0_ : 1.0 / static_cast<double>(k_); }
  void set_gamma0(double g0) { gamma0_ = g0; }

  void add_counts(std::span<const int> bin_counts) {
    if (static_cast<int>(bin_counts.size()) != bin_count())
      throw std::invalid_argument("BiasState::add_counts: size mismatch");
    for (int i = 0; i < bin_count(); ++i) counts_[i] += bin_counts[i];
    total_counts_ = 0;
    for (auto c : counts_) total_counts_ += c;
  }

  // Visit proportions since the last reset; all zero before any count.
  std::vector<double> nu() const {
    std::vector<double> out(log_theta_.size(), 0.0);
    if (total_counts_ == 0) return out;
    const double inv = 1.0 / static_cast<double>(total_counts_);
    for (std::size_t i = 0; i < counts_.size(); ++i)
      out[i] = static_cast<double>(counts_[i]) * inv;
    return out;
  }

  // max_i |nu(i) - phi(i)|
  double flatness_deviation() const {
    if (total_counts_ == 0) {
      double m = 0.0;
      for (double p : phi_) m = std::max(m, p);
      return m;
    }
    const double inv = 1.0 / static_cast<double>(total_counts_);
    double m = 0.0;
    for (std::size_t i = 0; i < counts_.size(); ++i)
      m = std::max(m, std::abs(static_cast<double>(counts_[i]) * inv - phi_[i]));
    return m;
  }

  bool flat_histogram() const {
    return flatness_deviation() < c_ / static_cast<double>(bin_count());
  }

  // On a flat histogram: bump the stage and reset the visit counts.
  void advance_stage() {
    ++k_;
    reset_counts();
  }

  void reset_counts() {
    std::fill(counts_.begin(), counts_.end(), 0);
    total_counts_ = 0;
  }

  // log theta(i) += step * (occupancy(i) - phi(i)), then renormalize.
  void update(std::span<const double> occupancy, double step) {
    if (static_cast<int>(occupancy.size()) != bin_count())
      throw std::invalid_argument("BiasState::update: size mismatch");
    for (int i = 0; i < bin_count(); ++i)
      log_theta_[i] += step * (occupancy[i] - phi_[i]);
    normalize();
  }

  // Deferred-communication variant: occupancy_sum accumulates `span_len`
  // single-iteration occupancies, so phi enters scaled by the same factor.
  void update_accumulated(std::span<const double> occupancy_sum, double span_len, double step) {
    if (static_cast<int>(occupancy_sum.size()) != bin_count())
      throw std::invalid_argument("BiasState::update_accumulated: size mismatch");
    for (int i = 0; i < bin_count(); ++i)
      log_theta_[i] += step * (occupancy_sum[i] - span_len * phi_[i]);
    normalize();
  }

  void normalize() {
    const double lse = log_sum_exp(log_theta_);
    for (double& lt : log_theta_) lt -= lse;
  }

  double normalization_error() const {
    double s = 0.0;
    for (double lt : log_theta_) s += std::exp(lt);
    return std::abs(s - 1.0);
  }

  // Replace bin i by two children, each with weight theta(i)/2, desired
  // frequency phi(i)/2 and half the accumulated counts (remainder left).
  void split_bin(int i) {
    if (i < 0 || i >= bin_count()) throw std::out_of_range("BiasState::split_bin");
    const double child_lt = log_theta_[i] - std::log(2.0);
    log_theta_.insert(log_theta_.begin() + i, child_lt);
    log_theta_[i + 1] = child_lt;
    const double child_phi = phi_[i] / 2.0;
    phi_.insert(phi_.begin() + i, child_phi);
    phi_[i + 1] = child_phi;
    const std::int64_t n = counts_[i];
    counts_.insert(counts_.begin() + i, n - n / 2);
    counts_[i + 1] = n / 2;
  }

  // direct access for tests and custom schedules
  std::vector<double>& mutable_log_theta() { return log_theta_; }
  void set_stage(int k) { k_ = k; }

 private:
  std::vector<double> log_theta_;
  std::vector<double> phi_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_counts_ = 0;
  int k_ = 0;
  double c_ = 0.5;
  double gamma0_ = 1.0;
};

}  // namespace pawl
