#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pawl/rng.hpp"

namespace pawl {

// Robbins-Monro tuning of a random-walk standard deviation toward a target
// acceptance rate: sigma += rho_t * (2*I(A > target) - 1), clamped below.
class ScaleAdapter {
 public:
  ScaleAdapter() = default;
  explicit ScaleAdapter(double sigma0, double target_rate = 0.234, double rho0 = 1.0,
                        double sigma_floor = 1e-9)
      : sigma_(sigma0), target_rate_(target_rate), rho0_(rho0), floor_(sigma_floor) {
    if (!(sigma0 > 0.0)) throw std::invalid_argument("ScaleAdapter: sigma0 must be positive");
  }

  double sigma() const { return sigma_; }
  double target_rate() const { return target_rate_; }
  double rho(std::int64_t t) const { return rho0_ / static_cast<double>(t); }

  void update(double acceptance_fraction, std::int64_t t) {
    const double dir = acceptance_fraction > target_rate_ ? 1.0 : -1.0;
    sigma_ = std::max(floor_, sigma_ + rho(t) * dir);
  }

 private:
  double sigma_ = 1.0;
  double target_rate_ = 0.234;
  double rho0_ = 1.0;
  double floor_ = 1e-9;
};

// Streaming mean/covariance of everything fed in (Welford recurrences, one
// pass, constant memory), backing the two-component random-walk proposal:
// with weight w1 a Gaussian step with covariance (2.38^2/p)*Sigma_t, with
// weight w2 an isotropic safety net with variance sigma_I^2/p per axis.
class CovarianceAdapter {
 public:
  CovarianceAdapter() = default;
  CovarianceAdapter(int dimension, double sigma_i, double w2 = 0.05)
      : p_(dimension), sigma_i_(sigma_i), w2_(w2) {
    if (dimension < 1) throw std::invalid_argument("CovarianceAdapter: dimension must be >= 1");
    if (!(w2 >= 0.0 && w2 <= 1.0)) throw std::invalid_argument("CovarianceAdapter: w2 in [0,1]");
    mean_ = Eigen::VectorXd::Zero(p_);
    m2_ = Eigen::MatrixXd::Zero(p_, p_);
  }

  int dimension() const { return p_; }
  std::int64_t count() const { return n_; }
  double w1() const { return 1.0 - w2_; }
  double w2() const { return w2_; }
  double sigma_i() const { return sigma_i_; }

  void feed(std::span<const double> x) {
    if (static_cast<int>(x.size()) != p_)
      throw std::invalid_argument("CovarianceAdapter::feed: dimension mismatch");
    ++n_;
    Eigen::Map<const Eigen::VectorXd> v(x.data(), p_);
    delta_ = v - mean_;
    mean_ += delta_ / static_cast<double>(n_);
    m2_.noalias() += delta_ * (v - mean_).transpose();
    factor_fresh_ = false;
  }

  Eigen::VectorXd mean() const { return mean_; }

  // sample covariance (n-1 denominator); zero until two points are seen
  Eigen::MatrixXd covariance() const {
    if (n_ < 2) return Eigen::MatrixXd::Zero(p_, p_);
    return m2_ / static_cast<double>(n_ - 1);
  }

  // Rebuild the Cholesky factor of (2.38^2/p) * (Sigma + reg*I). Called at
  // the synchronization barrier; proposal draws only read. The adaptive
  // component stays disabled until p+1 points have been fed or when the
  // factorization fails.
  void refresh_factor() {
    adaptive_ready_ = false;
    if (n_ < static_cast<std::int64_t>(p_) + 1) {
      factor_fresh_ = true;
      return;
    }
    Eigen::MatrixXd cov = covariance();
    const double reg = 1e-10 * cov.trace() / static_cast<double>(p_);
    cov.diagonal().array() += reg;
    cov *= 2.38 * 2.38 / static_cast<double>(p_);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      adaptive_ready_ = true;
    }
    factor_fresh_ = true;
  }

  bool adaptive_ready() const { return adaptive_ready_; }

  // Draw a proposal centered at `current`. Symmetric (mixture of symmetric
  // kernels), so the MH correction is zero.
  void propose(Rng& rng, std::span<const double> current, std::vector<double>& out) const {
    if (!factor_fresh_) throw std::logic_error("CovarianceAdapter: refresh_factor before proposing");
    out.resize(p_);
    const bool use_adaptive = adaptive_ready_ && rng.uniform() < w1();
    if (use_adaptive) {
      Eigen::VectorXd z(p_);
      for (int i = 0; i < p_; ++i) z[i] = rng.normal();
      Eigen::VectorXd step = chol_ * z;
      for (int i = 0; i < p_; ++i) out[i] = current[i] + step[i];
    } else {
      const double s = sigma_i_ / std::sqrt(static_cast<double>(p_));
      for (int i = 0; i < p_; ++i) out[i] = current[i] + s * rng.normal();
    }
  }

 private:
  int p_ = 0;
  double sigma_i_ = 1.0;
  double w2_ = 0.05;
  std::int64_t n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
  Eigen::VectorXd delta_;
  Eigen::MatrixXd chol_;
  bool adaptive_ready_ = false;
  bool factor_fresh_ = true;
};

// Uniformly flip `flip_count` distinct sites of a binary state. Symmetric.
struct DiscreteFlipProposal {
  int flip_count = 1;
};

// Single flip: returns the chosen site and negates it in place.
template <class BitContainer>
int propose_flip(BitContainer& state, std::size_t size, Rng& rng) {
  if (size == 0) throw std::invalid_argument("propose_flip: empty state");
  const auto idx = static_cast<int>(rng.integer(size));
  state[idx] = !state[idx];
  return idx;
}

}  // namespace pawl
