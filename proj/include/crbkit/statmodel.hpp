#pragma once

#include <functional>
#include <optional>

#include "crbkit/matlin.hpp"
#include "crbkit/random.hpp"

namespace crbkit {

/// A parametric density p(y; theta). Implementations are immutable; sampling
/// draws from a caller-owned stream.
class Model {
 public:
  virtual ~Model() = default;

  virtual Eigen::Index param_dim() const = 0;
  virtual Eigen::Index obs_dim() const = 0;
  virtual double log_density(const Vector& y, const Vector& theta) const = 0;
  virtual Vector sample(const Vector& theta, Rng& rng) const = 0;

  virtual bool has_analytic_score() const { return false; }

  /// d ln p / d theta. Defaults to central differences of log_density with
  /// step 1e-5 * (1 + |theta_i|).
  virtual Vector score(const Vector& y, const Vector& theta) const;

  Vector finite_difference_score(const Vector& y, const Vector& theta) const;
};

/// y ~ N(mean(theta), noise_cov).
class GaussianMeanModel : public Model {
 public:
  using MeanFn = std::function<Vector(const Vector&)>;
  using JacFn = std::function<Matrix(const Vector&)>;

  GaussianMeanModel(Eigen::Index param_dim, MeanFn mean, JacFn jac, const Matrix& noise_cov);
  /// Isotropic noise noise_var * I.
  GaussianMeanModel(Eigen::Index param_dim, Eigen::Index obs_dim, MeanFn mean, JacFn jac,
                    double noise_var);

  Eigen::Index param_dim() const override { return param_dim_; }
  Eigen::Index obs_dim() const override { return noise_cov_.rows(); }
  double log_density(const Vector& y, const Vector& theta) const override;
  Vector sample(const Vector& theta, Rng& rng) const override;
  bool has_analytic_score() const override { return true; }
  Vector score(const Vector& y, const Vector& theta) const override;

  Vector mean(const Vector& theta) const;
  Matrix mean_jac(const Vector& theta) const;
  const Matrix& noise_cov() const noexcept { return noise_cov_; }
  /// Set when the noise covariance is noise_var * I.
  std::optional<double> isotropic_variance() const noexcept { return isotropic_var_; }
  /// Solves noise_cov * x = b.
  Matrix solve_noise(const Matrix& b) const;
  /// L^{-1} b where noise_cov = L L^T.
  Matrix whiten(const Matrix& b) const;

 private:
  void check_theta(const Vector& theta) const;

  Eigen::Index param_dim_;
  MeanFn mean_;
  JacFn jac_;
  Matrix noise_cov_;
  Eigen::LLT<Matrix> chol_;
  double log_det_ = 0.0;
  std::optional<double> isotropic_var_;
};

struct ChannelDims {
  Eigen::Index s_len = 0;
  Eigen::Index h_len = 0;

  Eigen::Index param_dim() const noexcept { return s_len + h_len; }
  Eigen::Index obs_dim() const noexcept { return s_len + h_len - 1; }
};

/// Full linear convolution, length |s| + |h| - 1.
Vector convolve(const Vector& s, const Vector& h);

/// Jacobian of convolve(s, h) with respect to theta = (s, h).
Matrix blind_channel_mean_jac(const Vector& theta, ChannelDims dims);

/// Unit tangent (s, -h) / ||(s, -h)|| of the curve (alpha s, h / alpha) at alpha = 1.
Vector scalar_ambiguity_direction(const Vector& theta, ChannelDims dims);

/// y = s * h + w with w ~ N(0, noise_var I) and theta = (s, h).
class BlindChannelModel : public GaussianMeanModel {
 public:
  BlindChannelModel(ChannelDims dims, double noise_var);

  ChannelDims dims() const noexcept { return dims_; }
  double noise_var() const noexcept { return *isotropic_variance(); }

 private:
  ChannelDims dims_;
};

/// y = A theta + w with w ~ N(0, noise_var I); singular FIM when A is rank deficient.
class LinearGaussianModel : public GaussianMeanModel {
 public:
  LinearGaussianModel(const Matrix& design, double noise_var);

  const Matrix& design() const noexcept { return design_; }

 private:
  Matrix design_;
};

/// Draws theta with every entry uniform in [0.5, 1.5].
Vector generic_theta(Eigen::Index n, Rng& rng);

}  // namespace crbkit
