#include "crbkit/statmodel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace crbkit {

Vector Model::score(const Vector& y, const Vector& theta) const {
  return finite_difference_score(y, theta);
}

Vector Model::finite_difference_score(const Vector& y, const Vector& theta) const {
  Vector g(theta.size());
  Vector probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double step = 1e-5 * (1.0 + std::abs(theta(i)));
    probe(i) = theta(i) + step;
    const double up = log_density(y, probe);
    probe(i) = theta(i) - step;
    const double down = log_density(y, probe);
    probe(i) = theta(i);
    g(i) = (up - down) / (2.0 * step);
  }
  return g;
}

GaussianMeanModel::GaussianMeanModel(Eigen::Index param_dim, MeanFn mean, JacFn jac,
                                     const Matrix& noise_cov)
    : param_dim_(param_dim), mean_(std::move(mean)), jac_(std::move(jac)), noise_cov_(noise_cov) {
  if (param_dim <= 0) throw Error(ErrorCode::InvalidModel, "parameter dimension must be positive");
  if (noise_cov.rows() == 0 || noise_cov.rows() != noise_cov.cols()) {
    throw Error(ErrorCode::InvalidModel, "noise covariance must be square and nonempty");
  }
  if (!noise_cov.allFinite()) throw Error(ErrorCode::InvalidModel, "noise covariance not finite");
  if ((noise_cov - noise_cov.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * noise_cov.cwiseAbs().maxCoeff()) {
    throw Error(ErrorCode::InvalidModel, "noise covariance not symmetric");
  }
  chol_.compute(noise_cov_);
  if (chol_.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidModel, "noise covariance not positive definite");
  }
  const Vector diag = Matrix(chol_.matrixL()).diagonal();
  // LLT succeeds on some numerically singular inputs; reject those too.
  if (diag.minCoeff() <= 1e-12 * diag.maxCoeff()) {
    throw Error(ErrorCode::InvalidModel, "noise covariance numerically singular");
  }
  log_det_ = 2.0 * diag.array().log().sum();
}

GaussianMeanModel::GaussianMeanModel(Eigen::Index param_dim, Eigen::Index obs_dim, MeanFn mean,
                                     JacFn jac, double noise_var)
    : GaussianMeanModel(param_dim, std::move(mean), std::move(jac),
                        (std::isfinite(noise_var) && noise_var > 0.0 && obs_dim > 0)
                            ? Matrix(noise_var * Matrix::Identity(obs_dim, obs_dim))
                            : throw Error(ErrorCode::InvalidModel,
                                          "noise variance must be positive and finite")) {
  isotropic_var_ = noise_var;
}

void GaussianMeanModel::check_theta(const Vector& theta) const {
  if (theta.size() != param_dim_) {
    throw Error(ErrorCode::InvalidInput, "theta has dimension " + std::to_string(theta.size()) +
                                             ", model expects " + std::to_string(param_dim_));
  }
}

Vector GaussianMeanModel::mean(const Vector& theta) const {
  check_theta(theta);
  Vector mu = mean_(theta);
  if (mu.size() != obs_dim()) throw Error(ErrorCode::InvalidModel, "mean has wrong dimension");
  return mu;
}

Matrix GaussianMeanModel::mean_jac(const Vector& theta) const {
  check_theta(theta);
  Matrix g = jac_(theta);
  if (g.rows() != obs_dim() || g.cols() != param_dim_) {
    throw Error(ErrorCode::InvalidModel, "mean Jacobian has wrong shape");
  }
  return g;
}

Matrix GaussianMeanModel::solve_noise(const Matrix& b) const {
  if (isotropic_var_) return b / *isotropic_var_;
  return chol_.solve(b);
}

Matrix GaussianMeanModel::whiten(const Matrix& b) const {
  return chol_.matrixL().solve(b);
}

double GaussianMeanModel::log_density(const Vector& y, const Vector& theta) const {
  const Vector r = y - mean(theta);
  const Vector w = whiten(r);
  const double k = static_cast<double>(obs_dim());
  return -0.5 * (k * std::log(2.0 * std::numbers::pi) + log_det_ + w.squaredNorm());
}

Vector GaussianMeanModel::sample(const Vector& theta, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(obs_dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return mean(theta) + chol_.matrixL() * z;
}

Vector GaussianMeanModel::score(const Vector& y, const Vector& theta) const {
  return mean_jac(theta).transpose() * solve_noise(y - mean(theta));
}

Vector convolve(const Vector& s, const Vector& h) {
  if (s.size() == 0 || h.size() == 0) {
    throw Error(ErrorCode::InvalidInput, "convolution operands must be nonempty");
  }
  Vector y = Vector::Zero(s.size() + h.size() - 1);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index j = 0; j < h.size(); ++j) y(i + j) += s(i) * h(j);
  return y;
}

namespace {

void check_dims(const Vector& theta, ChannelDims dims) {
  if (dims.s_len <= 0 || dims.h_len <= 0) {
    throw Error(ErrorCode::InvalidInput, "channel dimensions must be positive");
  }
  if (theta.size() != dims.param_dim()) {
    throw Error(ErrorCode::InvalidInput,
                "theta has dimension " + std::to_string(theta.size()) + ", expected s_len + h_len = " +
                    std::to_string(dims.param_dim()));
  }
}

}  // namespace

Matrix blind_channel_mean_jac(const Vector& theta, ChannelDims dims) {
  check_dims(theta, dims);
  const auto s = theta.head(dims.s_len);
  const auto h = theta.tail(dims.h_len);
  Matrix g = Matrix::Zero(dims.obs_dim(), dims.param_dim());
  // y_k = sum_i s_i h_{k-i}: column i of the s-block is h shifted down by i,
  // column j of the h-block is s shifted down by j.
  for (Eigen::Index i = 0; i < dims.s_len; ++i) g.col(i).segment(i, dims.h_len) = h;
  for (Eigen::Index j = 0; j < dims.h_len; ++j) g.col(dims.s_len + j).segment(j, dims.s_len) = s;
  return g;
}

Vector scalar_ambiguity_direction(const Vector& theta, ChannelDims dims) {
  check_dims(theta, dims);
  Vector d(theta.size());
  d.head(dims.s_len) = theta.head(dims.s_len);
  d.tail(dims.h_len) = -theta.tail(dims.h_len);
  const double norm = d.norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::DegenerateParameter, "ambiguity direction undefined at theta = 0");
  }
  return d / norm;
}

BlindChannelModel::BlindChannelModel(ChannelDims dims, double noise_var)
    : GaussianMeanModel(
          dims.param_dim(), dims.obs_dim(),
          [dims](const Vector& t) { return convolve(t.head(dims.s_len), t.tail(dims.h_len)); },
          [dims](const Vector& t) { return blind_channel_mean_jac(t, dims); }, noise_var),
      dims_(dims) {
  if (dims.s_len <= 0 || dims.h_len <= 0) {
    throw Error(ErrorCode::InvalidModel, "channel dimensions must be positive");
  }
}

namespace {

Matrix checked_design(const Matrix& a) {
  if (a.size() == 0) throw Error(ErrorCode::InvalidModel, "design matrix is empty");
  if (!a.allFinite()) throw Error(ErrorCode::InvalidModel, "design matrix not finite");
  return a;
}

}  // namespace

LinearGaussianModel::LinearGaussianModel(const Matrix& design, double noise_var)
    : GaussianMeanModel(
          checked_design(design).cols(), design.rows(),
          [a = design](const Vector& t) -> Vector { return a * t; },
          [a = design](const Vector&) -> Matrix { return a; }, noise_var),
      design_(design) {}

Vector generic_theta(Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Vector t(n);
  for (Eigen::Index i = 0; i < n; ++i) t(i) = u(rng);
  return t;
}

}  // namespace crbkit
