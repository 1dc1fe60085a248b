#include "crbkit/fim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace crbkit {

FimEstimate fim_gaussian_mean(const GaussianMeanModel& model, const Vector& theta) {
  const Matrix g = model.mean_jac(theta);
  require_finite(g, "mean Jacobian");
  FimEstimate out;
  if (auto var = model.isotropic_variance()) {
    out.matrix = SymMatrix((g.transpose() * g) / *var);
  } else {
    const Matrix w = model.whiten(g);
    out.matrix = SymMatrix(w.transpose() * w);
  }
  out.method = FimMethod::Analytic;
  out.std_err = Matrix::Zero(g.cols(), g.cols());
  return out;
}

namespace {

struct PartialSums {
  Matrix sum;
  Matrix sum_sq;
  std::size_t count = 0;
  std::exception_ptr error;
};

void accumulate_partition(const Model& model, const Vector& theta, std::uint64_t seed,
                          unsigned partition, std::size_t first, std::size_t last,
                          PartialSums& out) {
  const Eigen::Index n = model.param_dim();
  out.sum = Matrix::Zero(n, n);
  out.sum_sq = Matrix::Zero(n, n);
  try {
    Rng rng = make_rng(seed, "fim_monte_carlo", partition);
    for (std::size_t k = first; k < last; ++k) {
      const Vector y = model.sample(theta, rng);
      const Vector g = model.score(y, theta);
      if (!g.allFinite()) {
        throw Error(ErrorCode::NumericalFailure,
                    "non-finite score at sample index " + std::to_string(k));
      }
      const Matrix outer = g * g.transpose();
      out.sum += outer;
      out.sum_sq += outer.cwiseProduct(outer);
      ++out.count;
    }
  } catch (...) {
    out.error = std::current_exception();
  }
}

}  // namespace

FimEstimate fim_monte_carlo(const Model& model, const Vector& theta,
                            const MonteCarloOptions& options) {
  if (options.n_samples < 100) {
    throw Error(ErrorCode::InvalidInput, "Monte-Carlo FIM needs at least 100 samples");
  }
  if (theta.size() != model.param_dim()) {
    throw Error(ErrorCode::InvalidInput, "theta dimension does not match the model");
  }
  const unsigned partitions = std::max(1u, options.partitions);
  const unsigned workers = std::clamp(options.workers, 1u, partitions);
  const std::size_t total = options.n_samples;

  std::vector<PartialSums> parts(partitions);
  auto bounds = [&](unsigned p) {
    return std::pair{total * p / partitions, total * (p + 1) / partitions};
  };
  auto run_stride = [&](unsigned w) {
    for (unsigned p = w; p < partitions; p += workers) {
      auto [first, last] = bounds(p);
      accumulate_partition(model, theta, options.rng_seed, p, first, last, parts[p]);
    }
  };
  if (workers == 1) {
    run_stride(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_stride, w);
    for (auto& t : pool) t.join();
  }

  // Fixed reduction order keeps the floating-point sum independent of workers.
  const Eigen::Index n = model.param_dim();
  Matrix sum = Matrix::Zero(n, n);
  Matrix sum_sq = Matrix::Zero(n, n);
  for (const auto& part : parts) {
    if (part.error) std::rethrow_exception(part.error);
    sum += part.sum;
    sum_sq += part.sum_sq;
  }
  const double count = static_cast<double>(total);
  const Matrix mean = sum / count;
  const Matrix var = (sum_sq / count - mean.cwiseProduct(mean)).cwiseMax(0.0) *
                     (count / (count - 1.0));

  FimEstimate out;
  out.method = FimMethod::MonteCarlo;
  out.n_samples = total;
  out.std_err = (var / count).cwiseSqrt();
  out.std_err_bound = out.std_err.norm();

  SymMatrix sym(mean);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym.matrix());
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalFailure, "eigensolver failed on Monte-Carlo FIM");
  }
  const double lambda_min = eig.eigenvalues()(0);
  if (lambda_min < 0.0) {
    const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
    sym = SymMatrix(eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose());
    out.clipped = -lambda_min;
  }
  out.matrix = sym;
  return out;
}

}  // namespace crbkit
