#pragma once

#include <cstdint>

#include "crbkit/matlin.hpp"
#include "crbkit/statmodel.hpp"

namespace crbkit {

enum class FimMethod { Analytic, MonteCarlo };

struct FimEstimate {
  SymMatrix matrix;
  FimMethod method = FimMethod::Analytic;
  std::size_t n_samples = 0;
  /// Frobenius norm of the entrywise standard errors; 0 for analytic.
  double std_err_bound = 0.0;
  /// Entrywise standard errors of the sample mean; zero for analytic.
  Matrix std_err;
  /// Magnitude of the most negative eigenvalue clipped to zero after
  /// symmetrization (rounding only; outer-product means are PSD).
  double clipped = 0.0;
};

/// J = G^T noise_cov^{-1} G with G the mean Jacobian at theta.
FimEstimate fim_gaussian_mean(const GaussianMeanModel& model, const Vector& theta);

struct MonteCarloOptions {
  std::size_t n_samples = 100000;
  std::uint64_t rng_seed = 0;
  /// Threads used; the result does not depend on this.
  unsigned workers = 1;
  /// Fixed work split; each partition owns its own derived stream.
  unsigned partitions = 16;
};

/// Empirical mean of score outer products at theta.
FimEstimate fim_monte_carlo(const Model& model, const Vector& theta,
                            const MonteCarloOptions& options);

}  // namespace crbkit
