#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "crbkit/matlin.hpp"

namespace crbkit {

using Rng = std::mt19937_64;

// Every random stream in the library is derived from one top-level seed plus
// a component label and an index, so results do not depend on which worker
// or in which order a stream is consumed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthogonal(Eigen::Index n, Rng& rng);

/// Orthonormal n x k matrix with Haar-distributed column space.
Matrix random_orthonormal(Eigen::Index n, Eigen::Index k, Rng& rng);

/// Q diag(d) Q^T with Q Haar orthogonal and d holding `rank` values drawn
/// log-uniformly from [0.1, 10] followed by n - rank exact zeros.
SymMatrix random_psd(Eigen::Index n, Eigen::Index rank, Rng& rng);

}  // namespace crbkit
