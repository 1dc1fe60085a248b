#include "crbkit/random.hpp"

#include <cmath>

namespace crbkit {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed ^ h) + index);
}

Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  const std::uint64_t s = derive_seed(seed, label, index);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

Matrix random_orthonormal(Eigen::Index n, Eigen::Index k, Rng& rng) {
  if (k > n) throw Error(ErrorCode::InvalidInput, "orthonormal frame wider than ambient space");
  if (k == 0) return Matrix(n, 0);
  const Matrix g = gaussian_matrix(n, k, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Matrix random_orthogonal(Eigen::Index n, Rng& rng) { return random_orthonormal(n, n, rng); }

SymMatrix random_psd(Eigen::Index n, Eigen::Index rank, Rng& rng) {
  if (rank < 0 || rank > n) throw Error(ErrorCode::InvalidInput, "rank out of range");
  std::uniform_real_distribution<double> log_u(std::log(0.1), std::log(10.0));
  Vector d = Vector::Zero(n);
  for (Eigen::Index i = 0; i < rank; ++i) d(i) = std::exp(log_u(rng));
  const Matrix q = random_orthogonal(n, rng);
  return SymMatrix(q * d.asDiagonal() * q.transpose());
}

}  // namespace crbkit
