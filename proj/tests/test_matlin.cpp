#include <doctest.h>

#include <cmath>

#include "crbkit/matlin.hpp"
#include "crbkit/random.hpp"
#include "oracles.hpp"

using namespace crbkit;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (auto r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

SymMatrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return SymMatrix::diagonal(v);
}

}  // namespace

TEST_CASE("SymMatrix symmetrizes exactly and rejects bad input") {
  const SymMatrix s(mat({{1.0, 0.3}, {0.1, 2.0}}));
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == doctest::Approx(0.2));
  CHECK_THROWS_AS(SymMatrix(Matrix(2, 3)), Error);
  CHECK_THROWS_AS(SymMatrix(mat({{1.0, NAN}, {0.0, 1.0}})), Error);
  try {
    SymMatrix(mat({{INFINITY}}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidMatrix);
  }
}

TEST_CASE("ranked_svd examples") {
  SUBCASE("diag(2, 0)") {
    const RankedSvd r = ranked_svd(diag({2.0, 0.0}));
    CHECK(r.rank == 1);
    CHECK(r.sigma(0) == doctest::Approx(2.0));
    CHECK(std::abs(r.u_r(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(r.u_bar(1, 0)) == doctest::Approx(1.0));
  }
  SUBCASE("all-ones 2x2") {
    const RankedSvd r = ranked_svd(SymMatrix(mat({{1, 1}, {1, 1}})));
    CHECK(r.rank == 1);
    CHECK(r.sigma(0) == doctest::Approx(2.0));
    // Compare projectors, never raw bases.
    const Matrix p = r.u_r * r.u_r.transpose();
    CHECK((p - 0.5 * mat({{1, 1}, {1, 1}})).norm() < 1e-12);
  }
  SUBCASE("identity") {
    const RankedSvd r = ranked_svd(SymMatrix::identity(3));
    CHECK(r.rank == 3);
    CHECK(r.u_bar.rows() == 3);
    CHECK(r.u_bar.cols() == 0);
  }
  SUBCASE("zero matrix") {
    const RankedSvd r = ranked_svd(SymMatrix::zero(3));
    CHECK(r.rank == 0);
    CHECK((r.u_bar.transpose() * r.u_bar - Matrix::Identity(3, 3)).norm() < 1e-12);
    CHECK(pinv_via_basis(SymMatrix::zero(3)).matrix().norm() == 0.0);
  }
  SUBCASE("rank tolerance is relative and overridable") {
    const SymMatrix m = diag({1.0, 1e-12});
    CHECK(ranked_svd(m).rank == 1);
    CHECK(ranked_svd(m, 1e-14).rank == 2);
    CHECK_THROWS_AS(ranked_svd(m, 0.0), Error);
  }
}

TEST_CASE("ranked_svd invariants on random PSD matrices") {
  Rng rng = make_rng(11, "test_ranked_svd");
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<Eigen::Index> pick_n(1, 8);
    const Eigen::Index n = pick_n(rng);
    std::uniform_int_distribution<Eigen::Index> pick_r(0, n);
    const Eigen::Index r = pick_r(rng);
    const SymMatrix m = random_psd(n, r, rng);
    const RankedSvd s = ranked_svd(m);
    REQUIRE(s.rank == r);
    if (r > 0) {
      CHECK((s.u_r.transpose() * s.u_r - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-10);
    }
    if (n - r > 0) {
      CHECK((s.u_bar.transpose() * s.u_bar - Matrix::Identity(n - r, n - r)).cwiseAbs().maxCoeff() <
            1e-10);
      if (r > 0) CHECK((s.u_bar.transpose() * s.u_r).cwiseAbs().maxCoeff() < 1e-10);
    }
    for (Eigen::Index i = 1; i < r; ++i) CHECK(s.sigma(i - 1) >= s.sigma(i));
    const Matrix recon = s.u_r * s.sigma.asDiagonal() * s.u_r.transpose();
    if (r > 0) CHECK(oracle::rel_frob(recon, m.matrix()) < 1e-8);
  }
}

TEST_CASE("pinv_via_basis examples") {
  CHECK((pinv_via_basis(diag({2.0, 0.0})).matrix() - diag({0.5, 0.0}).matrix()).norm() < 1e-15);
  CHECK((pinv_via_basis(SymMatrix(mat({{1, 1}, {1, 1}}))).matrix() - 0.25 * mat({{1, 1}, {1, 1}}))
            .norm() < 1e-14);
  const SymMatrix j = diag({1, 1, 0, 0});
  CHECK((pinv_via_basis(j).matrix() - j.matrix()).norm() < 1e-15);
}

TEST_CASE("pinv_via_basis matches the full-SVD oracle and Moore-Penrose conditions") {
  Rng rng = make_rng(12, "test_pinv");
  for (int t = 0; t < 150; ++t) {
    std::uniform_int_distribution<Eigen::Index> pick_n(1, 8);
    const Eigen::Index n = pick_n(rng);
    std::uniform_int_distribution<Eigen::Index> pick_r(0, n);
    const SymMatrix m = random_psd(n, pick_r(rng), rng);
    const Matrix p = pinv_via_basis(m).matrix();
    const Matrix ref = oracle::pinv_full_svd(m.matrix());
    if (ref.norm() > 0.0) {
      CHECK(oracle::rel_frob(p, ref) < 1e-8);
      CHECK(oracle::moore_penrose_residual(m.matrix(), p) < 1e-8);
      // pinv is an involution.
      CHECK(oracle::rel_frob(pinv_via_basis(SymMatrix(p)).matrix(), m.matrix()) < 1e-7);
    } else {
      CHECK(p.norm() == 0.0);
    }
  }
}

TEST_CASE("eigvals_desc examples") {
  const auto a = eigvals_desc(diag({0.5, 0.0}));
  CHECK(a[0] == doctest::Approx(0.5));
  CHECK(a[1] == doctest::Approx(0.0));
  const auto b = eigvals_desc(SymMatrix(0.5 * mat({{1, -1}, {-1, 1}})));
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(std::abs(b[1]) < 1e-15);
  const auto c = eigvals_desc(SymMatrix(mat({{0, 1}, {1, 1}})));
  CHECK(c[0] == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-14));
  CHECK(c[1] == doctest::Approx((1.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-14));
}

TEST_CASE("eigvals_desc agrees with the general eigensolver") {
  Rng rng = make_rng(13, "test_eig");
  for (int t = 0; t < 50; ++t) {
    const Matrix g = gaussian_matrix(6, 6, rng);
    const SymMatrix m(g + g.transpose());
    const Vector ref = oracle::eigvals_general(m.matrix());
    CHECK((eigvals_desc(m).values - ref).norm() < 1e-10 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("is_psd") {
  CHECK(is_psd(diag({1.0, 0.0})));
  CHECK_FALSE(is_psd(SymMatrix(mat({{0, 1}, {1, 1}}))));
  CHECK(is_psd(SymMatrix::zero(3)));
  CHECK(is_psd(diag({1.0, -1e-12})));  // within default 1e-9 * sigma_max
  CHECK_FALSE(is_psd(diag({1.0, -1e-12}), 1e-13));
  CHECK_THROWS_AS(is_psd(diag({1.0}), -1.0), Error);
}

TEST_CASE("null_complement examples") {
  SUBCASE("axis constraint") {
    const NullBasis u = null_complement(mat({{0, 1}}));
    REQUIRE(u.dim() == 1);
    CHECK((u.projector().matrix() - mat({{1, 0}, {0, 0}})).norm() < 1e-14);
  }
  SUBCASE("diagonal constraint") {
    const NullBasis u = null_complement(mat({{1, 1}}) / std::sqrt(2.0));
    CHECK((u.projector().matrix() - 0.5 * mat({{1, -1}, {-1, 1}})).norm() < 1e-14);
  }
  SUBCASE("fully constrained") {
    const NullBasis u = null_complement(Matrix::Identity(2, 2));
    CHECK(u.ambient_dim() == 2);
    CHECK(u.dim() == 0);
  }
  SUBCASE("no constraint") {
    const NullBasis u = null_complement(Matrix(0, 3));
    CHECK((u.matrix() - Matrix::Identity(3, 3)).norm() == 0.0);
  }
  SUBCASE("rank-deficient Jacobian") {
    try {
      null_complement(mat({{1, 1, 0}, {2, 2, 0}}));
      FAIL("expected RankDeficientConstraint");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RankDeficientConstraint);
    }
    CHECK_THROWS_AS(null_complement(Matrix::Zero(1, 2)), Error);
    CHECK_THROWS_AS(null_complement(Matrix::Identity(3, 2)), Error);
  }
}

TEST_CASE("null_complement spans exactly the kernel") {
  Rng rng = make_rng(14, "test_null");
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<Eigen::Index> pick_n(1, 8);
    const Eigen::Index n = pick_n(rng);
    std::uniform_int_distribution<Eigen::Index> pick_m(0, n);
    const Eigen::Index m = pick_m(rng);
    const Matrix f = gaussian_matrix(m, n, rng);
    const Matrix u = null_complement(f).matrix();
    REQUIRE(u.cols() == n - m);
    if (u.cols() > 0) {
      CHECK((u.transpose() * u - Matrix::Identity(n - m, n - m)).cwiseAbs().maxCoeff() < 1e-10);
      if (m > 0) CHECK((f * u).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, f.norm()));
    }
    Matrix stacked(n, m + u.cols());
    stacked << f.transpose(), u;
    CHECK(numerical_rank(stacked) == n);
  }
}
