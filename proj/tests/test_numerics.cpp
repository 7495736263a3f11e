#include "support.hpp"
#include "wte/error.hpp"
#include "wte/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace wte;
using doctest::Approx;

namespace {

SymMatrix sym(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  Eigen::Index i = 0;
  for (auto r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return SymMatrix(m);
}

SymMatrix random_sym(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  return SymMatrix(a + a.transpose());
}

SymMatrix random_psd(Rng& rng, Eigen::Index n, Eigen::Index rank) {
  Eigen::MatrixXd a(n, rank);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < rank; ++j) a(i, j) = rng.normal();
  return SymMatrix(a * a.transpose());
}

void check_decomposition(const SymMatrix& m, const EigenDecomposition& e) {
  const auto n = m.dim();
  for (Eigen::Index k = 1; k < n; ++k) CHECK(e.values(k - 1) >= e.values(k));
  const Eigen::MatrixXd rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  CHECK(relative_frobenius(rec, m.matrix()) < 1e-8);
  CHECK((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-8);
  CHECK(e.values.sum() == Approx(m.trace()).epsilon(1e-9).scale(m.matrix().norm()));
}

}  // namespace

TEST_CASE("SymMatrix symmetrizes and rejects bad input") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 4, 1;
  SymMatrix s(a);
  CHECK(s(0, 1) == 3.0);
  CHECK(s(1, 0) == 3.0);
  CHECK_THROWS_AS(SymMatrix(Eigen::MatrixXd(2, 3)), Error);
  a(0, 0) = std::nan("");
  CHECK_THROWS_AS(SymMatrix{a}, Error);
}

TEST_CASE("eig_sym small examples") {
  SUBCASE("identity") {
    const auto e = eig_sym(SymMatrix::identity(3));
    CHECK(e.values.isApprox(Eigen::Vector3d(1, 1, 1)));
    CHECK((e.vectors.transpose() * e.vectors - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  }
  SUBCASE("diagonal") {
    const auto e = eig_sym(sym({{3, 0, 0}, {0, 1, 0}, {0, 0, 2}}));
    CHECK(e.values(0) == 3.0);
    CHECK(e.values(1) == 2.0);
    CHECK(e.values(2) == 1.0);
    Eigen::Matrix3d p;
    p << 1, 0, 0, 0, 0, 1, 0, 1, 0;
    CHECK((e.vectors - p).norm() < 1e-12);
  }
  SUBCASE("2x2 coupled") {
    const auto e = eig_sym(sym({{2, 1}, {1, 2}}));
    CHECK(e.values(0) == Approx(3.0).epsilon(1e-14));
    CHECK(e.values(1) == Approx(1.0).epsilon(1e-14));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(e.vectors(0, 0) == Approx(r));
    CHECK(e.vectors(1, 0) == Approx(r));
    CHECK(e.vectors(0, 1) == Approx(r));
    CHECK(e.vectors(1, 1) == Approx(-r));
  }
  SUBCASE("empty and 1x1") {
    CHECK(eig_sym(SymMatrix::zero(0)).values.size() == 0);
    const auto e = eig_sym(sym({{-5}}));
    CHECK(e.values(0) == -5.0);
    CHECK(e.vectors(0, 0) == 1.0);
  }
}

TEST_CASE("eig_sym random matrices agree with Eigen") {
  Rng rng(11);
  for (Eigen::Index n : {2, 3, 5, 8, 17, 40}) {
    const SymMatrix m = random_sym(rng, n);
    const auto e = eig_sym_jacobi(m);
    check_decomposition(m, e);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m.matrix());
    const Eigen::VectorXd ref_desc = ref.eigenvalues().reverse();
    CHECK((e.values - ref_desc).norm() < 1e-9 * (1.0 + ref_desc.norm()));
    for (Eigen::Index k = 0; k < n; ++k) {
      // First sizeable component positive.
      Eigen::Index first = 0;
      while (std::abs(e.vectors(first, k)) <= 1e-12) ++first;
      CHECK(e.vectors(first, k) > 0.0);
    }
  }
}

TEST_CASE("eig_sym large matrices take the fallback path") {
  Rng rng(12);
  const SymMatrix m = random_sym(rng, kJacobiMaxDim + 10);
  const auto e = eig_sym(m);
  CHECK(e.sweeps == 0);
  check_decomposition(m, e);
  const auto j = eig_sym_jacobi(m);
  CHECK(j.sweeps > 0);
  CHECK((e.values - j.values).norm() < 1e-8 * e.values.norm());
}

TEST_CASE("eig_sym repeated eigenvalues") {
  Rng rng(13);
  const SymMatrix m = random_psd(rng, 9, 3);
  const auto e = eig_sym(m);
  check_decomposition(m, e);
  for (Eigen::Index k = 3; k < 9; ++k) CHECK(std::abs(e.values(k)) < 1e-9 * e.values(0));
}

TEST_CASE("psd_sqrt") {
  SUBCASE("identity") { CHECK((psd_sqrt(SymMatrix::identity(4)).matrix() - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-14); }
  SUBCASE("diagonal") {
    const auto r = psd_sqrt(sym({{4, 0}, {0, 9}}));
    CHECK(r(0, 0) == Approx(2.0).epsilon(1e-14));
    CHECK(r(1, 1) == Approx(3.0).epsilon(1e-14));
    CHECK(std::abs(r(0, 1)) < 1e-14);
  }
  SUBCASE("coupled 2x2 squares back") {
    const auto m = sym({{2, 1}, {1, 2}});
    const auto r = psd_sqrt(m);
    CHECK(relative_frobenius(r.matrix() * r.matrix(), m.matrix()) < 1e-7);
    const double s3 = std::sqrt(3.0);
    CHECK(r(0, 0) == Approx((s3 + 1) / 2));
    CHECK(r(0, 1) == Approx((s3 - 1) / 2));
  }
  SUBCASE("random PSD, full and deficient rank") {
    Rng rng(21);
    for (Eigen::Index rank : {1, 3, 6}) {
      const SymMatrix m = random_psd(rng, 6, rank);
      const auto r = psd_sqrt(m);
      CHECK(relative_frobenius(r.matrix() * r.matrix(), m.matrix()) < 1e-7);
      const auto e = eig_sym(r);
      CHECK(e.values.minCoeff() >= -1e-12 * e.values(0));
    }
  }
  SUBCASE("tiny negative eigenvalue clamped") {
    const auto r = psd_sqrt(sym({{1, 0}, {0, -5e-11}}));
    CHECK(r(1, 1) == 0.0);
  }
  SUBCASE("negative eigenvalue rejected") {
    try {
      psd_sqrt(sym({{1, 0}, {0, -1e-3}}));
      FAIL("expected NotPsdError");
    } catch (const NotPsdError& e) {
      CHECK(e.kind() == ErrorKind::not_psd);
      CHECK(e.eigenvalue() == Approx(-1e-3));
    }
  }
}

TEST_CASE("double_center") {
  SUBCASE("zeros") { CHECK(double_center(SymMatrix::zero(3)).matrix().norm() == 0.0); }
  SUBCASE("two points") {
    const auto b = double_center(sym({{0, 1}, {1, 0}}));
    CHECK(b(0, 0) == Approx(0.25));
    CHECK(b(0, 1) == Approx(-0.25));
    CHECK(b(1, 1) == Approx(0.25));
  }
  SUBCASE("collinear points have rank one") {
    const double x[3] = {0, 1, 3};
    Eigen::MatrixXd d2(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) d2(i, j) = (x[i] - x[j]) * (x[i] - x[j]);
    const auto e = eig_sym(double_center(SymMatrix(d2)));
    CHECK(e.values(0) > 1.0);
    CHECK(std::abs(e.values(1)) < 1e-12);
    CHECK(std::abs(e.values(2)) < 1e-12);
  }
  SUBCASE("row sums vanish and Euclidean input gives PSD") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      const auto pts = test::random_cloud(rng, 7, 1 + trial % 4, 3.0);
      const auto b = double_center(SymMatrix(test::naive_cost(pts, pts)));
      CHECK(b.matrix().rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
      CHECK(b.matrix().colwise().sum().cwiseAbs().maxCoeff() < 1e-9);
      CHECK(eig_sym(b).values.minCoeff() > -1e-9);
    }
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(double_center(sym({{0, -1}, {-1, 0}})), Error);
    try {
      double_center(sym({{0, -1}, {-1, 0}}));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::invalid_dissimilarity);
    }
    CHECK_THROWS_AS(double_center(sym({{1, 1}, {1, 0}})), Error);
  }
}
