#include "wte/numerics.hpp"

#include "wte/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace wte {

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "symmetric matrix must be square, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorKind::dimension_mismatch, os.str());
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "symmetric matrix has non-finite entries");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::zero(Eigen::Index dim) {
  return SymMatrix(Eigen::MatrixXd::Zero(dim, dim));
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

// Sort descending and fix the sign of every eigenvector.
EigenDecomposition finalize(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                            int sweeps) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.sweeps = sweeps;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = values(src);
    Eigen::VectorXd v = vectors.col(src);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    out.vectors.col(k) = v;
  }
  return out;
}

}  // namespace

EigenDecomposition eig_sym_jacobi(const SymMatrix& m) {
  const Eigen::Index n = m.dim();
  Eigen::MatrixXd a = m.matrix();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double threshold = kJacobiTolerance * a.norm();

  int sweep = 0;
  double off = off_diagonal_norm(a);
  while (off > threshold) {
    if (sweep == kJacobiMaxSweeps) {
      std::ostringstream os;
      os << "Jacobi eigensolver did not converge after " << kJacobiMaxSweeps
         << " sweeps (off-diagonal norm " << off << ")";
      throw SolverError(os.str(), off);
    }
    ++sweep;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- P^T A P with P the rotation in the (p, q) plane.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    off = off_diagonal_norm(a);
  }
  return finalize(a.diagonal(), v, sweep);
}

EigenDecomposition eig_sym(const SymMatrix& m) {
  if (m.dim() <= kJacobiMaxDim) return eig_sym_jacobi(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix());
  if (solver.info() != Eigen::Success) {
    throw SolverError("symmetric eigensolver did not converge", std::nan(""));
  }
  return finalize(solver.eigenvalues(), solver.eigenvectors(), 0);
}

SymMatrix psd_sqrt(const SymMatrix& m) {
  const EigenDecomposition e = eig_sym(m);
  const Eigen::Index n = m.dim();
  if (n == 0) return m;
  const double scale = std::max(std::abs(e.values(0)), std::abs(e.values(n - 1)));
  const double tol = std::max(kPsdTolerance, 1e-12 * scale);
  const double smallest = e.values(n - 1);
  if (smallest < -tol) {
    std::ostringstream os;
    os << "matrix is not positive semidefinite: eigenvalue " << smallest;
    throw NotPsdError(os.str(), smallest);
  }
  const Eigen::VectorXd roots = e.values.cwiseMax(0.0).cwiseSqrt();
  return SymMatrix(e.vectors * roots.asDiagonal() * e.vectors.transpose());
}

SymMatrix double_center(const SymMatrix& d2) {
  const Eigen::MatrixXd& d = d2.matrix();
  const Eigen::Index n = d.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j ? d(i, j) != 0.0 : d(i, j) < 0.0) {
        std::ostringstream os;
        os << "invalid squared dissimilarity at (" << i << "," << j << "): " << d(i, j);
        throw Error(ErrorKind::invalid_dissimilarity, os.str());
      }
    }
  }
  if (n == 0) return d2;
  const Eigen::VectorXd row_mean = d.rowwise().mean();
  const double grand = row_mean.mean();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      b(i, j) = -0.5 * (d(i, j) - row_mean(i) - row_mean(j) + grand);
  return SymMatrix(b);
}

double relative_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double denom = std::max(b.norm(), std::numeric_limits<double>::min());
  return (a - b).norm() / denom;
}

}  // namespace wte
