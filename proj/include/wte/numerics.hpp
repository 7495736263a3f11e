#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace wte {

/// Row-major dense matrix used for point clouds and embeddings: one sample
/// per row, so rows are contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense symmetric matrix. Symmetry is enforced on construction by
/// averaging with the transpose.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& m);
  static SymMatrix zero(Eigen::Index dim);
  static SymMatrix identity(Eigen::Index dim);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  double trace() const { return m_.trace(); }

 private:
  Eigen::MatrixXd m_;
};

struct EigenDecomposition {
  Eigen::VectorXd values;   ///< descending
  Eigen::MatrixXd vectors;  ///< column k pairs with values(k)
  int sweeps = 0;           ///< Jacobi sweeps used (0 for the large-matrix path)
};

/// Matrices up to this dimension go through cyclic Jacobi; larger ones use
/// Eigen's tridiagonal QR.
inline constexpr Eigen::Index kJacobiMaxDim = 128;
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-10;

/// Symmetric eigendecomposition, eigenvalues sorted descending. Each
/// eigenvector is oriented so that its first nonzero component is positive.
/// Throws SolverError (residual = off-diagonal norm) if Jacobi does not
/// converge within kJacobiMaxSweeps.
EigenDecomposition eig_sym(const SymMatrix& m);

/// Cyclic Jacobi regardless of dimension. Exposed for testing.
EigenDecomposition eig_sym_jacobi(const SymMatrix& m);

/// Principal square root of a near-PSD matrix. Eigenvalues in
/// [-tol, 0) are clamped to zero, anything below throws NotPsdError, where
/// tol = max(kPsdTolerance, 1e-12 * largest |eigenvalue|).
SymMatrix psd_sqrt(const SymMatrix& m);

/// -1/2 J D J with J the centering matrix. `d2` holds SQUARED
/// dissimilarities with a zero diagonal.
SymMatrix double_center(const SymMatrix& d2);

/// Relative Frobenius error ||a - b|| / max(||b||, tiny).
double relative_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace wte
