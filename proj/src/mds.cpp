#include "wte/mds.hpp"

#include "wte/error.hpp"

#include <cmath>
#include <sstream>

namespace wte {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& coords) {
  const Eigen::Index n = coords.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      out(i, j) = out(j, i) = (coords.row(i) - coords.row(j)).squaredNorm();
  return out;
}

double stress(const SymMatrix& d, const Eigen::MatrixXd& coords) {
  if (coords.rows() != d.dim()) {
    throw Error(ErrorKind::dimension_mismatch, "stress: coordinate rows do not match dissimilarities");
  }
  const Eigen::MatrixXd& dm = d.matrix();
  const double denom = dm.squaredNorm();
  if (denom == 0.0) {
    throw Error(ErrorKind::degenerate_input, "stress is undefined for an all-zero dissimilarity matrix");
  }
  const Eigen::MatrixXd embedded = squared_distances(coords).cwiseSqrt();
  return std::sqrt((dm - embedded).squaredNorm() / denom);
}

double centered_strain(const SymMatrix& d, const Eigen::MatrixXd& coords) {
  const Eigen::MatrixXd diff = d.matrix().cwiseAbs2() - squared_distances(coords);
  const Eigen::Index n = diff.rows();
  const Eigen::VectorXd row_mean = diff.rowwise().mean();
  const double grand = row_mean.mean();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double b = -0.5 * (diff(i, j) - row_mean(i) - row_mean(j) + grand);
      sum += b * b;
    }
  return std::sqrt(sum);
}

MdsEmbedding mds_embed(const SymMatrix& d, int l) {
  const Eigen::Index n = d.dim();
  if (l < 1 || l > n) {
    std::ostringstream os;
    os << "MDS dimension " << l << " outside [1, " << n << "]";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  if ((d.matrix().array() < 0.0).any()) {
    throw Error(ErrorKind::invalid_dissimilarity, "MDS dissimilarities must be nonnegative");
  }
  const EigenDecomposition eig = eig_sym(double_center(SymMatrix(d.matrix().cwiseAbs2())));

  MdsEmbedding out;
  out.eigen_spectrum = eig.values;
  out.coords.resize(n, l);
  double residual = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lambda = eig.values(k);
    if (k < l) {
      if (lambda < 0.0) {
        ++out.clamped;
        residual += lambda * lambda;
        out.coords.col(k).setZero();
      } else {
        out.coords.col(k) = std::sqrt(lambda) * eig.vectors.col(k);
      }
    } else {
      residual += lambda * lambda;
    }
  }
  out.residual_spectrum = std::sqrt(residual);
  out.stress = stress(d, out.coords);
  return out;
}

}  // namespace wte
