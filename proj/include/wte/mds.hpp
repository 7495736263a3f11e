#pragma once

#include "wte/numerics.hpp"

namespace wte {

/// Classical (Torgerson) MDS result.
struct MdsEmbedding {
  Eigen::MatrixXd coords;          ///< N x l, row n embeds object n
  double stress = 0.0;             ///< normalized metric stress of `coords`
  Eigen::VectorXd eigen_spectrum;  ///< all N eigenvalues of the centered Gram, descending
  int clamped = 0;                 ///< retained eigenvalues that were negative and zeroed
  /// sqrt of the summed squares of every eigenvalue not represented in
  /// `coords` (discarded or clamped). Equals centered_strain(d, coords).
  double residual_spectrum = 0.0;
};

/// Embeds N objects with pairwise dissimilarities `d` (distances, not
/// squared) into R^l. Requires a zero diagonal, nonnegative entries and
/// 1 <= l <= N. Throws Error(degenerate_input) for an all-zero `d`.
MdsEmbedding mds_embed(const SymMatrix& d, int l);

/// sqrt( sum_ij (d_ij - ||x_i - x_j||)^2 / sum_ij d_ij^2 ).
double stress(const SymMatrix& d, const Eigen::MatrixXd& coords);

/// || -1/2 J (D^2 - Dhat^2) J ||_F, where Dhat are the pairwise distances
/// of `coords`: the Gram-space error of the embedding.
double centered_strain(const SymMatrix& d, const Eigen::MatrixXd& coords);

/// Pairwise squared Euclidean distances between the rows of `coords`.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& coords);

}  // namespace wte
