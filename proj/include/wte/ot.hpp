#pragma once

#include "wte/dataset.hpp"
#include "wte/numerics.hpp"

#include <atomic>
#include <cstdint>
#include <vector>

namespace wte {

/// Uniform empirical measure: n support points in R^k, each of mass 1/n.
class DiscreteMeasure {
 public:
  explicit DiscreteMeasure(RowMatrix points);

  Eigen::Index size() const noexcept { return points_.rows(); }
  Eigen::Index dim() const noexcept { return points_.cols(); }
  const RowMatrix& points() const noexcept { return points_; }

 private:
  RowMatrix points_;
};

struct PlanEntry {
  Eigen::Index row;
  Eigen::Index col;
  double mass;
};

/// Coupling between two uniform measures, stored sparsely. A basic optimal
/// solution has at most rows + cols - 1 nonzero entries.
struct TransportPlan {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<PlanEntry> entries;  ///< row-major order, mass > 0

  Eigen::MatrixXd dense() const;
};

struct TransportResult {
  TransportPlan plan;
  double cost = 0.0;          ///< sum of plan * cost
  std::size_t pivots = 0;
};

/// Squared Euclidean distances: entry (j, m) = ||a_j - b_m||^2.
Eigen::MatrixXd cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Exact transport between uniform marginals (rows 1/n, cols 1/m) for an
/// arbitrary n x m cost. Network simplex on the transportation polytope:
/// northwest-corner initial basis, block-search pricing and a strongly
/// feasible tree (last blocking arc leaves), so the basis never cycles.
/// Deterministic for a given cost. `max_pivots == 0` selects a
/// size-dependent cap.
TransportResult solve_uniform_transport(const Eigen::MatrixXd& cost, std::size_t max_pivots = 0);

/// Optimal coupling of two uniform measures under squared Euclidean cost.
TransportResult solve_exact(const DiscreteMeasure& a, const DiscreteMeasure& b);

double wasserstein2(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Row j is the plan-weighted mean of the target points that reference
/// point j is sent to. Rows carried by a single plan entry copy the matched
/// target point exactly.
RowMatrix barycentric_project(const TransportPlan& plan, const DiscreteMeasure& target);

/// Squared 2-Wasserstein distance between two Gaussians (Bures metric
/// plus squared mean distance), clamped at zero.
double bures_wasserstein2(const GaussianLabelStats& a, const GaussianLabelStats& b);

/// Pairwise squared Bures-Wasserstein distances between every entry of
/// `rows` and every entry of `cols`, reusing one covariance square root per
/// row entry.
Eigen::MatrixXd bures_wasserstein2_table(const std::vector<GaussianLabelStats>& rows,
                                         const std::vector<GaussianLabelStats>& cols);

/// Symmetric variant for a single collection; the diagonal is exactly zero.
SymMatrix bures_wasserstein2_matrix(const std::vector<GaussianLabelStats>& stats);

/// Process-wide count of exact OT solves, for complexity accounting.
std::uint64_t ot_solve_count() noexcept;

}  // namespace wte
