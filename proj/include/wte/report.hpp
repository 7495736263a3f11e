#pragma once

#include "wte/otdd.hpp"
#include "wte/pipeline.hpp"
#include "wte/synthetic.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wte {

/// Sample Pearson correlation. NaN when either series is constant.
double pearson_r(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of r under bivariate normality: t = r sqrt((n-2)/(1-r^2))
/// against Student's t with n - 2 degrees of freedom. Needs n >= 3.
double pearson_p_value(double r, std::size_t n);

/// Least-squares y ~ slope * x + intercept.
struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
AffineFit fit_affine(std::span<const double> x, std::span<const double> y);

struct CorrelationPair {
  std::string task_i, task_j;
  double wte2 = 0.0;  ///< squared WTE distance
  double otdd = 0.0;
};

struct CorrelationReport {
  std::vector<CorrelationPair> pairs;
  double pearson_r = 0.0;
  double p_value = 1.0;
  AffineFit fit;  ///< otdd ~ slope * wte2 + intercept
  /// Set when either series is (numerically) constant or every distance is
  /// negligible against the spread of the data; r is then meaningless.
  bool degenerate = false;
  std::uint64_t wte_solves = 0;
  std::uint64_t otdd_solves = 0;
  int mds_dim = 0;
  double atlas_stress = 0.0;
  double reg = 0.0;
  Eigen::MatrixXd wte2_matrix;
  Eigen::MatrixXd otdd_matrix;
  std::vector<std::string> ids;
};

/// Relative tolerance of the degenerate-correlation test.
inline constexpr double kDegenerateTolerance = 1e-6;

/// Builds the report from two matrices over the same ids. `scale` is a
/// typical squared distance of the data (e.g. mean total variance), used
/// to decide whether all distances are negligible.
CorrelationReport correlation_from_matrices(const std::vector<std::string>& ids, const Eigen::MatrixXd& wte2,
                                            const Eigen::MatrixXd& otdd, double scale);

/// Runs both pipelines over >= 3 tasks. OTDD uses the direct Bures label cost
/// with the same regularization as the atlas.
CorrelationReport correlate(const std::vector<LabeledDataset>& tasks, const PipelineOptions& options);

/// Mean over tasks of the total variance (trace of the covariance).
double mean_total_variance(const std::vector<LabeledDataset>& tasks);

struct BenchOptions {
  std::vector<int> counts{2, 4, 6, 8, 10, 12};
  int task_size = 100;
  int classes = 3;
  int dim = 2;
  int repeats = 1;
  std::uint64_t seed = 0;
  PipelineOptions pipeline;
};

struct BenchRow {
  int tasks = 0;
  std::uint64_t wte_solves = 0;
  std::uint64_t otdd_solves = 0;
  double wte_seconds = 0.0;   ///< fastest repeat
  double otdd_seconds = 0.0;  ///< fastest repeat
  double ratio() const { return otdd_seconds / wte_seconds; }
};

/// For each count M: synthetic tasks, then the full WTE pipeline (stats,
/// atlas, reference, M embeddings, pairwise distances) against full
/// pairwise OTDD, timed separately. Solve counts come from the global
/// counter.
std::vector<BenchRow> run_bench(const BenchOptions& options);

}  // namespace wte
