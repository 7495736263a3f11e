#include "wte/report.hpp"

#include "wte/error.hpp"
#include "wte/ot.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <chrono>
#include <cmath>
#include <limits>

namespace wte {

namespace {

void check_series(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size()) throw Error(ErrorKind::dimension_mismatch, "series lengths differ");
  if (x.size() < min_n) {
    throw Error(ErrorKind::invalid_argument, "need at least " + std::to_string(min_n) + " paired values");
  }
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a;
  return s / static_cast<double>(v.size());
}

}  // namespace

double pearson_r(std::span<const double> x, std::span<const double> y) {
  check_series(x, y, 2);
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3) throw Error(ErrorKind::invalid_argument, "p-value needs at least 3 pairs");
  if (std::isnan(r)) return std::numeric_limits<double>::quiet_NaN();
  const double df = static_cast<double>(n - 2);
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double t = std::abs(r) * std::sqrt(df / (1.0 - r2));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

AffineFit fit_affine(std::span<const double> x, std::span<const double> y) {
  check_series(x, y, 2);
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  AffineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  return f;
}

double mean_total_variance(const std::vector<LabeledDataset>& tasks) {
  double s = 0.0;
  for (const auto& t : tasks) {
    const RowMatrix centered = t.samples.rowwise() - t.samples.colwise().mean();
    s += centered.squaredNorm() / static_cast<double>(t.size());
  }
  return tasks.empty() ? 0.0 : s / static_cast<double>(tasks.size());
}

CorrelationReport correlation_from_matrices(const std::vector<std::string>& ids, const Eigen::MatrixXd& wte2,
                                            const Eigen::MatrixXd& otdd, double scale) {
  const auto k = static_cast<Eigen::Index>(ids.size());
  if (wte2.rows() != k || wte2.cols() != k || otdd.rows() != k || otdd.cols() != k) {
    throw Error(ErrorKind::dimension_mismatch, "correlation matrices do not match the task list");
  }
  if (k < 3) throw Error(ErrorKind::invalid_argument, "correlation needs at least 3 tasks");

  CorrelationReport rep;
  rep.ids = ids;
  rep.wte2_matrix = wte2;
  rep.otdd_matrix = otdd;
  std::vector<double> x, y;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) {
      rep.pairs.push_back({ids[i], ids[j], wte2(i, j), otdd(i, j)});
      x.push_back(wte2(i, j));
      y.push_back(otdd(i, j));
    }

  auto spread = [](const std::vector<double>& v) {
    double lo = v.front(), hi = v.front(), big = 0.0;
    for (double a : v) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
      big = std::max(big, std::abs(a));
    }
    return std::pair{hi - lo, big};
  };
  const auto [sx, bx] = spread(x);
  const auto [sy, by] = spread(y);
  const double tiny = kDegenerateTolerance * std::max(scale, std::numeric_limits<double>::min());
  rep.degenerate = sx <= kDegenerateTolerance * bx || sy <= kDegenerateTolerance * by || (bx <= tiny && by <= tiny);

  rep.pearson_r = pearson_r(x, y);
  rep.p_value = pearson_p_value(rep.pearson_r, x.size());
  rep.fit = fit_affine(x, y);
  return rep;
}

CorrelationReport correlate(const std::vector<LabeledDataset>& tasks, const PipelineOptions& o) {
  check_collection(tasks);
  if (tasks.size() < 3) throw Error(ErrorKind::invalid_argument, "correlation needs at least 3 tasks");
  const WteRun run = run_wte(tasks, o);
  const SymMatrix wte2 = pairwise_distances(run.embeddings, true);
  const OtddMatrix od = otdd_matrix(tasks, DirectLabelCost{run.reg}, o.workers);

  CorrelationReport rep = correlation_from_matrices(od.ids, wte2.matrix(), od.values.matrix(), mean_total_variance(tasks));
  rep.wte_solves = run.solves;
  rep.otdd_solves = od.solves;
  rep.mds_dim = run.atlas.l;
  rep.atlas_stress = run.atlas.mds_stress;
  rep.reg = run.reg;
  return rep;
}

std::vector<BenchRow> run_bench(const BenchOptions& o) {
  using clock = std::chrono::steady_clock;
  if (o.repeats < 1) throw Error(ErrorKind::invalid_argument, "bench needs at least one repeat");
  std::vector<BenchRow> rows;
  for (int m : o.counts) {
    if (m < 2) throw Error(ErrorKind::invalid_argument, "bench task counts must be >= 2");
    SyntheticOptions so;
    so.tasks = m;
    so.samples_per_task = o.task_size;
    so.classes = o.classes;
    so.dim = o.dim;
    so.seed = o.seed;
    const auto tasks = make_synthetic_tasks(so);

    BenchRow row;
    row.tasks = m;
    row.wte_seconds = row.otdd_seconds = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < o.repeats; ++rep) {
      auto before = ot_solve_count();
      auto t0 = clock::now();
      const WteRun run = run_wte(tasks, o.pipeline);
      const SymMatrix d = pairwise_distances(run.embeddings, true);
      const double wte_s = std::chrono::duration<double>(clock::now() - t0).count();
      row.wte_solves = ot_solve_count() - before;

      before = ot_solve_count();
      t0 = clock::now();
      const double reg = o.pipeline.reg ? *o.pipeline.reg : default_regularization(tasks);
      const OtddMatrix od = otdd_matrix(tasks, DirectLabelCost{reg}, o.pipeline.workers);
      const double otdd_s = std::chrono::duration<double>(clock::now() - t0).count();
      row.otdd_solves = ot_solve_count() - before;

      row.wte_seconds = std::min(row.wte_seconds, wte_s);
      row.otdd_seconds = std::min(row.otdd_seconds, otdd_s);
      (void)d;
      (void)od;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wte
