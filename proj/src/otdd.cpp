#include "wte/otdd.hpp"

#include "wte/error.hpp"
#include "wte/ot.hpp"
#include "wte/parallel.hpp"

#include <sstream>

namespace wte {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::MatrixXd atlas_label_table(const LabeledDataset& a, const LabeledDataset& b, const LabelAtlas& atlas) {
  auto rows_of = [&](const LabeledDataset& ds) {
    std::vector<Eigen::Index> rows;
    for (int y = 0; y < ds.num_classes(); ++y) {
      const auto at = atlas.find(LabelKey{ds.name, y});
      if (!at) {
        throw Error(ErrorKind::unknown_label,
                    "atlas has no entry for (" + ds.name + ", " + std::to_string(y) + ")");
      }
      rows.push_back(*at);
    }
    return rows;
  };
  const auto ra = rows_of(a);
  const auto rb = rows_of(b);
  Eigen::MatrixXd table(a.num_classes(), b.num_classes());
  for (std::size_t i = 0; i < ra.size(); ++i)
    for (std::size_t j = 0; j < rb.size(); ++j)
      table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (atlas.coords.row(ra[i]) - atlas.coords.row(rb[j])).squaredNorm();
  return table;
}

OtddResult solve_pair(const LabeledDataset& a, const LabeledDataset& b, const Eigen::MatrixXd& label_cost) {
  Eigen::MatrixXd cost(a.size(), b.size());
  for (Eigen::Index n = 0; n < a.size(); ++n) {
    const auto ya = a.labels[static_cast<std::size_t>(n)];
    for (Eigen::Index m = 0; m < b.size(); ++m) {
      const auto yb = b.labels[static_cast<std::size_t>(m)];
      cost(n, m) = (a.samples.row(n) - b.samples.row(m)).squaredNorm() + label_cost(ya, yb);
    }
  }
  const auto start = Clock::now();
  const TransportResult solved = solve_uniform_transport(cost);
  OtddResult out;
  out.solve_time = Clock::now() - start;
  out.pair = {a.name, b.name};
  out.value = std::max(solved.cost, 0.0);
  out.n_i = a.size();
  out.n_j = b.size();
  return out;
}

void check_pair(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "OTDD needs a common feature dimension: '" << a.name << "' has " << a.dim() << ", '" << b.name
       << "' has " << b.dim();
    throw Error(ErrorKind::dimension_mismatch, os.str());
  }
}

}  // namespace

OtddResult otdd(const LabeledDataset& a, const LabeledDataset& b, const OtddMode& mode) {
  check_pair(a, b);
  const Eigen::MatrixXd label_cost = std::visit(
      [&](const auto& m) -> Eigen::MatrixXd {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DirectLabelCost>) {
          return bures_wasserstein2_table(class_stats(a, m.reg), class_stats(b, m.reg));
        } else {
          return atlas_label_table(a, b, m.atlas.get());
        }
      },
      mode);
  return solve_pair(a, b, label_cost);
}

OtddMatrix otdd_matrix(const std::vector<LabeledDataset>& tasks, const OtddMode& mode, int workers) {
  const std::size_t k = tasks.size();
  if (k < 2) throw Error(ErrorKind::invalid_argument, "OTDD matrix needs at least two tasks");
  for (std::size_t i = 1; i < k; ++i) check_pair(tasks[0], tasks[i]);

  std::vector<std::vector<GaussianLabelStats>> stats;
  if (const auto* direct = std::get_if<DirectLabelCost>(&mode)) {
    for (const auto& t : tasks) stats.push_back(class_stats(t, direct->reg));
  }

  std::vector<std::pair<std::size_t, std::size_t>> index;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) index.emplace_back(i, j);

  OtddMatrix out;
  out.pairs.resize(index.size());
  parallel_for(index.size(), workers, [&](std::size_t p) {
    const auto [i, j] = index[p];
    const Eigen::MatrixXd label_cost =
        stats.empty() ? atlas_label_table(tasks[i], tasks[j], std::get<AtlasLabelCost>(mode).atlas.get())
                      : bures_wasserstein2_table(stats[i], stats[j]);
    out.pairs[p] = solve_pair(tasks[i], tasks[j], label_cost);
  });

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t p = 0; p < index.size(); ++p) {
    const auto [i, j] = index[p];
    values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = out.pairs[p].value;
    values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = out.pairs[p].value;
  }
  for (const auto& t : tasks) out.ids.push_back(t.name);
  out.values = SymMatrix(values);
  out.solves = index.size();
  return out;
}

}  // namespace wte
