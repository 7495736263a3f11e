#include "wte/ot.hpp"

#include "wte/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wte {

namespace {

std::atomic<std::uint64_t> g_solves{0};

// Basis of the transportation problem as a spanning tree over the n row
// nodes [0, n) and m column nodes [n, n + m). Flows are integers: row
// supplies are m and column demands are n, so the plan is flow / (n m).
class TransportSimplex {
 public:
  TransportSimplex(const Eigen::MatrixXd& cost)
      : n_(static_cast<int>(cost.rows())), m_(static_cast<int>(cost.cols())),
        cost_(static_cast<std::size_t>(n_) * static_cast<std::size_t>(m_)),
        basic_id_(cost_.size(), -1),
        adj_(static_cast<std::size_t>(n_ + m_)),
        potential_(static_cast<std::size_t>(n_ + m_)),
        parent_cell_(static_cast<std::size_t>(n_ + m_)),
        depth_(static_cast<std::size_t>(n_ + m_)) {
    double max_abs = 0.0;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < m_; ++j) {
        const double c = cost(i, j);
        cost_[index(i, j)] = c;
        max_abs = std::max(max_abs, std::abs(c));
      }
    }
    tolerance_ = 1e-11 * max_abs;
    northwest_corner();
  }

  std::size_t run(std::size_t max_pivots) {
    std::size_t pivots = 0;
    compute_tree();
    while (true) {
      const long long entering = find_entering();
      if (entering < 0) return pivots;
      if (pivots == max_pivots) {
        std::ostringstream os;
        os << "network simplex hit the pivot cap (" << max_pivots << ") on a " << n_ << "x" << m_
           << " problem";
        throw SolverError(os.str(), static_cast<double>(pivots));
      }
      pivot(static_cast<std::size_t>(entering));
      ++pivots;
    }
  }

  TransportResult result() const {
    TransportResult out;
    out.plan.rows = n_;
    out.plan.cols = m_;
    const double total = static_cast<double>(n_) * static_cast<double>(m_);
    std::vector<const Cell*> cells;
    for (const auto& c : basis_)
      if (c.flow > 0) cells.push_back(&c);
    std::sort(cells.begin(), cells.end(), [&](const Cell* a, const Cell* b) {
      return index(a->row, a->col) < index(b->row, b->col);
    });
    double cost = 0.0;
    for (const Cell* c : cells) {
      const double mass = static_cast<double>(c->flow) / total;
      out.plan.entries.push_back({c->row, c->col, mass});
      cost += static_cast<double>(c->flow) * cost_[index(c->row, c->col)];
    }
    out.cost = cost / total;
    return out;
  }

 private:
  struct Cell {
    int row;
    int col;
    long long flow;
  };

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(j);
  }

  void add_basic(int i, int j, long long flow) {
    const int id = static_cast<int>(basis_.size());
    basis_.push_back({i, j, flow});
    basic_id_[index(i, j)] = id;
    adj_[static_cast<std::size_t>(i)].push_back(id);
    adj_[static_cast<std::size_t>(n_ + j)].push_back(id);
  }

  // Produces exactly n + m - 1 basic cells forming a spanning tree rooted
  // at row 0. Degenerate steps add a zero-flow cell below, whose row hangs
  // off an existing column, so every zero-flow arc points toward the root:
  // the initial tree is strongly feasible.
  void northwest_corner() {
    int i = 0, j = 0;
    long long supply = m_, demand = n_;
    while (true) {
      const long long f = std::min(supply, demand);
      add_basic(i, j, f);
      supply -= f;
      demand -= f;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (supply == 0 && i < n_ - 1) {
        ++i;
        supply = m_;
      } else {
        ++j;
        demand = n_;
      }
    }
  }

  int other_end(const Cell& c, int node) const {
    return node < n_ ? n_ + c.col : c.row;
  }

  // Potentials with u_i + v_j = c_ij on every basic cell, rooted at row 0.
  void compute_tree() {
    std::fill(parent_cell_.begin(), parent_cell_.end(), -2);
    parent_cell_[0] = -1;
    potential_[0] = 0.0;
    depth_[0] = 0;
    walk_subtree(0);
  }

  // Re-hangs `node` (and everything below it) from the tree through basic
  // cell `id`. Nodes above keep their potentials, so the result equals a
  // full recomputation.
  void rehang(int node, int id) {
    const Cell& c = basis_[static_cast<std::size_t>(id)];
    const int above = other_end(c, node);
    parent_cell_[static_cast<std::size_t>(node)] = id;
    potential_[static_cast<std::size_t>(node)] = cost_[index(c.row, c.col)] - potential_[static_cast<std::size_t>(above)];
    depth_[static_cast<std::size_t>(node)] = depth_[static_cast<std::size_t>(above)] + 1;
    walk_subtree(node);
  }

  void walk_subtree(int start) {
    stack_.clear();
    stack_.push_back(start);
    while (!stack_.empty()) {
      const int node = stack_.back();
      stack_.pop_back();
      for (int id : adj_[static_cast<std::size_t>(node)]) {
        if (id == parent_cell_[static_cast<std::size_t>(node)]) continue;
        const Cell& c = basis_[static_cast<std::size_t>(id)];
        const int next = other_end(c, node);
        const double cij = cost_[index(c.row, c.col)];
        potential_[static_cast<std::size_t>(next)] = cij - potential_[static_cast<std::size_t>(node)];
        parent_cell_[static_cast<std::size_t>(next)] = id;
        depth_[static_cast<std::size_t>(next)] = depth_[static_cast<std::size_t>(node)] + 1;
        stack_.push_back(next);
      }
    }
  }

  double reduced_cost(std::size_t k) const {
    const auto i = k / static_cast<std::size_t>(m_);
    const auto j = k % static_cast<std::size_t>(m_);
    return cost_[k] - potential_[i] - potential_[static_cast<std::size_t>(n_) + j];
  }

  // Block search: scan cyclically from where the previous search stopped and
  // take the most negative reduced cost in the first block that has one.
  // Ties go to the lower index.
  long long find_entering() {
    const std::size_t total = cost_.size();
    const std::size_t block = std::max<std::size_t>(
        10, static_cast<std::size_t>(std::sqrt(static_cast<double>(total))));
    long long best = -1;
    double best_value = -tolerance_;
    std::size_t in_block = 0;
    for (std::size_t step = 0; step < total; ++step) {
      const std::size_t k = (cursor_ + step) % total;
      if (basic_id_[k] < 0) {
        const double r = reduced_cost(k);
        if (r < best_value || (best >= 0 && r == best_value && static_cast<long long>(k) < best)) {
          best_value = r;
          best = static_cast<long long>(k);
        }
      }
      if (++in_block == block) {
        in_block = 0;
        if (best >= 0) {
          cursor_ = (k + 1) % total;
          return best;
        }
      }
    }
    return best;
  }

  int parent_node(int node) const {
    return other_end(basis_[static_cast<std::size_t>(parent_cell_[static_cast<std::size_t>(node)])], node);
  }

  long long pivot(std::size_t entering) {
    const int ei = static_cast<int>(entering / static_cast<std::size_t>(m_));
    const int ej = static_cast<int>(entering % static_cast<std::size_t>(m_));

    // Tree path from column node back to row node closes the cycle.
    int a = ei, b = n_ + ej;
    from_row_.clear();
    from_col_.clear();
    while (depth_[static_cast<std::size_t>(a)] > depth_[static_cast<std::size_t>(b)]) {
      from_row_.push_back(parent_cell_[static_cast<std::size_t>(a)]);
      a = parent_node(a);
    }
    while (depth_[static_cast<std::size_t>(b)] > depth_[static_cast<std::size_t>(a)]) {
      from_col_.push_back(parent_cell_[static_cast<std::size_t>(b)]);
      b = parent_node(b);
    }
    while (a != b) {
      from_row_.push_back(parent_cell_[static_cast<std::size_t>(a)]);
      a = parent_node(a);
      from_col_.push_back(parent_cell_[static_cast<std::size_t>(b)]);
      b = parent_node(b);
    }
    // Flow enters row ei -> column ej and returns along the tree path
    // column -> apex -> row, alternately losing and gaining. Cells at even
    // distance from the entering cell's column end lose flow.
    cycle_.assign(from_col_.begin(), from_col_.end());
    cycle_.insert(cycle_.end(), from_row_.rbegin(), from_row_.rend());

    // Leaving cell: the last blocking cell met when walking the cycle from
    // the apex down to the row, across the entering cell, then up from the
    // column. This keeps the tree strongly feasible, which rules out cycling.
    long long theta = std::numeric_limits<long long>::max();
    int leaving = -1;
    bool row_side = false;
    const std::size_t col_side = from_col_.size();
    for (std::size_t k = 0; k < from_row_.size(); ++k) {
      const std::size_t position = col_side + from_row_.size() - 1 - k;
      if (position % 2 != 0) continue;
      const Cell& c = basis_[static_cast<std::size_t>(from_row_[k])];
      if (c.flow < theta) {
        theta = c.flow;
        leaving = from_row_[k];
        row_side = true;
      }
    }
    for (std::size_t k = 0; k < col_side; k += 2) {
      const Cell& c = basis_[static_cast<std::size_t>(from_col_[k])];
      if (c.flow <= theta) {
        theta = c.flow;
        leaving = from_col_[k];
        row_side = false;
      }
    }
    for (std::size_t k = 0; k < cycle_.size(); ++k) {
      Cell& c = basis_[static_cast<std::size_t>(cycle_[k])];
      c.flow += (k % 2 == 0) ? -theta : theta;
    }

    Cell& out = basis_[static_cast<std::size_t>(leaving)];
    basic_id_[index(out.row, out.col)] = -1;
    detach(out.row, leaving);
    detach(n_ + out.col, leaving);
    out = Cell{ei, ej, theta};
    basic_id_[entering] = leaving;
    adj_[static_cast<std::size_t>(ei)].push_back(leaving);
    adj_[static_cast<std::size_t>(n_ + ej)].push_back(leaving);
    // The side of the cycle that held the leaving cell is cut off from the
    // root and now hangs from the entering cell.
    rehang(row_side ? ei : n_ + ej, leaving);
    return theta;
  }

  void detach(int node, int id) {
    auto& list = adj_[static_cast<std::size_t>(node)];
    list.erase(std::find(list.begin(), list.end(), id));
  }

  int n_, m_;
  std::vector<double> cost_;
  std::vector<int> basic_id_;
  std::vector<Cell> basis_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> potential_;
  std::vector<int> parent_cell_;
  std::vector<int> depth_;
  std::vector<int> stack_, from_row_, from_col_, cycle_;
  double tolerance_ = 0.0;
  std::size_t cursor_ = 0;
};

void check_same_dim(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "measures live in different dimensions (" << a.dim() << " vs " << b.dim() << ")";
    throw Error(ErrorKind::dimension_mismatch, os.str());
  }
}

struct GaussianRoot {
  const GaussianLabelStats* stats;
  SymMatrix sqrt_cov;
};

bool identical(const GaussianLabelStats& a, const GaussianLabelStats& b) {
  return a.mean == b.mean && a.cov.matrix() == b.cov.matrix();
}

double bures_with_root(const GaussianRoot& a, const GaussianLabelStats& b) {
  if (a.stats->mean.size() != b.mean.size()) {
    throw Error(ErrorKind::dimension_mismatch, "Gaussians live in different dimensions");
  }
  if (identical(*a.stats, b)) return 0.0;
  const Eigen::MatrixXd& r = a.sqrt_cov.matrix();
  const SymMatrix cross = psd_sqrt(SymMatrix(r * b.cov.matrix() * r));
  const double value = (a.stats->mean - b.mean).squaredNorm() + a.stats->cov.trace() +
                       b.cov.trace() - 2.0 * cross.trace();
  return std::max(value, 0.0);
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(RowMatrix points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorKind::invalid_argument, "discrete measure needs at least one point");
  }
  if (!points_.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "discrete measure has non-finite support");
  }
}

Eigen::MatrixXd TransportPlan::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& e : entries) out(e.row, e.col) += e.mass;
  return out;
}

Eigen::MatrixXd cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  check_same_dim(a, b);
  Eigen::MatrixXd c(a.size(), b.size());
  for (Eigen::Index j = 0; j < a.size(); ++j)
    for (Eigen::Index m = 0; m < b.size(); ++m)
      c(j, m) = (a.points().row(j) - b.points().row(m)).squaredNorm();
  return c;
}

TransportResult solve_uniform_transport(const Eigen::MatrixXd& cost, std::size_t max_pivots) {
  if (cost.rows() < 1 || cost.cols() < 1) {
    throw Error(ErrorKind::invalid_argument, "transport problem needs nonempty marginals");
  }
  if (!cost.allFinite()) throw Error(ErrorKind::invalid_argument, "transport cost has non-finite entries");
  if (max_pivots == 0) {
    const auto nodes = static_cast<std::size_t>(cost.rows() + cost.cols());
    max_pivots = std::max<std::size_t>(100000, 50 * nodes * nodes);
  }
  g_solves.fetch_add(1, std::memory_order_relaxed);
  TransportSimplex simplex(cost);
  const std::size_t pivots = simplex.run(max_pivots);
  TransportResult out = simplex.result();
  out.pivots = pivots;
  return out;
}

TransportResult solve_exact(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return solve_uniform_transport(cost_matrix(a, b));
}

double wasserstein2(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return std::sqrt(std::max(solve_exact(a, b).cost, 0.0));
}

RowMatrix barycentric_project(const TransportPlan& plan, const DiscreteMeasure& target) {
  if (plan.cols != target.size()) {
    std::ostringstream os;
    os << "plan has " << plan.cols << " columns but the target has " << target.size() << " points";
    throw Error(ErrorKind::dimension_mismatch, os.str());
  }
  RowMatrix images = RowMatrix::Zero(plan.rows, target.dim());
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(plan.rows);
  std::vector<int> carriers(static_cast<std::size_t>(plan.rows), 0);
  std::vector<Eigen::Index> last(static_cast<std::size_t>(plan.rows), -1);
  for (const auto& e : plan.entries) {
    if (e.mass <= 0.0) continue;
    images.row(e.row) += e.mass * target.points().row(e.col);
    mass(e.row) += e.mass;
    ++carriers[static_cast<std::size_t>(e.row)];
    last[static_cast<std::size_t>(e.row)] = e.col;
  }
  for (Eigen::Index j = 0; j < plan.rows; ++j) {
    if (mass(j) <= 0.0) {
      throw Error(ErrorKind::degenerate_input,
                  "transport plan row " + std::to_string(j) + " carries no mass");
    }
    if (carriers[static_cast<std::size_t>(j)] == 1) {
      images.row(j) = target.points().row(last[static_cast<std::size_t>(j)]);
    } else {
      images.row(j) /= mass(j);
    }
  }
  return images;
}

double bures_wasserstein2(const GaussianLabelStats& a, const GaussianLabelStats& b) {
  if (identical(a, b)) return 0.0;
  return bures_with_root(GaussianRoot{&a, psd_sqrt(a.cov)}, b);
}

Eigen::MatrixXd bures_wasserstein2_table(const std::vector<GaussianLabelStats>& rows,
                                         const std::vector<GaussianLabelStats>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const GaussianRoot root{&rows[i], psd_sqrt(rows[i].cov)};
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = bures_with_root(root, cols[j]);
    }
  }
  return out;
}

SymMatrix bures_wasserstein2_matrix(const std::vector<GaussianLabelStats>& stats) {
  const auto k = static_cast<Eigen::Index>(stats.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const GaussianRoot root{&stats[static_cast<std::size_t>(i)],
                            psd_sqrt(stats[static_cast<std::size_t>(i)].cov)};
    for (Eigen::Index j = i + 1; j < k; ++j) {
      out(i, j) = out(j, i) = bures_with_root(root, stats[static_cast<std::size_t>(j)]);
    }
  }
  return SymMatrix(out);
}

std::uint64_t ot_solve_count() noexcept { return g_solves.load(std::memory_order_relaxed); }

}  // namespace wte
