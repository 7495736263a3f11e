#include "wte/embedding.hpp"

#include "binary_io.hpp"
#include "wte/error.hpp"
#include "wte/random.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wte {

namespace {

constexpr std::uint32_t kEmbeddingVersion = 1;

Eigen::VectorXd broadcast(const Eigen::VectorXd& v, Eigen::Index n, double fallback, const char* what) {
  if (v.size() == 0) return Eigen::VectorXd::Constant(n, fallback);
  if (v.size() == 1) return Eigen::VectorXd::Constant(n, v(0));
  if (v.size() != n) {
    std::ostringstream os;
    os << what << " has " << v.size() << " entries, expected " << n;
    throw Error(ErrorKind::dimension_mismatch, os.str());
  }
  return v;
}

// Uniform noise on a coarse grid, bilinearly upsampled to side x side,
// values in [0, 1]. Pixel centres are aligned between the two grids.
Eigen::VectorXd smooth_image(Rng& rng, int side) {
  const int low = std::max(1, side / 4);
  Eigen::MatrixXd noise(low, low);
  for (int r = 0; r < low; ++r)
    for (int c = 0; c < low; ++c) noise(r, c) = rng.uniform();

  const double scale = static_cast<double>(low) / side;
  auto source = [&](int x) {
    const double s = std::clamp((x + 0.5) * scale - 0.5, 0.0, static_cast<double>(low - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, low - 1);
    return std::tuple{i0, i1, s - i0};
  };

  Eigen::VectorXd image(side * side);
  for (int r = 0; r < side; ++r) {
    const auto [r0, r1, wr] = source(r);
    for (int c = 0; c < side; ++c) {
      const auto [c0, c1, wc] = source(c);
      const double top = (1 - wc) * noise(r0, c0) + wc * noise(r0, c1);
      const double bottom = (1 - wc) * noise(r1, c0) + wc * noise(r1, c1);
      image(r * side + c) = (1 - wr) * top + wr * bottom;
    }
  }
  return image;
}

void check_reference(const TaskEmbedding& a, const TaskEmbedding& b) {
  if (a.reference_hash != b.reference_hash) {
    throw Error(ErrorKind::incompatible_embedding,
                "embeddings '" + a.dataset + "' and '" + b.dataset +
                    "' were made against different references (" + hash_hex(a.reference_hash) +
                    " vs " + hash_hex(b.reference_hash) + ")");
  }
  if (a.vector.rows() != b.vector.rows() || a.vector.cols() != b.vector.cols()) {
    throw Error(ErrorKind::incompatible_embedding, "embeddings have different shapes");
  }
}

}  // namespace

const char* to_string(ReferenceProvenance p) noexcept {
  switch (p) {
    case ReferenceProvenance::smooth_image: return "smooth-image";
    case ReferenceProvenance::uniform_box: return "uniform-box";
    case ReferenceProvenance::user_supplied: return "user-supplied";
  }
  return "unknown";
}

std::uint64_t content_hash(const RowMatrix& points) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const auto rows = static_cast<std::uint64_t>(points.rows());
  const auto cols = static_cast<std::uint64_t>(points.cols());
  mix(&rows, sizeof rows);
  mix(&cols, sizeof cols);
  mix(points.data(), static_cast<std::size_t>(points.size()) * sizeof(double));
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ReferenceDistribution make_reference(const ReferenceOptions& o) {
  if (o.m < 1) throw Error(ErrorKind::invalid_argument, "reference needs at least one point");
  if (o.d < 1 || o.l < 0) throw Error(ErrorKind::invalid_argument, "reference dimensions must be positive");
  if (o.image_side) {
    const int side = *o.image_side;
    if (side < 1 || static_cast<Eigen::Index>(side) * side != o.d) {
      std::ostringstream os;
      os << "image reference needs d = side^2, got d = " << o.d << " and side = " << side;
      throw Error(ErrorKind::invalid_argument, os.str());
    }
  }
  const Eigen::VectorXd flo = broadcast(o.feature_lo, o.d, 0.0, "feature_lo");
  const Eigen::VectorXd fhi = broadcast(o.feature_hi, o.d, 1.0, "feature_hi");
  const bool label_box = o.label_lo.size() > 0 || o.label_hi.size() > 0;
  const Eigen::VectorXd llo = broadcast(o.label_lo, o.l, 0.0, "label_lo");
  const Eigen::VectorXd lhi = broadcast(o.label_hi, o.l, 0.0, "label_hi");

  Rng rng(o.seed);
  ReferenceDistribution ref;
  ref.seed = o.seed;
  ref.provenance = o.image_side ? ReferenceProvenance::smooth_image : ReferenceProvenance::uniform_box;
  ref.points = RowMatrix::Zero(o.m, o.d + o.l);
  for (Eigen::Index i = 0; i < o.m; ++i) {
    if (o.image_side) {
      const Eigen::VectorXd img = smooth_image(rng, *o.image_side);
      for (Eigen::Index k = 0; k < o.d; ++k) ref.points(i, k) = flo(k) + img(k) * (fhi(k) - flo(k));
    } else {
      for (Eigen::Index k = 0; k < o.d; ++k) ref.points(i, k) = rng.uniform(flo(k), fhi(k));
    }
    if (label_box) {
      for (Eigen::Index k = 0; k < o.l; ++k) ref.points(i, o.d + k) = rng.uniform(llo(k), lhi(k));
    }
  }
  ref.hash = content_hash(ref.points);
  return ref;
}

ReferenceDistribution reference_from_points(RowMatrix points, std::uint64_t seed) {
  if (points.rows() < 1 || points.cols() < 1 || !points.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "reference points must be a nonempty finite matrix");
  }
  ReferenceDistribution ref;
  ref.points = std::move(points);
  ref.seed = seed;
  ref.provenance = ReferenceProvenance::user_supplied;
  ref.hash = content_hash(ref.points);
  return ref;
}

TaskEmbedding embed_task(const AugmentedTask& task, const ReferenceDistribution& ref) {
  if (task.points.cols() != ref.points.cols()) {
    std::ostringstream os;
    os << "task '" << task.dataset << "' lives in R^" << task.points.cols()
       << " but the reference lives in R^" << ref.points.cols();
    throw Error(ErrorKind::dimension_mismatch, os.str());
  }
  const DiscreteMeasure reference(ref.points);
  const DiscreteMeasure target(task.points);
  const TransportResult solved = solve_exact(reference, target);
  const RowMatrix images = barycentric_project(solved.plan, target);

  TaskEmbedding e;
  e.dataset = task.dataset;
  e.vector = (images - ref.points) / std::sqrt(static_cast<double>(ref.points.rows()));
  e.reference_hash = ref.hash;
  e.ot_cost = solved.cost;
  return e;
}

double wte_distance(const TaskEmbedding& a, const TaskEmbedding& b) {
  check_reference(a, b);
  return (a.vector - b.vector).norm();
}

SymMatrix pairwise_distances(const std::vector<TaskEmbedding>& embeddings, bool squared) {
  const auto k = static_cast<Eigen::Index>(embeddings.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const auto& a = embeddings[static_cast<std::size_t>(i)];
      const auto& b = embeddings[static_cast<std::size_t>(j)];
      check_reference(a, b);
      const double sq = (a.vector - b.vector).squaredNorm();
      out(i, j) = out(j, i) = squared ? sq : std::sqrt(sq);
    }
  }
  return SymMatrix(out);
}

void write_embedding(const TaskEmbedding& e, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.magic("WTEV");
  w.put(kEmbeddingVersion);
  w.str(e.dataset);
  w.put(e.reference_hash);
  w.put(static_cast<std::uint32_t>(e.vector.rows()));
  w.put(static_cast<std::uint32_t>(e.vector.cols()));
  for (Eigen::Index i = 0; i < e.vector.size(); ++i) w.put(e.vector.data()[i]);
  w.save(path);
}

TaskEmbedding read_embedding(const std::filesystem::path& path) {
  detail::ByteReader r(path);
  r.expect_magic("WTEV");
  const auto version = r.get<std::uint32_t>();
  if (version != kEmbeddingVersion) {
    throw ParseError(path.string() + ": unsupported embedding version " + std::to_string(version), 4);
  }
  TaskEmbedding e;
  e.dataset = r.str();
  e.reference_hash = r.get<std::uint64_t>();
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  e.vector.resize(rows, cols);
  for (Eigen::Index i = 0; i < e.vector.size(); ++i) e.vector.data()[i] = r.get<double>();
  r.expect_end();
  return e;
}

void write_points_csv(const RowMatrix& points, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_error, "cannot open " + path.string() + " for writing");
  char buf[32];
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < points.cols(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", points(i, k));
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::io_error, "failed writing " + path.string());
}

RowMatrix read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + path.string());
  std::vector<double> values;
  Eigen::Index cols = -1, rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    Eigen::Index count = 0;
    std::size_t start = 0;
    while (start <= line.size()) {
      auto end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      const auto [p, ec] = std::from_chars(line.data() + start, line.data() + end, v);
      if (ec != std::errc{} || p != line.data() + end) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed value", line_no);
      }
      values.push_back(v);
      ++count;
      start = end + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": ragged row", line_no);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string() + ": no points", line_no);
  return Eigen::Map<const RowMatrix>(values.data(), rows, cols);
}

void write_matrix_csv(const std::vector<std::string>& ids, const Eigen::MatrixXd& m, std::ostream& out) {
  if (static_cast<Eigen::Index>(ids.size()) != m.rows() || m.rows() != m.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "matrix CSV needs one id per row and column");
  }
  char buf[32];
  out << "task";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::vector<std::string>& ids, const Eigen::MatrixXd& m,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_error, "cannot open " + path.string() + " for writing");
  write_matrix_csv(ids, m, out);
  if (!out) throw Error(ErrorKind::io_error, "failed writing " + path.string());
}

}  // namespace wte
