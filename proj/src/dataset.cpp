#include "wte/dataset.hpp"

#include "binary_io.hpp"
#include "wte/error.hpp"
#include "wte/random.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

namespace wte {

namespace {

constexpr std::uint32_t kRawVersion = 1;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << msg;
  throw ParseError(os.str(), line);
}

std::vector<std::string> default_names(int classes) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(classes));
  for (int j = 0; j < classes; ++j) names.push_back(std::to_string(j));
  return names;
}

struct CsvHeader {
  std::optional<int> classes;
  std::vector<std::string> names;
};

// "# classes=3 names=zero;one;two". Unrecognised tokens are ignored.
void parse_comment(std::string_view line, CsvHeader& header, const std::filesystem::path& path,
                   std::size_t line_no) {
  std::istringstream tokens{std::string(line.substr(1))};
  std::string tok;
  while (tokens >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const std::string value = tok.substr(eq + 1);
    if (key == "classes") {
      int j = 0;
      const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), j);
      if (ec != std::errc{} || p != value.data() + value.size() || j < 1) {
        fail(path, line_no, "bad class count '" + value + "'");
      }
      header.classes = j;
    } else if (key == "names") {
      header.names.clear();
      for (auto n : split(value, ';')) header.names.emplace_back(n);
    }
  }
}

LabeledDataset ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + path.string());

  CsvHeader header;
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::size_t> label_lines;
  std::optional<std::size_t> dim;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      parse_comment(line, header, path, line_no);
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() < 2) fail(path, line_no, "expected at least one feature and a label");
    const std::size_t d = fields.size() - 1;
    if (!dim) dim = d;
    if (*dim != d) {
      std::ostringstream os;
      os << "row has " << d << " features, expected " << *dim;
      fail(path, line_no, os.str());
    }
    for (std::size_t k = 0; k < d; ++k) {
      const auto f = fields[k];
      double v = 0.0;
      const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size()) {
        fail(path, line_no, "malformed feature '" + std::string(f) + "'");
      }
      if (!std::isfinite(v)) fail(path, line_no, "non-finite feature");
      values.push_back(v);
    }
    const auto lf = fields.back();
    int label = 0;
    const auto [p, ec] = std::from_chars(lf.data(), lf.data() + lf.size(), label);
    if (ec != std::errc{} || p != lf.data() + lf.size() || label < 0) {
      fail(path, line_no, "malformed label '" + std::string(lf) + "'");
    }
    labels.push_back(label);
    label_lines.push_back(line_no);
  }
  if (labels.empty()) fail(path, line_no, "no samples");

  int max_label = 0;
  for (int y : labels) max_label = std::max(max_label, y);
  const int classes = header.classes.value_or(max_label + 1);
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] >= classes) {
      std::ostringstream os;
      os << "label " << labels[n] << " out of range for " << classes << " classes";
      fail(path, label_lines[n], os.str());
    }
  }
  if (!header.names.empty() && header.names.size() != static_cast<std::size_t>(classes)) {
    fail(path, 1, "names= lists a different number of classes");
  }

  LabeledDataset ds;
  ds.name = path.stem().string();
  const auto n = static_cast<Eigen::Index>(labels.size());
  ds.samples = Eigen::Map<const RowMatrix>(values.data(), n, static_cast<Eigen::Index>(*dim));
  ds.labels = std::move(labels);
  ds.label_names = header.names.empty() ? default_names(classes) : std::move(header.names);
  try {
    validate(ds);
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what(), line_no);
  }
  return ds;
}

LabeledDataset ingest_raw(const std::filesystem::path& path) {
  detail::ByteReader r(path);
  r.expect_magic("WTED");
  const auto version = r.get<std::uint32_t>();
  if (version != kRawVersion) {
    throw ParseError(path.string() + ": unsupported version " + std::to_string(version), 4);
  }
  const auto n = r.get<std::uint32_t>();
  const auto d = r.get<std::uint32_t>();
  const auto classes = r.get<std::uint32_t>();
  if (n == 0 || d == 0 || classes == 0) {
    throw ParseError(path.string() + ": empty dataset header", 8);
  }
  const std::size_t expected =
      static_cast<std::size_t>(n) * d * sizeof(float) + static_cast<std::size_t>(n) * sizeof(std::uint32_t);
  if (r.remaining() != expected) {
    std::ostringstream os;
    os << path.string() << ": payload is " << r.remaining() << " bytes, header implies " << expected;
    throw ParseError(os.str(), r.offset());
  }

  LabeledDataset ds;
  ds.name = path.stem().string();
  ds.samples.resize(n, d);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t k = 0; k < d; ++k) {
      const std::size_t at = r.offset();
      const float v = r.get<float>();
      if (!std::isfinite(v)) throw ParseError(path.string() + ": non-finite feature", at);
      ds.samples(i, k) = v;
    }
  }
  ds.labels.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::size_t at = r.offset();
    const auto y = r.get<std::uint32_t>();
    if (y >= classes) {
      std::ostringstream os;
      os << path.string() << ": label " << y << " out of range for " << classes << " classes";
      throw ParseError(os.str(), at);
    }
    ds.labels[i] = static_cast<int>(y);
  }
  ds.label_names = default_names(static_cast<int>(classes));
  try {
    validate(ds);
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what(), r.offset());
  }
  return ds;
}

}  // namespace

void validate(const LabeledDataset& ds) {
  if (ds.samples.rows() == 0 || ds.samples.cols() == 0) {
    throw Error(ErrorKind::invalid_argument, "dataset '" + ds.name + "' is empty");
  }
  if (static_cast<Eigen::Index>(ds.labels.size()) != ds.samples.rows()) {
    throw Error(ErrorKind::invalid_argument, "dataset '" + ds.name + "': label count != sample count");
  }
  if (!ds.samples.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "dataset '" + ds.name + "' has non-finite features");
  }
  const int classes = ds.num_classes();
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(classes, 0)), 0);
  for (int y : ds.labels) {
    if (y < 0 || y >= classes) {
      std::ostringstream os;
      os << "dataset '" << ds.name << "': label " << y << " out of range [0," << classes << ")";
      throw Error(ErrorKind::invalid_argument, os.str());
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  for (int j = 0; j < classes; ++j) {
    if (counts[static_cast<std::size_t>(j)] == 0) {
      std::ostringstream os;
      os << "dataset '" << ds.name << "': class " << j << " has no samples";
      throw Error(ErrorKind::invalid_argument, os.str());
    }
  }
}

DataFormat detect_format(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DataFormat::csv : DataFormat::raw_f32;
}

LabeledDataset ingest(const std::filesystem::path& path, DataFormat format) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::io_error, "no such file: " + path.string());
  }
  return format == DataFormat::csv ? ingest_csv(path) : ingest_raw(path);
}

LabeledDataset ingest(const std::filesystem::path& path) {
  return ingest(path, detect_format(path));
}

void write_raw_f32(const LabeledDataset& ds, const std::filesystem::path& path) {
  validate(ds);
  detail::ByteWriter w;
  w.magic("WTED");
  w.put(kRawVersion);
  w.put(static_cast<std::uint32_t>(ds.size()));
  w.put(static_cast<std::uint32_t>(ds.dim()));
  w.put(static_cast<std::uint32_t>(ds.num_classes()));
  for (Eigen::Index i = 0; i < ds.size(); ++i)
    for (Eigen::Index k = 0; k < ds.dim(); ++k) w.put(static_cast<float>(ds.samples(i, k)));
  for (int y : ds.labels) w.put(static_cast<std::uint32_t>(y));
  w.save(path);
}

void write_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  validate(ds);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_error, "cannot open " + path.string() + " for writing");
  out << "# classes=" << ds.num_classes() << " names=";
  for (int j = 0; j < ds.num_classes(); ++j) out << (j ? ";" : "") << ds.label_names[static_cast<std::size_t>(j)];
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index k = 0; k < ds.dim(); ++k) out << ds.samples(i, k) << ',';
    out << ds.labels[static_cast<std::size_t>(i)] << '\n';
  }
  if (!out) throw Error(ErrorKind::io_error, "failed writing " + path.string());
}

LabeledDataset subsample(const LabeledDataset& ds, int n_per_class, std::uint64_t seed) {
  if (n_per_class < 1) {
    throw Error(ErrorKind::invalid_argument, "subsample: n_per_class must be >= 1");
  }
  validate(ds);
  std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(ds.num_classes()));
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);
  }

  Rng rng(seed);
  std::vector<Eigen::Index> keep;
  for (auto& members : by_class) {
    rng.shuffle(members.begin(), members.end());
    const auto take = std::min(members.size(), static_cast<std::size_t>(n_per_class));
    members.resize(take);
    std::sort(members.begin(), members.end());
    keep.insert(keep.end(), members.begin(), members.end());
  }

  LabeledDataset out;
  out.name = ds.name;
  out.label_names = ds.label_names;
  out.samples.resize(static_cast<Eigen::Index>(keep.size()), ds.dim());
  out.labels.reserve(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.samples.row(static_cast<Eigen::Index>(r)) = ds.samples.row(keep[r]);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(keep[r])]);
  }
  return out;
}

std::vector<GaussianLabelStats> class_stats(const LabeledDataset& ds, double reg) {
  if (reg < 0.0) throw Error(ErrorKind::invalid_argument, "class_stats: reg must be >= 0");
  validate(ds);
  const Eigen::Index d = ds.dim();
  const auto classes = static_cast<std::size_t>(ds.num_classes());

  std::vector<GaussianLabelStats> stats(classes);
  std::vector<Eigen::VectorXd> sums(classes, Eigen::VectorXd::Zero(d));
  std::vector<std::size_t> counts(classes, 0);
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const auto y = static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)]);
    sums[y] += ds.samples.row(i).transpose();
    ++counts[y];
  }
  std::vector<Eigen::MatrixXd> scatter(classes, Eigen::MatrixXd::Zero(d, d));
  std::vector<Eigen::VectorXd> means(classes);
  for (std::size_t y = 0; y < classes; ++y) means[y] = sums[y] / static_cast<double>(counts[y]);
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const auto y = static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd c = ds.samples.row(i).transpose() - means[y];
    scatter[y].selfadjointView<Eigen::Lower>().rankUpdate(c);
  }
  for (std::size_t y = 0; y < classes; ++y) {
    Eigen::MatrixXd cov = scatter[y].selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(counts[y]);
    cov.diagonal().array() += reg;
    stats[y].key = LabelKey{ds.name, static_cast<int>(y)};
    stats[y].count = counts[y];
    stats[y].mean = means[y];
    stats[y].cov = SymMatrix(cov);
  }
  return stats;
}

double default_regularization(std::span<const LabeledDataset> datasets) {
  Eigen::Index d = -1;
  std::size_t n = 0;
  Eigen::VectorXd sum, sum_sq;
  for (const auto& ds : datasets) {
    if (d < 0) {
      d = ds.dim();
      sum = Eigen::VectorXd::Zero(d);
      sum_sq = Eigen::VectorXd::Zero(d);
    }
    if (ds.dim() != d) {
      throw Error(ErrorKind::dimension_mismatch, "datasets in a collection must share the feature dimension");
    }
    sum += ds.samples.colwise().sum().transpose();
    sum_sq += ds.samples.array().square().matrix().colwise().sum().transpose();
    n += static_cast<std::size_t>(ds.size());
  }
  if (n == 0) return 0.0;
  const Eigen::VectorXd mean = sum / static_cast<double>(n);
  const Eigen::VectorXd var = (sum_sq / static_cast<double>(n) - mean.cwiseAbs2()).cwiseMax(0.0);
  return 1e-6 * var.mean();
}

}  // namespace wte
