#include "wte/label_embed.hpp"

#include "binary_io.hpp"
#include "wte/error.hpp"
#include "wte/ot.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace wte {

namespace {
constexpr std::uint32_t kAtlasVersion = 1;
}

std::optional<Eigen::Index> LabelAtlas::find(const LabelKey& key) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i] == key) return static_cast<Eigen::Index>(i);
  return std::nullopt;
}

LabelAtlas build_atlas(const std::vector<GaussianLabelStats>& stats, int l) {
  const auto k = static_cast<int>(stats.size());
  if (k < 2) throw Error(ErrorKind::invalid_argument, "label atlas needs at least two labels");
  if (l < 1 || l > k) {
    std::ostringstream os;
    os << "label embedding dimension " << l << " outside [1, " << k << "]";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  std::set<LabelKey> seen;
  for (const auto& s : stats) {
    if (!seen.insert(s.key).second) {
      throw Error(ErrorKind::invalid_argument,
                  "duplicate label key (" + s.key.dataset + ", " + std::to_string(s.key.label) + ")");
    }
  }

  std::vector<GaussianLabelStats> sorted = stats;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.key < b.key; });

  LabelAtlas atlas;
  atlas.l = l;
  for (const auto& s : sorted) atlas.entries.push_back(s.key);
  atlas.bures2 = bures_wasserstein2_matrix(sorted);
  const MdsEmbedding mds = mds_embed(SymMatrix(atlas.bures2.matrix().cwiseSqrt()), l);
  atlas.coords = mds.coords;
  atlas.mds_stress = mds.stress;
  atlas.clamped = mds.clamped;
  atlas.residual_spectrum = mds.residual_spectrum;
  return atlas;
}

AugmentedTask augment(const LabeledDataset& ds, const LabelAtlas& atlas) {
  if (atlas.l < 1 || atlas.coords.cols() != atlas.l) {
    throw Error(ErrorKind::invalid_argument, "atlas has no label coordinates");
  }
  std::vector<Eigen::Index> row_of(static_cast<std::size_t>(ds.num_classes()));
  for (int y = 0; y < ds.num_classes(); ++y) {
    const auto at = atlas.find(LabelKey{ds.name, y});
    if (!at) {
      throw Error(ErrorKind::unknown_label,
                  "atlas has no entry for (" + ds.name + ", " + std::to_string(y) + ")");
    }
    row_of[static_cast<std::size_t>(y)] = *at;
  }

  AugmentedTask task;
  task.dataset = ds.name;
  task.d = ds.dim();
  task.l = atlas.l;
  task.points.resize(ds.size(), task.d + task.l);
  task.points.leftCols(task.d) = ds.samples;
  for (Eigen::Index n = 0; n < ds.size(); ++n) {
    const auto y = static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(n)]);
    task.points.row(n).tail(task.l) = atlas.coords.row(row_of[y]);
  }
  return task;
}

void write_atlas(const LabelAtlas& atlas, const std::filesystem::path& path) {
  const auto k = static_cast<Eigen::Index>(atlas.entries.size());
  if (atlas.bures2.dim() != k || atlas.coords.rows() != k || atlas.coords.cols() != atlas.l) {
    throw Error(ErrorKind::invalid_argument, "atlas fields have inconsistent sizes");
  }
  detail::ByteWriter w;
  w.magic("WTEA");
  w.put(kAtlasVersion);
  w.put(static_cast<std::uint32_t>(k));
  w.put(static_cast<std::uint32_t>(atlas.l));
  for (const auto& e : atlas.entries) {
    w.str(e.dataset);
    w.put(static_cast<std::uint32_t>(e.label));
  }
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) w.put(atlas.bures2(i, j));
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < atlas.l; ++j) w.put(atlas.coords(i, j));
  w.put(atlas.mds_stress);
  w.save(path);
}

LabelAtlas read_atlas(const std::filesystem::path& path) {
  detail::ByteReader r(path);
  r.expect_magic("WTEA");
  const auto version = r.get<std::uint32_t>();
  if (version != kAtlasVersion) {
    throw ParseError(path.string() + ": unsupported atlas version " + std::to_string(version), 4);
  }
  const auto k = static_cast<Eigen::Index>(r.get<std::uint32_t>());
  LabelAtlas atlas;
  atlas.l = static_cast<int>(r.get<std::uint32_t>());
  for (Eigen::Index i = 0; i < k; ++i) {
    LabelKey key;
    key.dataset = r.str();
    key.label = static_cast<int>(r.get<std::uint32_t>());
    atlas.entries.push_back(std::move(key));
  }
  Eigen::MatrixXd b(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) b(i, j) = r.get<double>();
  if (b != b.transpose()) throw ParseError(path.string() + ": Bures matrix is not symmetric", r.offset());
  atlas.bures2 = SymMatrix(b);
  atlas.coords.resize(k, atlas.l);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < atlas.l; ++j) atlas.coords(i, j) = r.get<double>();
  atlas.mds_stress = r.get<double>();
  r.expect_end();
  return atlas;
}

}  // namespace wte
