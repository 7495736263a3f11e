#include "wte/pipeline.hpp"

#include "wte/error.hpp"
#include "wte/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace wte {

const char* to_string(RefMode m) noexcept {
  switch (m) {
    case RefMode::smooth_image: return "smooth-image";
    case RefMode::uniform_box: return "uniform-box";
    case RefMode::file: return "file";
  }
  return "?";
}

const char* to_string(RefLabels m) noexcept { return m == RefLabels::zeros ? "zeros" : "box"; }

RefMode parse_ref_mode(const std::string& s) {
  for (RefMode m : {RefMode::smooth_image, RefMode::uniform_box, RefMode::file})
    if (s == to_string(m)) return m;
  throw Error(ErrorKind::invalid_argument, "unknown reference mode '" + s + "'");
}

RefLabels parse_ref_labels(const std::string& s) {
  for (RefLabels m : {RefLabels::zeros, RefLabels::box})
    if (s == to_string(m)) return m;
  throw Error(ErrorKind::invalid_argument, "unknown reference label mode '" + s + "'");
}

void check_collection(const std::vector<LabeledDataset>& tasks) {
  if (tasks.empty()) throw Error(ErrorKind::invalid_argument, "empty task collection");
  std::set<std::string> names;
  for (const auto& t : tasks) {
    if (t.dim() != tasks.front().dim()) {
      std::ostringstream os;
      os << "task '" << t.name << "' has d = " << t.dim() << ", expected " << tasks.front().dim();
      throw Error(ErrorKind::dimension_mismatch, os.str());
    }
    if (!names.insert(t.name).second) throw Error(ErrorKind::invalid_argument, "duplicate task name '" + t.name + "'");
  }
}

std::vector<GaussianLabelStats> collection_stats(const std::vector<LabeledDataset>& tasks, double reg) {
  std::vector<GaussianLabelStats> all;
  for (const auto& t : tasks) {
    auto s = class_stats(t, reg);
    all.insert(all.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return all;
}

namespace {

Eigen::Index median_size(const std::vector<LabeledDataset>& tasks) {
  std::vector<Eigen::Index> sizes;
  for (const auto& t : tasks) sizes.push_back(t.size());
  std::sort(sizes.begin(), sizes.end());
  const std::size_t n = sizes.size();
  return n % 2 ? sizes[n / 2] : (sizes[n / 2 - 1] + sizes[n / 2]) / 2;
}

std::optional<int> square_side(Eigen::Index d) {
  const auto s = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(d))));
  if (s * s == d) return static_cast<int>(s);
  return std::nullopt;
}

}  // namespace

ReferenceDistribution collection_reference(const std::vector<LabeledDataset>& tasks, const LabelAtlas& atlas,
                                           const PipelineOptions& o) {
  const Eigen::Index d = tasks.front().dim();
  const Eigen::Index l = atlas.coords.cols();

  RefMode mode = RefMode::uniform_box;
  if (o.ref_mode) {
    mode = *o.ref_mode;
  } else if (const auto side = square_side(d); side && *side >= 8) {
    mode = RefMode::smooth_image;
  }

  if (mode == RefMode::file) {
    if (o.ref_file.empty()) throw Error(ErrorKind::invalid_argument, "reference mode 'file' needs a reference file");
    RowMatrix points = read_points_csv(o.ref_file);
    if (points.cols() != d + l) {
      std::ostringstream os;
      os << "reference file has " << points.cols() << " columns, expected d + l = " << d + l;
      throw Error(ErrorKind::dimension_mismatch, os.str());
    }
    return reference_from_points(std::move(points), o.ref_seed);
  }

  ReferenceOptions r;
  r.d = d;
  r.l = l;
  r.seed = o.ref_seed;
  r.m = o.ref_size ? *o.ref_size : std::min(median_size(tasks), o.ref_size_cap);
  if (r.m < 1) throw Error(ErrorKind::invalid_argument, "reference size must be positive");

  Eigen::VectorXd lo = tasks.front().samples.colwise().minCoeff().transpose();
  Eigen::VectorXd hi = tasks.front().samples.colwise().maxCoeff().transpose();
  for (const auto& t : tasks) {
    lo = lo.cwiseMin(t.samples.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(t.samples.colwise().maxCoeff().transpose());
  }
  if (mode == RefMode::smooth_image) {
    const auto side = o.image_side ? std::optional<int>(*o.image_side) : square_side(d);
    if (!side) throw Error(ErrorKind::invalid_argument, "smooth-image reference needs a square feature dimension");
    r.image_side = side;
    // one intensity range for every pixel
    r.feature_lo = Eigen::VectorXd::Constant(1, lo.minCoeff());
    r.feature_hi = Eigen::VectorXd::Constant(1, hi.maxCoeff());
  } else {
    r.feature_lo = lo;
    r.feature_hi = hi;
  }
  if (o.ref_labels == RefLabels::box) {
    r.label_lo = atlas.coords.colwise().minCoeff().transpose();
    r.label_hi = atlas.coords.colwise().maxCoeff().transpose();
  }
  return make_reference(r);
}

WteRun run_wte(const std::vector<LabeledDataset>& tasks, const PipelineOptions& o) {
  check_collection(tasks);
  WteRun run;
  run.reg = o.reg ? *o.reg : default_regularization(tasks);
  const auto stats = collection_stats(tasks, run.reg);
  if (o.mds_dim < 1) throw Error(ErrorKind::invalid_argument, "MDS dimension must be at least 1");
  run.atlas = build_atlas(stats, std::min(o.mds_dim, static_cast<int>(stats.size())));
  run.reference = collection_reference(tasks, run.atlas, o);

  run.embeddings.resize(tasks.size());
  parallel_for(tasks.size(), o.workers, [&](std::size_t i) {
    run.embeddings[i] = embed_task(augment(tasks[i], run.atlas), run.reference);
  });
  run.solves = tasks.size();
  return run;
}

}  // namespace wte
