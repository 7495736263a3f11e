#pragma once

#include "wte/dataset.hpp"
#include "wte/mds.hpp"
#include "wte/numerics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

namespace wte {

/// Joint Euclidean embedding of every class of every task in a collection.
/// Squared distances between rows of `coords` approximate the squared
/// Bures-Wasserstein distances between the class Gaussians.
struct LabelAtlas {
  std::vector<LabelKey> entries;  ///< row order of bures2 and coords
  SymMatrix bures2;               ///< K x K squared Bures-Wasserstein distances
  Eigen::MatrixXd coords;         ///< K x l
  double mds_stress = 0.0;
  int l = 0;
  /// Not persisted; zero for a loaded atlas.
  int clamped = 0;
  double residual_spectrum = 0.0;

  std::optional<Eigen::Index> find(const LabelKey& key) const;
};

/// Builds the atlas from the class statistics of all tasks. Needs K >= 2
/// distinct keys and 1 <= l <= K. Entries are sorted by key, so the result
/// does not depend on the order of `stats`.
LabelAtlas build_atlas(const std::vector<GaussianLabelStats>& stats, int l);

/// A task lifted to R^{d+l}: each sample concatenated with its label's atlas
/// coordinates.
struct AugmentedTask {
  std::string dataset;
  RowMatrix points;  ///< N x (d + l)
  Eigen::Index d = 0;
  Eigen::Index l = 0;
};

/// Throws Error(unknown_label) when a (dataset, label) pair is not in the atlas.
AugmentedTask augment(const LabeledDataset& ds, const LabelAtlas& atlas);

/// Binary layout: "WTEA", u32 version, u32 K, u32 l, K x (string dataset,
/// u32 label), K*K f64 bures2 (row-major), K*l f64 coords (row-major),
/// f64 stress. Strings are u32 length + bytes.
void write_atlas(const LabelAtlas& atlas, const std::filesystem::path& path);
LabelAtlas read_atlas(const std::filesystem::path& path);

}  // namespace wte
