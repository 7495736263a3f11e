#pragma once

#include "wte/dataset.hpp"
#include "wte/embedding.hpp"
#include "wte/label_embed.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wte {

enum class RefMode { smooth_image, uniform_box, file };
enum class RefLabels { zeros, box };

const char* to_string(RefMode m) noexcept;
const char* to_string(RefLabels m) noexcept;
/// Throws Error(invalid_argument) for an unknown name.
RefMode parse_ref_mode(const std::string& s);
RefLabels parse_ref_labels(const std::string& s);

struct PipelineOptions {
  int mds_dim = 10;                     ///< capped at the number of labels
  std::optional<double> reg;            ///< default: default_regularization
  std::optional<Eigen::Index> ref_size; ///< default: median task size
  Eigen::Index ref_size_cap = 1000;     ///< applies to the default only
  std::uint64_t ref_seed = 0;
  std::optional<RefMode> ref_mode;      ///< default: smooth_image for square d >= 64
  std::optional<int> image_side;        ///< default: sqrt(d)
  RefLabels ref_labels = RefLabels::zeros;
  std::filesystem::path ref_file;       ///< for RefMode::file
  int workers = 1;
};

/// Everything the embedding pipeline produces for a collection.
struct WteRun {
  double reg = 0.0;
  LabelAtlas atlas;
  ReferenceDistribution reference;
  std::vector<TaskEmbedding> embeddings;
  std::uint64_t solves = 0;
};

/// Checks that the collection is nonempty, shares d and has unique names.
void check_collection(const std::vector<LabeledDataset>& tasks);

/// Class statistics of every task, concatenated in task order.
std::vector<GaussianLabelStats> collection_stats(const std::vector<LabeledDataset>& tasks, double reg);

/// Reference for a collection whose atlas is already built.
ReferenceDistribution collection_reference(const std::vector<LabeledDataset>& tasks, const LabelAtlas& atlas,
                                           const PipelineOptions& options);

/// Stats, atlas, reference and one embedding per task (one OT solve each).
WteRun run_wte(const std::vector<LabeledDataset>& tasks, const PipelineOptions& options);

}  // namespace wte
