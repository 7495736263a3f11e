#pragma once

#include "wte/label_embed.hpp"
#include "wte/numerics.hpp"
#include "wte/ot.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wte {

enum class ReferenceProvenance { smooth_image, uniform_box, user_supplied };

const char* to_string(ReferenceProvenance p) noexcept;

/// Fixed measure that every task in a collection is embedded against.
struct ReferenceDistribution {
  RowMatrix points;  ///< M x (d + l)
  std::uint64_t seed = 0;
  ReferenceProvenance provenance = ReferenceProvenance::uniform_box;
  std::uint64_t hash = 0;  ///< content_hash(points)
};

/// FNV-1a over the shape and the raw bytes of the entries.
std::uint64_t content_hash(const RowMatrix& points);
std::string hash_hex(std::uint64_t hash);

struct ReferenceOptions {
  Eigen::Index m = 1;  ///< number of reference points
  Eigen::Index d = 1;  ///< feature dimension
  Eigen::Index l = 0;  ///< label dimension
  std::uint64_t seed = 0;
  /// Set for image features (d must equal side^2): noise drawn on a
  /// side/4 grid and bilinearly upsampled. Otherwise features are i.i.d.
  /// uniform in the feature box.
  std::optional<int> image_side;
  /// Feature box. Empty means [0, 1] in every coordinate; a single entry
  /// applies to every coordinate.
  Eigen::VectorXd feature_lo, feature_hi;
  /// Label box. Empty means all-zero label coordinates.
  Eigen::VectorXd label_lo, label_hi;
};

/// Deterministic given the options. Throws Error(invalid_argument) when
/// image_side is set and d != side^2.
ReferenceDistribution make_reference(const ReferenceOptions& options);

/// Wraps user-supplied points (provenance user_supplied).
ReferenceDistribution reference_from_points(RowMatrix points, std::uint64_t seed = 0);

/// Wasserstein embedding of one task against a reference:
/// (T - X0) / sqrt(M) with T the barycentric projection of the optimal plan.
struct TaskEmbedding {
  std::string dataset;
  RowMatrix vector;  ///< M x (d + l)
  std::uint64_t reference_hash = 0;
  std::optional<double> ot_cost;  ///< not persisted
};

/// Runs exactly one exact OT solve.
TaskEmbedding embed_task(const AugmentedTask& task, const ReferenceDistribution& ref);

/// Frobenius distance. Throws Error(incompatible_embedding) when the two
/// embeddings were made against different references.
double wte_distance(const TaskEmbedding& a, const TaskEmbedding& b);

/// K x K matrix of (optionally squared) wte distances. No OT solves.
SymMatrix pairwise_distances(const std::vector<TaskEmbedding>& embeddings, bool squared);

/// Binary layout: "WTEV", u32 version, string dataset, u64 reference hash,
/// u32 M, u32 d+l, M*(d+l) f64 row-major. Strings are u32 length + bytes.
void write_embedding(const TaskEmbedding& e, const std::filesystem::path& path);
TaskEmbedding read_embedding(const std::filesystem::path& path);

/// Reference points as CSV, one point per row.
void write_points_csv(const RowMatrix& points, const std::filesystem::path& path);
RowMatrix read_points_csv(const std::filesystem::path& path);

/// Square matrix with task ids as row and column headers.
void write_matrix_csv(const std::vector<std::string>& ids, const Eigen::MatrixXd& m,
                      const std::filesystem::path& path);
void write_matrix_csv(const std::vector<std::string>& ids, const Eigen::MatrixXd& m, std::ostream& out);

}  // namespace wte
