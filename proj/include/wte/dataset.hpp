#pragma once

#include "wte/numerics.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wte {

/// A labeled classification task: N samples in R^d with labels in [0, J).
struct LabeledDataset {
  std::string name;
  RowMatrix samples;                    ///< N x d
  std::vector<int> labels;              ///< N entries in [0, J)
  std::vector<std::string> label_names; ///< J entries

  Eigen::Index size() const noexcept { return samples.rows(); }
  Eigen::Index dim() const noexcept { return samples.cols(); }
  int num_classes() const noexcept { return static_cast<int>(label_names.size()); }
};

/// Throws Error(invalid_argument) if the dataset breaks an invariant:
/// label out of range, empty class, non-finite feature, size mismatch.
void validate(const LabeledDataset& ds);

/// Identifies one class of one dataset across a collection.
struct LabelKey {
  std::string dataset;
  int label = 0;

  auto operator<=>(const LabelKey&) const = default;
};

/// Gaussian surrogate for a class-conditional distribution.
struct GaussianLabelStats {
  LabelKey key;
  std::size_t count = 0;
  Eigen::VectorXd mean;
  SymMatrix cov;
};

enum class DataFormat { csv, raw_f32 };

/// csv for a ".csv" extension, raw_f32 otherwise.
DataFormat detect_format(const std::filesystem::path& path);

/// Reads and validates a dataset. The dataset name is the file stem.
///
/// CSV: one sample per row, d feature columns followed by an integer label.
/// Lines starting with '#' are comments; a comment may declare
/// `classes=J` and `names=a;b;c`. Without a declaration J = max label + 1.
///
/// raw-f32: little-endian "WTED", u32 version (1), u32 N, u32 d, u32 J,
/// N*d f32 features (row-major), N u32 labels.
///
/// Throws ParseError with a line number (csv) or byte offset (raw-f32).
LabeledDataset ingest(const std::filesystem::path& path, DataFormat format);
LabeledDataset ingest(const std::filesystem::path& path);

void write_raw_f32(const LabeledDataset& ds, const std::filesystem::path& path);
void write_csv(const LabeledDataset& ds, const std::filesystem::path& path);

/// Keeps min(n_per_class, |C_y|) samples per class, chosen by a seeded
/// shuffle. Output rows are grouped by class in label order and keep their
/// original relative order within a class.
LabeledDataset subsample(const LabeledDataset& ds, int n_per_class, std::uint64_t seed);

/// Per-class mean and biased (1/n) covariance plus reg * I, one entry per
/// label in label order.
std::vector<GaussianLabelStats> class_stats(const LabeledDataset& ds, double reg);

/// 1e-6 times the mean per-feature variance of the pooled samples.
double default_regularization(std::span<const LabeledDataset> datasets);

}  // namespace wte
