#pragma once

#include "wte/dataset.hpp"
#include "wte/label_embed.hpp"
#include "wte/numerics.hpp"

#include <chrono>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wte {

/// Label cost is the squared Bures-Wasserstein distance between the class
/// Gaussians, estimated with covariance regularization `reg`.
struct DirectLabelCost {
  double reg = 0.0;
};

/// Label cost is the squared distance between atlas coordinates.
struct AtlasLabelCost {
  std::reference_wrapper<const LabelAtlas> atlas;
};

using OtddMode = std::variant<DirectLabelCost, AtlasLabelCost>;

struct OtddResult {
  std::pair<std::string, std::string> pair;
  double value = 0.0;  ///< optimal total cost, squared-distance scale
  std::chrono::duration<double> solve_time{};
  Eigen::Index n_i = 0, n_j = 0;
};

/// Exact OT between two labeled datasets under the ground cost
/// ||x - x'||^2 + label_cost(y, y'). One OT solve.
OtddResult otdd(const LabeledDataset& a, const LabeledDataset& b, const OtddMode& mode);

struct OtddMatrix {
  std::vector<std::string> ids;
  SymMatrix values;
  std::vector<OtddResult> pairs;  ///< upper triangle, row-major
  std::size_t solves = 0;         ///< K (K - 1) / 2
};

/// Pairwise OTDD over a collection. Pairs are scheduled on up to `workers`
/// threads; the result does not depend on the worker count.
OtddMatrix otdd_matrix(const std::vector<LabeledDataset>& tasks, const OtddMode& mode, int workers = 1);

}  // namespace wte
