#pragma once

#include "wte/dataset.hpp"

#include <cstdint>
#include <vector>

namespace wte {

/// Gaussian-mixture tasks. Every task shares the class prototypes; task t
/// moves all of its class means by one random shift of size ~shift_scale,
/// and each class gets its own random anisotropic covariance.
struct SyntheticOptions {
  int tasks = 10;
  int samples_per_task = 200;
  int classes = 3;
  int dim = 2;
  double shift_scale = 3.0;
  double class_spread = 4.0;
  std::uint64_t seed = 0;
};

/// Tasks are named "task00", "task01", ...; deterministic given the options.
std::vector<LabeledDataset> make_synthetic_tasks(const SyntheticOptions& options);

}  // namespace wte
