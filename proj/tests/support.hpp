#pragma once

#include "wte/numerics.hpp"
#include "wte/random.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

namespace wte::test {

inline RowMatrix random_cloud(Rng& rng, Eigen::Index n, Eigen::Index k, double scale = 1.0) {
  RowMatrix p(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) p(i, j) = scale * rng.normal();
  return p;
}

// Minimum over all n! matchings of the mean cost; brute force.
inline double brute_force_matching(const Eigen::MatrixXd& cost) {
  const auto n = static_cast<int>(cost.rows());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += cost(i, perm[i]);
    best = std::min(best, s / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Direct squared distances, no expansion tricks.
inline Eigen::MatrixXd naive_cost(const RowMatrix& a, const RowMatrix& b) {
  Eigen::MatrixXd c(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) s += (a(i, k) - b(j, k)) * (a(i, k) - b(j, k));
      c(i, j) = s;
    }
  return c;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("wte_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace wte::test
