#include "wte/synthetic.hpp"

#include "wte/error.hpp"
#include "wte/random.hpp"

#include <cstdio>

namespace wte {

std::vector<LabeledDataset> make_synthetic_tasks(const SyntheticOptions& o) {
  if (o.tasks < 1 || o.classes < 1 || o.dim < 1 || o.samples_per_task < o.classes) {
    throw Error(ErrorKind::invalid_argument, "synthetic tasks need tasks, classes, dim >= 1 and a sample per class");
  }
  Rng rng(o.seed);
  const Eigen::Index d = o.dim;

  std::vector<Eigen::VectorXd> prototypes;
  for (int c = 0; c < o.classes; ++c) {
    Eigen::VectorXd p(d);
    for (Eigen::Index k = 0; k < d; ++k) p(k) = o.class_spread * rng.normal();
    prototypes.push_back(std::move(p));
  }

  std::vector<LabeledDataset> out;
  out.reserve(static_cast<std::size_t>(o.tasks));
  for (int t = 0; t < o.tasks; ++t) {
    Eigen::VectorXd shift(d);
    for (Eigen::Index k = 0; k < d; ++k) shift(k) = o.shift_scale * rng.normal();

    std::vector<Eigen::MatrixXd> factors;
    for (int c = 0; c < o.classes; ++c) {
      Eigen::MatrixXd a(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = 0.4 * rng.normal();
      a.diagonal().array() += rng.uniform(0.5, 1.5);
      factors.push_back(std::move(a));
    }

    LabeledDataset ds;
    char name[32];
    std::snprintf(name, sizeof name, "task%02d", t);
    ds.name = name;
    ds.samples.resize(o.samples_per_task, d);
    Eigen::VectorXd z(d);
    for (int n = 0; n < o.samples_per_task; ++n) {
      const int c = n % o.classes;
      for (Eigen::Index k = 0; k < d; ++k) z(k) = rng.normal();
      ds.samples.row(n) = (prototypes[c] + shift + factors[c] * z).transpose();
      ds.labels.push_back(c);
    }
    for (int c = 0; c < o.classes; ++c) ds.label_names.push_back("class" + std::to_string(c));
    out.push_back(std::move(ds));
  }
  return out;
}

}  // namespace wte
