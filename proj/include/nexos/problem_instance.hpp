#pragma once

#include "nexos/core.hpp"

#include <memory>
#include <optional>

namespace nexos {

/// A loss, a set, and the family they were built for.
struct ProblemInstance {
  std::shared_ptr<const SmoothLoss> loss;
  std::shared_ptr<const ProjectableSet> set;
  Family family = Family::Custom;
  /// Logical shape of the variable; vectors are (n, 1). The FA layout is
  /// (p * p + p, 1) since it is not a single matrix.
  Shape shape;
  /// Known signal for synthetic instances.
  std::optional<Vector> ground_truth;

  Eigen::Index dimension() const { return loss ? loss->dimension() : 0; }

  /// Throws InputError when the loss or set is missing or dimensions disagree.
  void validate() const {
    if (!loss || !set) throw InputError("ProblemInstance: loss and set are required");
    if (loss->dimension() != set->dimension()) throw InputError("ProblemInstance: loss and set dimensions differ");
    if (shape.size() != loss->dimension()) throw InputError("ProblemInstance: shape does not match the dimension");
    if (ground_truth) require_size(*ground_truth, loss->dimension(), "ProblemInstance ground truth");
  }
};

/// Wrap a user-supplied loss and set into a Custom instance.
inline ProblemInstance make_custom_problem(std::shared_ptr<const SmoothLoss> loss,
                                           std::shared_ptr<const ProjectableSet> set) {
  ProblemInstance p;
  p.shape = {loss ? loss->dimension() : 0, 1};
  p.loss = std::move(loss);
  p.set = std::move(set);
  p.family = Family::Custom;
  p.validate();
  return p;
}

}  // namespace nexos
