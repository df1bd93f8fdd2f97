#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "motifcnn/graph.hpp"
#include "motifcnn/model.hpp"

namespace motifcnn {

struct GradcheckGroup {
  std::string name;
  std::size_t size = 0;
  double max_abs_error = 0.0;
  /// max |analytic - numeric| / max(max |analytic|, max |numeric|); 0 when
  /// both gradients vanish.
  double relative_error = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckGroup> groups;
  double max_relative_error() const;
};

/// Compares model_backward against central differences of the training-split
/// loss (eval mode) for every parameter matrix.
GradcheckReport gradcheck(const Model& model, const DenseMatrix& features, std::span<const MotifTensor> tensors,
                          const LabelSet& labels, double epsilon = 1e-6);

/// Random `nodes`-node graph with the edge and triangle motifs, random
/// features and fully labeled training split, `layers`-layer model.
GradcheckReport gradcheck_random_case(Task task, std::size_t layers, std::uint64_t seed, std::size_t nodes = 15,
                                      double epsilon = 1e-6);

}  // namespace motifcnn
