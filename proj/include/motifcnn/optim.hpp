#pragma once

#include <cstdint>
#include <span>

#include "motifcnn/model.hpp"

namespace motifcnn {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates, shaped like the parameters.
struct AdamState {
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;
};

AdamState adam_init(const ModelParams& params);

/// One bias-corrected Adam update of a flat parameter block at step t >= 1.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                 const AdamConfig& config, std::uint64_t t);

/// Advances state.step and updates every parameter. Throws ShapeError when
/// grads or state do not match params.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, const AdamConfig& config);

}  // namespace motifcnn
