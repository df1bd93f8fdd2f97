#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "motifcnn/layers.hpp"
#include "motifcnn/linalg.hpp"
#include "motifcnn/motif.hpp"

namespace motifcnn {

/// One stacked layer: a conv unit per motif and the attention vectors that
/// fuse them (row k of `attention` belongs to motif k).
struct LayerParams {
  std::vector<ConvUnitParams> units;
  DenseMatrix attention;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct ModelParams {
  std::vector<LayerParams> layers;
  DenseMatrix classifier;  // F x K
  DenseMatrix bias;        // 1 x K
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Visits every parameter matrix in a fixed order with a stable name
/// ("layer0.unit1.w2", "layer0.attention", "classifier.weight", ...).
void for_each_parameter(ModelParams& params, const std::function<void(const std::string&, DenseMatrix&)>& fn);
void for_each_parameter(const ModelParams& params,
                        const std::function<void(const std::string&, const DenseMatrix&)>& fn);

/// Same shapes, all zeros.
ModelParams zeros_like(const ModelParams& params);

struct ModelConfig {
  std::size_t input_dim = 0;
  std::size_t filters = 16;
  std::size_t num_classes = 0;
  std::size_t num_layers = 3;
  /// K_M of every motif, in motif order.
  std::vector<std::size_t> motif_roles;
  double dropout = 0.0;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct Model {
  ModelConfig config;
  ModelParams params;
  friend bool operator==(const Model&, const Model&) = default;
};

/// Glorot-uniform weights and attention vectors, zero bias.
Model init_model(const ModelConfig& config, std::uint64_t seed);

struct LayerTape {
  DenseMatrix input;         // after dropout
  DenseMatrix dropout_mask;  // empty when no dropout was applied
  std::vector<ConvUnitTape> units;
  std::vector<DenseMatrix> unit_outputs;
  AttentionResult attention;
};

struct ForwardTape {
  std::vector<LayerTape> layers;
};

struct ForwardResult {
  DenseMatrix logits;
  ForwardTape tape;
};

/// Stacked conv units + attention, then the dense classifier. Dropout hits
/// each layer input in Train mode and draws from `rng` (required then).
ForwardResult model_forward(const Model& model, const DenseMatrix& features, std::span<const MotifTensor> tensors,
                            Mode mode, std::mt19937_64* rng = nullptr);

/// Exact reverse pass; returns d loss / d parameter for every parameter.
ModelParams model_backward(const Model& model, std::span<const MotifTensor> tensors, const ForwardTape& tape,
                           const DenseMatrix& grad_logits);

}  // namespace motifcnn
