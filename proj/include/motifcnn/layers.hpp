#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "motifcnn/graph.hpp"
#include "motifcnn/linalg.hpp"
#include "motifcnn/motif.hpp"

namespace motifcnn {

enum class Activation : std::uint8_t { ReLU, Identity };

/// Filters of one motif convolution unit. weights[0] applies to the target
/// node, weights[k] to role k. Every slice is input_dim x filters.
struct ConvUnitParams {
  std::vector<DenseMatrix> weights;

  std::size_t num_roles() const { return weights.empty() ? 0 : weights.size() - 1; }
  std::size_t input_dim() const { return weights.empty() ? 0 : weights[0].rows(); }
  std::size_t filters() const { return weights.empty() ? 0 : weights[0].cols(); }
  friend bool operator==(const ConvUnitParams&, const ConvUnitParams&) = default;
};

struct ConvUnitTape {
  DenseMatrix pre_activation;
};

/// H = act(X W_0 + diag(1/L) sum_k A_k (X W_k)). Rows with no instances get
/// no motif term (only X W_0).
DenseMatrix conv_unit_forward(const DenseMatrix& x, const MotifTensor& tensor, const ConvUnitParams& params,
                              Activation activation, ConvUnitTape* tape = nullptr);

struct ConvUnitGradients {
  std::vector<DenseMatrix> weights;
  DenseMatrix input;  // empty unless requested
};

/// ReLU'(0) is taken as 0.
ConvUnitGradients conv_unit_backward(const DenseMatrix& x, const MotifTensor& tensor, const ConvUnitParams& params,
                                     Activation activation, const ConvUnitTape& tape, const DenseMatrix& grad_output,
                                     bool want_input_grad);

/// The same unit evaluated instance by instance: per target, the mean over
/// its instances of (W_0^T x_i + sum over non-target positions of
/// W_role^T x_node), then the activation. Targets without instances get
/// act(W_0^T x_i).
DenseMatrix reference_instance_conv(std::size_t num_nodes, const Motif& motif,
                                    std::span<const MotifInstance> instances, const ConvUnitParams& params,
                                    const DenseMatrix& x, Activation activation = Activation::ReLU);

struct AttentionResult {
  DenseMatrix output;        // N x F
  DenseMatrix scores;        // N x U, e = z_k . h_k / sqrt(F)
  DenseMatrix coefficients;  // N x U, softmax of scores per row
};

/// Per-node softmax weighting over the unit outputs. `z` is U x F, one shared
/// attention vector per motif.
AttentionResult attention_combine(std::span<const DenseMatrix> unit_outputs, const DenseMatrix& z);

struct AttentionGradients {
  std::vector<DenseMatrix> unit_outputs;
  DenseMatrix z;
};

AttentionGradients attention_backward(std::span<const DenseMatrix> unit_outputs, const DenseMatrix& z,
                                      const AttentionResult& forward, const DenseMatrix& grad_output);

struct LossResult {
  double loss = 0.0;
  DenseMatrix gradient;  // d loss / d logits; zero outside the split
};

/// Summed over nodes in `split`: -log softmax(logits)[y].
LossResult softmax_cross_entropy(const DenseMatrix& logits, const LabelSet& labels, Split split);
/// Summed over nodes in `split` and classes: logistic loss on each logit.
LossResult binary_cross_entropy(const DenseMatrix& logits, const LabelSet& labels, Split split);
/// Picks the loss matching labels.labels.task.
LossResult task_loss(const DenseMatrix& logits, const LabelSet& labels, Split split);

/// Uniform on +-sqrt(6 / (rows + cols)).
DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);
DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, std::uint64_t seed);

enum class Mode : std::uint8_t { Train, Eval };

struct DropoutResult {
  DenseMatrix output;
  DenseMatrix mask;  // 0 or 1/(1-rate) per entry; empty when dropout is a no-op
};

/// Inverted dropout. Identity in Eval mode or at rate 0. Throws
/// std::invalid_argument for a rate outside [0, 1).
DropoutResult dropout(const DenseMatrix& input, double rate, std::mt19937_64& rng, Mode mode);
DropoutResult dropout(const DenseMatrix& input, double rate, std::uint64_t seed, Mode mode);

}  // namespace motifcnn
