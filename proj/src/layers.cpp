#include "motifcnn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "motifcnn/errors.hpp"

namespace motifcnn {

namespace {

void check_conv_shapes(const DenseMatrix& x, const MotifTensor& tensor, const ConvUnitParams& params) {
  if (params.weights.size() != tensor.num_roles() + 1) {
    throw ShapeError("conv unit has " + std::to_string(params.num_roles()) + " role weights but the tensor has " +
                     std::to_string(tensor.num_roles()) + " roles");
  }
  if (tensor.num_nodes() != x.rows()) {
    throw ShapeError("tensor built for " + std::to_string(tensor.num_nodes()) + " nodes, features have " +
                     std::to_string(x.rows()));
  }
  for (const auto& w : params.weights) {
    if (w.rows() != x.cols() || w.cols() != params.filters()) throw ShapeError("conv weight slice has wrong shape");
  }
}

std::vector<double> inverse_counts(const MotifTensor& tensor) {
  std::vector<double> inv(tensor.num_nodes(), 0.0);
  for (std::size_t i = 0; i < inv.size(); ++i) {
    if (tensor.instance_counts[i] > 0) inv[i] = 1.0 / static_cast<double>(tensor.instance_counts[i]);
  }
  return inv;
}

double apply(Activation a, double v) { return a == Activation::ReLU ? std::max(v, 0.0) : v; }

}  // namespace

DenseMatrix conv_unit_forward(const DenseMatrix& x, const MotifTensor& tensor, const ConvUnitParams& params,
                              Activation activation, ConvUnitTape* tape) {
  check_conv_shapes(x, tensor, params);
  DenseMatrix motif_term(x.rows(), params.filters());
  for (std::size_t k = 0; k < tensor.num_roles(); ++k) {
    add_inplace(motif_term, spmm(tensor.roles[k], gemm(x, params.weights[k + 1])));
  }
  const auto inv = inverse_counts(tensor);
  DenseMatrix pre = gemm(x, params.weights[0]);
  add_inplace(pre, row_scale(inv, motif_term));

  DenseMatrix out = map_elementwise([activation](double v) { return apply(activation, v); }, pre);
  if (tape != nullptr) tape->pre_activation = std::move(pre);
  return out;
}

ConvUnitGradients conv_unit_backward(const DenseMatrix& x, const MotifTensor& tensor, const ConvUnitParams& params,
                                     Activation activation, const ConvUnitTape& tape, const DenseMatrix& grad_output,
                                     bool want_input_grad) {
  check_conv_shapes(x, tensor, params);
  if (!tape.pre_activation.same_shape(grad_output) || grad_output.rows() != x.rows()) {
    throw ShapeError("conv unit backward: tape does not match the gradient");
  }

  DenseMatrix g = grad_output;
  if (activation == Activation::ReLU) {
    auto gv = g.values();
    const auto pv = tape.pre_activation.values();
    for (std::size_t i = 0; i < gv.size(); ++i) {
      if (!(pv[i] > 0.0)) gv[i] = 0.0;
    }
  }

  ConvUnitGradients grads;
  grads.weights.push_back(gemm_tn(x, g));
  const DenseMatrix scaled = row_scale(inverse_counts(tensor), g);
  if (want_input_grad) grads.input = gemm_nt(g, params.weights[0]);
  for (std::size_t k = 0; k < tensor.num_roles(); ++k) {
    const DenseMatrix back = spmm_transposed(tensor.roles[k], scaled);
    grads.weights.push_back(gemm_tn(x, back));
    if (want_input_grad) add_inplace(grads.input, gemm_nt(back, params.weights[k + 1]));
  }
  return grads;
}

DenseMatrix reference_instance_conv(std::size_t num_nodes, const Motif& motif,
                                    std::span<const MotifInstance> instances, const ConvUnitParams& params,
                                    const DenseMatrix& x, Activation activation) {
  if (params.num_roles() != motif.num_roles() || x.rows() != num_nodes) {
    throw ShapeError("reference conv: parameters or features do not match the motif/graph");
  }
  const std::size_t f = params.filters();
  const std::size_t d = params.input_dim();

  // Sum of per-instance responses W_role^T x over non-target positions.
  DenseMatrix pooled(num_nodes, f);
  std::vector<std::size_t> count(num_nodes, 0);
  for (const auto& inst : instances) {
    ++count[inst.target];
    for (Position p = 0; p < motif.size(); ++p) {
      if (p == motif.target()) continue;
      const DenseMatrix& w = params.weights[motif.role(p)];
      const auto xv = x.row(inst.mapping[p]);
      for (std::size_t c = 0; c < f; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < d; ++r) s += w(r, c) * xv[r];
        pooled(inst.target, c) += s;
      }
    }
  }

  DenseMatrix out(num_nodes, f);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t c = 0; c < f; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < d; ++r) s += params.weights[0](r, c) * x(i, r);
      if (count[i] > 0) s += pooled(i, c) / static_cast<double>(count[i]);
      out(i, c) = apply(activation, s);
    }
  }
  return out;
}

AttentionResult attention_combine(std::span<const DenseMatrix> unit_outputs, const DenseMatrix& z) {
  const std::size_t u = unit_outputs.size();
  if (u == 0) throw ShapeError("attention needs at least one unit output");
  const std::size_t n = unit_outputs[0].rows();
  const std::size_t f = unit_outputs[0].cols();
  for (const auto& h : unit_outputs) {
    if (h.rows() != n || h.cols() != f) throw ShapeError("attention inputs differ in shape");
  }
  if (z.rows() != u || z.cols() != f) throw ShapeError("attention vectors must be U x F");

  const double scale = 1.0 / std::sqrt(static_cast<double>(f));
  AttentionResult r{DenseMatrix(n, f), DenseMatrix(n, u), DenseMatrix(n, u)};
  for (std::size_t i = 0; i < n; ++i) {
    double top = -INFINITY;
    for (std::size_t k = 0; k < u; ++k) {
      double e = 0.0;
      const auto h = unit_outputs[k].row(i);
      const auto zk = z.row(k);
      for (std::size_t c = 0; c < f; ++c) e += zk[c] * h[c];
      e *= scale;
      r.scores(i, k) = e;
      top = std::max(top, e);
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < u; ++k) {
      r.coefficients(i, k) = std::exp(r.scores(i, k) - top);
      norm += r.coefficients(i, k);
    }
    for (std::size_t k = 0; k < u; ++k) r.coefficients(i, k) /= norm;

    auto dst = r.output.row(i);
    for (std::size_t k = 0; k < u; ++k) {
      const double a = r.coefficients(i, k);
      const auto h = unit_outputs[k].row(i);
      for (std::size_t c = 0; c < f; ++c) dst[c] += a * h[c];
    }
  }
  return r;
}

AttentionGradients attention_backward(std::span<const DenseMatrix> unit_outputs, const DenseMatrix& z,
                                      const AttentionResult& forward, const DenseMatrix& grad_output) {
  const std::size_t u = unit_outputs.size();
  const std::size_t n = forward.output.rows();
  const std::size_t f = forward.output.cols();
  if (!grad_output.same_shape(forward.output)) throw ShapeError("attention backward: gradient shape mismatch");
  const double scale = 1.0 / std::sqrt(static_cast<double>(f));

  AttentionGradients g;
  g.z = DenseMatrix(u, f);
  for (std::size_t k = 0; k < u; ++k) g.unit_outputs.emplace_back(n, f);

  std::vector<double> d_alpha(u);
  std::vector<double> d_score(u);
  for (std::size_t i = 0; i < n; ++i) {
    const auto go = grad_output.row(i);
    double weighted = 0.0;
    for (std::size_t k = 0; k < u; ++k) {
      const auto h = unit_outputs[k].row(i);
      double s = 0.0;
      for (std::size_t c = 0; c < f; ++c) s += go[c] * h[c];
      d_alpha[k] = s;
      weighted += forward.coefficients(i, k) * s;
    }
    for (std::size_t k = 0; k < u; ++k) d_score[k] = forward.coefficients(i, k) * (d_alpha[k] - weighted);

    for (std::size_t k = 0; k < u; ++k) {
      const double a = forward.coefficients(i, k);
      const double ds = d_score[k] * scale;
      const auto h = unit_outputs[k].row(i);
      const auto zk = z.row(k);
      auto dh = g.unit_outputs[k].row(i);
      auto dz = g.z.row(k);
      for (std::size_t c = 0; c < f; ++c) {
        dh[c] = a * go[c] + ds * zk[c];
        dz[c] += ds * h[c];
      }
    }
  }
  return g;
}

// --- Losses -----------------------------------------------------------------

namespace {

std::vector<NodeId> masked_rows(const DenseMatrix& logits, const LabelSet& labels, Split split) {
  if (logits.cols() != labels.labels.num_classes) throw ShapeError("logit width differs from the class count");
  std::vector<NodeId> rows;
  for (NodeId v = 0; v < logits.rows(); ++v) {
    if (labels.split_of(v) == split) rows.push_back(v);
  }
  if (rows.empty()) throw ValidationError("loss over an empty split");
  return rows;
}

}  // namespace

LossResult softmax_cross_entropy(const DenseMatrix& logits, const LabelSet& labels, Split split) {
  if (labels.labels.task != Task::MultiClass) throw ValidationError("softmax cross-entropy needs a multiclass task");
  LossResult r{0.0, DenseMatrix(logits.rows(), logits.cols())};
  for (const NodeId v : masked_rows(logits, labels, split)) {
    const auto z = logits.row(v);
    const double top = *std::max_element(z.begin(), z.end());
    double norm = 0.0;
    for (const double zi : z) norm += std::exp(zi - top);
    const double log_norm = top + std::log(norm);
    const std::uint32_t y = labels.labels.classes.at(v).at(0);
    r.loss += log_norm - z[y];
    auto g = r.gradient.row(v);
    for (std::size_t c = 0; c < z.size(); ++c) g[c] = std::exp(z[c] - log_norm);
    g[y] -= 1.0;
  }
  return r;
}

LossResult binary_cross_entropy(const DenseMatrix& logits, const LabelSet& labels, Split split) {
  if (labels.labels.task != Task::MultiLabel) throw ValidationError("binary cross-entropy needs a multilabel task");
  LossResult r{0.0, DenseMatrix(logits.rows(), logits.cols())};
  for (const NodeId v : masked_rows(logits, labels, split)) {
    const auto& positives = labels.labels.classes.at(v);
    const auto z = logits.row(v);
    auto g = r.gradient.row(v);
    for (std::size_t c = 0; c < z.size(); ++c) {
      const double y = std::binary_search(positives.begin(), positives.end(), c) ? 1.0 : 0.0;
      r.loss += std::max(z[c], 0.0) - z[c] * y + std::log1p(std::exp(-std::abs(z[c])));
      const double sig = z[c] >= 0.0 ? 1.0 / (1.0 + std::exp(-z[c])) : std::exp(z[c]) / (1.0 + std::exp(z[c]));
      g[c] = sig - y;
    }
  }
  return r;
}

LossResult task_loss(const DenseMatrix& logits, const LabelSet& labels, Split split) {
  return labels.labels.task == Task::MultiClass ? softmax_cross_entropy(logits, labels, split)
                                                : binary_cross_entropy(logits, labels, split);
}

// --- Initialization and dropout --------------------------------------------

DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return glorot_uniform(rows, cols, rng);
}

DropoutResult dropout(const DenseMatrix& input, double rate, std::mt19937_64& rng, Mode mode) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  if (mode == Mode::Eval || rate == 0.0) return {input, {}};
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  DropoutResult r{DenseMatrix(input.rows(), input.cols()), DenseMatrix(input.rows(), input.cols())};
  auto out = r.output.values();
  auto mask = r.mask.values();
  const auto in = input.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    mask[i] = keep(rng) ? scale : 0.0;
    out[i] = in[i] * mask[i];
  }
  return r;
}

DropoutResult dropout(const DenseMatrix& input, double rate, std::uint64_t seed, Mode mode) {
  std::mt19937_64 rng(seed);
  return dropout(input, rate, rng, mode);
}

}  // namespace motifcnn
