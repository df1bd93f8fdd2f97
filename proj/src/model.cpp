#include "motifcnn/model.hpp"

#include <stdexcept>

#include "motifcnn/errors.hpp"

namespace motifcnn {

namespace {

template <typename Params, typename Fn>
void visit(Params& params, Fn&& fn) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    for (std::size_t u = 0; u < layer.units.size(); ++u) {
      for (std::size_t k = 0; k < layer.units[u].weights.size(); ++k) {
        fn(prefix + "unit" + std::to_string(u) + ".w" + std::to_string(k), layer.units[u].weights[k]);
      }
    }
    fn(prefix + "attention", layer.attention);
  }
  fn(std::string("classifier.weight"), params.classifier);
  fn(std::string("classifier.bias"), params.bias);
}

}  // namespace

void for_each_parameter(ModelParams& params, const std::function<void(const std::string&, DenseMatrix&)>& fn) {
  visit(params, fn);
}

void for_each_parameter(const ModelParams& params,
                        const std::function<void(const std::string&, const DenseMatrix&)>& fn) {
  visit(params, fn);
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  for_each_parameter(z, [](const std::string&, DenseMatrix& m) { m = DenseMatrix(m.rows(), m.cols()); });
  return z;
}

Model init_model(const ModelConfig& config, std::uint64_t seed) {
  if (config.input_dim == 0 || config.filters == 0 || config.num_classes == 0 || config.num_layers == 0 ||
      config.motif_roles.empty()) {
    throw std::invalid_argument("model config needs positive sizes and at least one motif");
  }
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");

  std::mt19937_64 rng(seed);
  Model m{config, {}};
  std::size_t in = config.input_dim;
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    LayerParams layer;
    for (const std::size_t roles : config.motif_roles) {
      ConvUnitParams unit;
      for (std::size_t k = 0; k <= roles; ++k) unit.weights.push_back(glorot_uniform(in, config.filters, rng));
      layer.units.push_back(std::move(unit));
    }
    layer.attention = glorot_uniform(config.motif_roles.size(), config.filters, rng);
    m.params.layers.push_back(std::move(layer));
    in = config.filters;
  }
  m.params.classifier = glorot_uniform(config.filters, config.num_classes, rng);
  m.params.bias = DenseMatrix(1, config.num_classes);
  return m;
}

ForwardResult model_forward(const Model& model, const DenseMatrix& features, std::span<const MotifTensor> tensors,
                            Mode mode, std::mt19937_64* rng) {
  const ModelConfig& cfg = model.config;
  if (tensors.size() != cfg.motif_roles.size()) throw ShapeError("model expects one tensor per motif");
  if (features.cols() != cfg.input_dim) throw ShapeError("feature width differs from the model input width");
  if (mode == Mode::Train && cfg.dropout > 0.0 && rng == nullptr) {
    throw std::invalid_argument("train-mode dropout needs a random generator");
  }

  ForwardResult r;
  DenseMatrix h = features;
  for (const LayerParams& layer : model.params.layers) {
    LayerTape lt;
    if (mode == Mode::Train && cfg.dropout > 0.0) {
      auto d = dropout(h, cfg.dropout, *rng, mode);
      lt.input = std::move(d.output);
      lt.dropout_mask = std::move(d.mask);
    } else {
      lt.input = std::move(h);
    }
    lt.units.resize(layer.units.size());
    for (std::size_t u = 0; u < layer.units.size(); ++u) {
      lt.unit_outputs.push_back(
          conv_unit_forward(lt.input, tensors[u], layer.units[u], Activation::ReLU, &lt.units[u]));
    }
    lt.attention = attention_combine(lt.unit_outputs, layer.attention);
    h = lt.attention.output;
    r.tape.layers.push_back(std::move(lt));
  }

  r.logits = gemm(h, model.params.classifier);
  for (std::size_t i = 0; i < r.logits.rows(); ++i) {
    auto row = r.logits.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += model.params.bias(0, c);
  }
  return r;
}

ModelParams model_backward(const Model& model, std::span<const MotifTensor> tensors, const ForwardTape& tape,
                           const DenseMatrix& grad_logits) {
  if (tape.layers.size() != model.params.layers.size()) throw ShapeError("stale forward tape");
  ModelParams grads = zeros_like(model.params);

  const DenseMatrix& last = tape.layers.back().attention.output;
  if (grad_logits.rows() != last.rows() || grad_logits.cols() != model.config.num_classes) {
    throw ShapeError("logit gradient shape mismatch");
  }
  grads.classifier = gemm_tn(last, grad_logits);
  for (std::size_t i = 0; i < grad_logits.rows(); ++i) {
    for (std::size_t c = 0; c < grad_logits.cols(); ++c) grads.bias(0, c) += grad_logits(i, c);
  }
  DenseMatrix g = gemm_nt(grad_logits, model.params.classifier);

  for (std::size_t l = tape.layers.size(); l-- > 0;) {
    const LayerTape& lt = tape.layers[l];
    const LayerParams& layer = model.params.layers[l];
    auto att = attention_backward(lt.unit_outputs, layer.attention, lt.attention, g);
    grads.layers[l].attention = std::move(att.z);

    const bool need_input = l > 0;
    DenseMatrix g_input(lt.input.rows(), lt.input.cols());
    for (std::size_t u = 0; u < layer.units.size(); ++u) {
      auto cg = conv_unit_backward(lt.input, tensors[u], layer.units[u], Activation::ReLU, lt.units[u],
                                   att.unit_outputs[u], need_input);
      grads.layers[l].units[u].weights = std::move(cg.weights);
      if (need_input) add_inplace(g_input, cg.input);
    }
    if (!need_input) break;
    if (!lt.dropout_mask.values().empty()) {
      auto gv = g_input.values();
      const auto mv = lt.dropout_mask.values();
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= mv[i];
    }
    g = std::move(g_input);
  }
  return grads;
}

}  // namespace motifcnn
