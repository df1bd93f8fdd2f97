#include "motifcnn/optim.hpp"

#include <cmath>
#include <vector>

#include "motifcnn/errors.hpp"

namespace motifcnn {

namespace {

std::vector<DenseMatrix*> flatten(ModelParams& p) {
  std::vector<DenseMatrix*> out;
  for_each_parameter(p, [&](const std::string&, DenseMatrix& m) { out.push_back(&m); });
  return out;
}

std::vector<const DenseMatrix*> flatten(const ModelParams& p) {
  std::vector<const DenseMatrix*> out;
  for_each_parameter(p, [&](const std::string&, const DenseMatrix& m) { out.push_back(&m); });
  return out;
}

}  // namespace

AdamState adam_init(const ModelParams& params) { return {zeros_like(params), zeros_like(params), 0}; }

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                 const AdamConfig& config, std::uint64_t t) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw ShapeError("adam: block sizes differ");
  }
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, const AdamConfig& config) {
  auto p = flatten(params);
  auto g = flatten(grads);
  auto m = flatten(state.m);
  auto v = flatten(state.v);
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw ShapeError("adam: parameter structure differs");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p[i]->same_shape(*g[i]) || !p[i]->same_shape(*m[i]) || !p[i]->same_shape(*v[i])) {
      throw ShapeError("adam: parameter shapes differ");
    }
  }
  ++state.step;
  for (std::size_t i = 0; i < p.size(); ++i) {
    adam_update(p[i]->values(), g[i]->values(), m[i]->values(), v[i]->values(), config, state.step);
  }
}

}  // namespace motifcnn
