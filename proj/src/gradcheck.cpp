#include "motifcnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "motifcnn/layers.hpp"
#include "motifcnn/synth.hpp"

namespace motifcnn {

double GradcheckReport::max_relative_error() const {
  double worst = 0.0;
  for (const auto& g : groups) worst = std::max(worst, g.relative_error);
  return worst;
}

GradcheckReport gradcheck(const Model& model, const DenseMatrix& features, std::span<const MotifTensor> tensors,
                          const LabelSet& labels, double epsilon) {
  auto loss_at = [&](const Model& m) {
    return task_loss(model_forward(m, features, tensors, Mode::Eval).logits, labels, Split::Train).loss;
  };
  const auto fwd = model_forward(model, features, tensors, Mode::Eval);
  const auto loss = task_loss(fwd.logits, labels, Split::Train);
  const ModelParams analytic = model_backward(model, tensors, fwd.tape, loss.gradient);

  std::vector<const DenseMatrix*> grads;
  for_each_parameter(analytic, [&](const std::string&, const DenseMatrix& g) { grads.push_back(&g); });

  GradcheckReport report;
  Model probe = model;
  std::size_t index = 0;
  for_each_parameter(probe.params, [&](const std::string& name, DenseMatrix& param) {
    const auto a = grads[index++]->values();
    auto p = param.values();
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + epsilon;
      const double up = loss_at(probe);
      p[i] = saved - epsilon;
      const double down = loss_at(probe);
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      diff = std::max(diff, std::abs(a[i] - numeric));
      scale = std::max({scale, std::abs(a[i]), std::abs(numeric)});
    }
    report.groups.push_back({name, p.size(), diff, scale == 0.0 ? 0.0 : diff / scale});
  });
  return report;
}

GradcheckReport gradcheck_random_case(Task task, std::size_t layers, std::uint64_t seed, std::size_t nodes,
                                      double epsilon) {
  const HeteroGraph graph = erdos_renyi_gnp(nodes, 0.35, seed, 0.3);
  const std::vector<Motif> motifs{compute_role_map(edge_motif()), compute_role_map(triangle_motif())};
  std::vector<MotifTensor> tensors;
  for (const Motif& m : motifs) tensors.push_back(build_motif_tensor(graph, m));

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix x(nodes, 4);
  for (double& v : x.values()) v = gauss(rng);

  constexpr std::size_t kClasses = 3;
  LabelSet labels;
  labels.labels.task = task;
  labels.labels.num_classes = kClasses;
  labels.split.assign(nodes, Split::Train);
  std::uniform_int_distribution<std::uint32_t> pick(0, kClasses - 1);
  for (NodeId v = 0; v < nodes; ++v) {
    std::vector<std::uint32_t> cls;
    if (task == Task::MultiClass) {
      cls.push_back(pick(rng));
    } else {
      for (std::uint32_t c = 0; c < kClasses; ++c) {
        if (pick(rng) == 0) cls.push_back(c);
      }
    }
    labels.labels.classes[v] = cls;
  }

  ModelConfig mc;
  mc.input_dim = x.cols();
  mc.filters = 4;
  mc.num_classes = kClasses;
  mc.num_layers = layers;
  for (const Motif& m : motifs) mc.motif_roles.push_back(m.num_roles());
  const Model model = init_model(mc, seed);
  return gradcheck(model, x, tensors, labels, epsilon);
}

}  // namespace motifcnn
