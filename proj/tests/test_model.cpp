#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "motifcnn/checkpoint.hpp"
#include "motifcnn/errors.hpp"
#include "motifcnn/gradcheck.hpp"
#include "motifcnn/model.hpp"
#include "motifcnn/optim.hpp"
#include "motifcnn/synth.hpp"
#include "test_util.hpp"

using namespace motifcnn;
using testutil::random_dense;

namespace {

struct Fixture {
  HeteroGraph graph;
  std::vector<Motif> motifs;
  std::vector<MotifTensor> tensors;
  DenseMatrix x;
  Model model;
};

Fixture make_fixture(std::size_t n, std::size_t layers, std::uint64_t seed, double dropout = 0.0) {
  Fixture f;
  f.graph = random_typed_graph(n, 0.3, 1, 0.3, seed);
  f.motifs = {compute_role_map(edge_motif()), compute_role_map(triangle_motif())};
  for (const auto& m : f.motifs) f.tensors.push_back(build_motif_tensor(f.graph, m));
  std::mt19937_64 rng(seed);
  f.x = random_dense(n, 5, rng);
  ModelConfig mc;
  mc.input_dim = 5;
  mc.filters = 4;
  mc.num_classes = 3;
  mc.num_layers = layers;
  mc.motif_roles = {1, 1};
  mc.dropout = dropout;
  f.model = init_model(mc, seed);
  return f;
}

}  // namespace

TEST(Model, InitShapesChain) {
  const Fixture f = make_fixture(10, 3, 1);
  ASSERT_EQ(f.model.params.layers.size(), 3u);
  EXPECT_EQ(f.model.params.layers[0].units[0].input_dim(), 5u);
  EXPECT_EQ(f.model.params.layers[1].units[1].input_dim(), 4u);
  EXPECT_EQ(f.model.params.layers[2].attention.rows(), 2u);
  EXPECT_EQ(f.model.params.classifier.rows(), 4u);
  EXPECT_EQ(f.model.params.bias, DenseMatrix(1, 3));
  std::vector<std::string> names;
  for_each_parameter(f.model.params, [&](const std::string& n, const DenseMatrix&) { names.push_back(n); });
  EXPECT_EQ(names.front(), "layer0.unit0.w0");
  EXPECT_EQ(names.back(), "classifier.bias");
  EXPECT_EQ(names.size(), 3u * 5u + 2u);
}

TEST(Model, SingleLayerSingleMotifIsConvPlusClassifier) {
  const HeteroGraph g = erdos_renyi_gnp(9, 0.4, 2);
  const std::vector<MotifTensor> t{build_motif_tensor(g, compute_role_map(edge_motif()))};
  std::mt19937_64 rng(2);
  const DenseMatrix x = random_dense(9, 3, rng);
  ModelConfig mc{3, 4, 2, 1, {1}, 0.0};
  Model m = init_model(mc, 2);
  m.params.bias(0, 1) = 0.25;
  const DenseMatrix h = conv_unit_forward(x, t[0], m.params.layers[0].units[0], Activation::ReLU);
  DenseMatrix expect = gemm(h, m.params.classifier);
  for (std::size_t i = 0; i < 9; ++i) expect(i, 1) += 0.25;
  EXPECT_EQ(model_forward(m, x, t, Mode::Eval).logits, expect);
}

TEST(Model, EvalIsDeterministicAndTrainUsesDropout) {
  const Fixture f = make_fixture(12, 2, 3, 0.5);
  const auto a = model_forward(f.model, f.x, f.tensors, Mode::Eval).logits;
  EXPECT_EQ(model_forward(f.model, f.x, f.tensors, Mode::Eval).logits, a);
  std::mt19937_64 rng(1);
  EXPECT_NE(model_forward(f.model, f.x, f.tensors, Mode::Train, &rng).logits, a);
  EXPECT_THROW(model_forward(f.model, f.x, f.tensors, Mode::Train), std::invalid_argument);
}

TEST(Model, ShapeErrors) {
  const Fixture f = make_fixture(10, 2, 4);
  EXPECT_THROW(model_forward(f.model, DenseMatrix(10, 4), f.tensors, Mode::Eval), ShapeError);
  EXPECT_THROW(model_forward(f.model, f.x, std::span(f.tensors).first(1), Mode::Eval), ShapeError);
  const auto fwd = model_forward(f.model, f.x, f.tensors, Mode::Eval);
  EXPECT_THROW(model_backward(f.model, f.tensors, fwd.tape, DenseMatrix(10, 2)), ShapeError);
  Model deeper = make_fixture(10, 3, 4).model;
  EXPECT_THROW(model_backward(deeper, f.tensors, fwd.tape, DenseMatrix(10, 3)), ShapeError);
}

TEST(Gradcheck, AllGroupsBothLossesOneToThreeLayers) {
  for (const Task task : {Task::MultiClass, Task::MultiLabel}) {
    for (std::size_t layers = 1; layers <= 3; ++layers) {
      for (std::uint64_t seed = 1; seed <= 2; ++seed) {
        const GradcheckReport r = gradcheck_random_case(task, layers, seed);
        EXPECT_EQ(r.groups.size(), layers * 5 + 2);
        for (const auto& g : r.groups) EXPECT_LT(g.relative_error, 1e-5) << g.name << " layers=" << layers;
      }
    }
  }
}

TEST(Gradcheck, WithDropoutMaskMatchesFiniteDifferences) {
  // A fixed mask makes the train-mode forward a deterministic function.
  Fixture f = make_fixture(12, 2, 7, 0.3);
  std::mt19937_64 labels_rng(7);
  LabelSet l;
  l.labels.num_classes = 3;
  l.split.assign(12, Split::Train);
  for (NodeId v = 0; v < 12; ++v) l.labels.classes[v] = {static_cast<std::uint32_t>(labels_rng() % 3)};

  auto loss_at = [&](const Model& m) {
    std::mt19937_64 rng(99);
    return task_loss(model_forward(m, f.x, f.tensors, Mode::Train, &rng).logits, l, Split::Train).loss;
  };
  std::mt19937_64 rng(99);
  const auto fwd = model_forward(f.model, f.x, f.tensors, Mode::Train, &rng);
  const auto grads = model_backward(f.model, f.tensors, fwd.tape, task_loss(fwd.logits, l, Split::Train).gradient);
  std::vector<const DenseMatrix*> analytic;
  for_each_parameter(grads, [&](const std::string&, const DenseMatrix& g) { analytic.push_back(&g); });
  Model probe = f.model;
  std::size_t idx = 0;
  for_each_parameter(probe.params, [&](const std::string& name, DenseMatrix& p) {
    const auto a = analytic[idx++]->values();
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double s = p.values()[i];
      p.values()[i] = s + 1e-6;
      const double up = loss_at(probe);
      p.values()[i] = s - 1e-6;
      const double down = loss_at(probe);
      p.values()[i] = s;
      const double num = (up - down) / 2e-6;
      diff = std::max(diff, std::abs(num - a[i]));
      scale = std::max({scale, std::abs(num), std::abs(a[i])});
    }
    EXPECT_LT(diff, 1e-5 * std::max(scale, 1e-12)) << name;
  });
}

TEST(Model, PermutationEquivariance) {
  const Fixture f = make_fixture(20, 3, 9);
  std::vector<NodeId> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(9));
  std::vector<Edge> edges;
  for (const auto& e : f.graph.edges()) edges.push_back({perm[e.src], perm[e.dst], e.directed});
  const HeteroGraph pg(f.graph.types(), std::vector<NodeTypeId>(20), edges);
  std::vector<MotifTensor> pt;
  for (const auto& m : f.motifs) pt.push_back(build_motif_tensor(pg, m));
  DenseMatrix px(20, 5);
  for (NodeId v = 0; v < 20; ++v)
    for (std::size_t c = 0; c < 5; ++c) px(perm[v], c) = f.x(v, c);
  const auto a = model_forward(f.model, f.x, f.tensors, Mode::Eval).logits;
  const auto b = model_forward(f.model, px, pt, Mode::Eval).logits;
  double worst = 0.0;
  for (NodeId v = 0; v < 20; ++v)
    for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::abs(a(v, c) - b(perm[v], c)));
  EXPECT_LT(worst, 1e-10);
}

TEST(Model, GcnFormWithEdgeMotif) {
  const HeteroGraph g = erdos_renyi_gnp(15, 0.3, 11);
  const MotifTensor t = build_motif_tensor(g, compute_role_map(edge_motif()));
  std::mt19937_64 rng(11);
  const DenseMatrix x = random_dense(15, 4, rng);
  const ConvUnitParams p{{random_dense(4, 3, rng), random_dense(4, 3, rng)}};
  const DenseMatrix h = conv_unit_forward(x, t, p, Activation::ReLU);
  // relu(X W0 + D^-1 A X W1), same operation order as the layer.
  const DenseMatrix xw0 = gemm(x, p.weights[0]);
  const DenseMatrix axw1 = spmm(t.roles[0], gemm(x, p.weights[1]));
  for (NodeId i = 0; i < 15; ++i) {
    const double d = static_cast<double>(g.degree(i));
    for (std::size_t c = 0; c < 3; ++c) {
      const double pre = xw0(i, c) + (d == 0 ? 0.0 : (1.0 / d) * axw1(i, c));
      EXPECT_EQ(h(i, c), std::max(pre, 0.0));
    }
  }
}

// --- Adam ----------------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParameters) {
  Model m = make_fixture(8, 1, 12).model;
  const ModelParams before = m.params;
  AdamState s = adam_init(m.params);
  adam_step(m.params, zeros_like(m.params), s, {0.1});
  EXPECT_EQ(m.params, before);
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, FirstStepIsLearningRateTimesSign) {
  // t=1: m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps).
  std::vector<double> p{1.0, 1.0, 1.0}, m(3), v(3);
  const std::vector<double> g{0.5, -2.0, 1e-3};
  adam_update(p, g, m, v, {0.01}, 1);
  EXPECT_NEAR(p[0], 1.0 - 0.01 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(p[1], 1.0 + 0.01 * 2.0 / (2.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p[2], 1.0 - 0.01 * 1e-3 / (1e-3 + 1e-8), 1e-15);
}

TEST(Adam, RepeatedRunsAgreeAndShapesAreChecked) {
  Model a = make_fixture(8, 2, 13).model;
  Model b = a;
  ModelParams g = zeros_like(a.params);
  for_each_parameter(g, [](const std::string&, DenseMatrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = std::sin(static_cast<double>(i));
  });
  AdamState sa = adam_init(a.params), sb = adam_init(b.params);
  for (int i = 0; i < 2; ++i) {
    adam_step(a.params, g, sa, {});
    adam_step(b.params, g, sb, {});
  }
  EXPECT_EQ(a.params, b.params);
  const ModelParams other = make_fixture(8, 1, 13).model.params;
  EXPECT_THROW(adam_step(a.params, other, sa, {}), ShapeError);
}

// --- Checkpoint ----------------------------------------------------------------

TEST(Checkpoint, RoundTripIsBitExact) {
  Checkpoint c;
  c.model = make_fixture(10, 3, 14, 0.25).model;
  c.model.params.bias(0, 2) = -0.0;
  c.model.params.classifier(0, 0) = 1e-310;  // subnormal
  c.task = Task::MultiLabel;
  c.motif_hash = 0xdeadbeefcafef00dULL;
  c.config.learning_rate = 0.1 / 3;
  c.config.seed = 77;
  std::ostringstream out;
  write_checkpoint(out, c);
  std::istringstream in(out.str());
  const Checkpoint back = read_checkpoint(in);
  EXPECT_EQ(back, c);
  EXPECT_TRUE(std::signbit(back.model.params.bias(0, 2)));
  std::ostringstream again;
  write_checkpoint(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Checkpoint, CorruptInputIsRejected) {
  Checkpoint c;
  c.model = make_fixture(6, 1, 15).model;
  std::ostringstream out;
  write_checkpoint(out, c);
  std::string text = out.str();
  {
    std::istringstream in(text.substr(0, text.size() / 2));
    EXPECT_THROW(read_checkpoint(in), ParseError);
  }
  {
    std::string bad = text;
    bad.replace(bad.find("filters 4"), 9, "filters 5");
    std::istringstream in(bad);
    EXPECT_THROW(read_checkpoint(in), ParseError);
  }
  {
    std::istringstream in("not a checkpoint\n");
    EXPECT_THROW(read_checkpoint(in), ParseError);
  }
}

TEST(Checkpoint, MotifHashDependsOnListAndOrder) {
  const TypeRegistry types({"node"});
  const std::vector<Motif> ab{compute_role_map(edge_motif()), compute_role_map(triangle_motif())};
  const std::vector<Motif> ba{ab[1], ab[0]};
  EXPECT_EQ(motif_list_hash(ab, types), motif_list_hash(ab, types));
  EXPECT_NE(motif_list_hash(ab, types), motif_list_hash(ba, types));
  EXPECT_NE(motif_list_hash(ab, types), motif_list_hash(std::span(ab).first(1), types));
}
