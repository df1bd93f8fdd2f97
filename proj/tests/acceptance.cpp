// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <tuple>

#include "motif_catalog.hpp"
#include "motifcnn/checkpoint.hpp"
#include "motifcnn/gradcheck.hpp"
#include "motifcnn/layers.hpp"
#include "motifcnn/parallel.hpp"
#include "motifcnn/synth.hpp"
#include "motifcnn/training.hpp"
#include "test_util.hpp"

using namespace motifcnn;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// 50 graphs, N <= 30, one to three node types, undirected to fully directed.
std::vector<HeteroGraph> oracle_graphs() {
  std::vector<HeteroGraph> gs;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> p(0.12, 0.4);
  for (std::size_t i = 0; i < 50; ++i) {
    const std::size_t n = 8 + i % 23;
    const std::size_t types = 1 + i % 3;
    const double directed = static_cast<double>(i % 5) / 4.0;
    gs.push_back(random_typed_graph(n, p(rng), types, directed, 1000 + i));
  }
  return gs;
}

Outcome enumeration_oracle() {
  const auto start = Clock::now();
  std::size_t cases = 0, mismatches = 0, instances = 0;
  for (const HeteroGraph& g : oracle_graphs()) {
    for (const auto& p : testutil::small_motifs(g.types().size())) {
      const Motif m = compute_role_map(p);
      const auto fast = enumerate_instances(g, m);
      const auto slow = brute_force_instances(g, m);
      ++cases;
      instances += slow.size();
      if (fast != slow) ++mismatches;
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 10.0,
          fmt("%zu graph/motif pairs, %zu instances, %zu mismatches, %.2f s (limit 10 s)", cases, instances,
              mismatches, secs)};
}

Outcome tensor_formula() {
  std::size_t cases = 0, bad = 0;
  for (const HeteroGraph& g : oracle_graphs()) {
    for (const auto& p : testutil::small_motifs(g.types().size())) {
      const Motif m = compute_role_map(p);
      const MotifTensor t = build_motif_tensor(g, m);
      std::map<std::tuple<std::uint32_t, NodeId, NodeId>, std::int64_t> a;
      std::vector<std::int64_t> d(g.num_nodes(), 0);
      for (const auto& inst : brute_force_instances(g, m)) {
        d[inst.target]++;
        for (Position x = 0; x < m.size(); ++x)
          if (x != m.target()) a[{m.role(x), inst.target, inst.mapping[x]}]++;
      }
      bool ok = t.instance_counts == d && t.num_roles() == m.num_roles();
      std::size_t nnz = 0;
      for (const auto& r : t.roles) nnz += r.nnz();
      ok = ok && nnz == a.size();
      for (const auto& [key, count] : a) {
        const auto [k, i, j] = key;
        ok = ok && t.roles[k - 1].at(i, j) == static_cast<double>(count);
      }
      for (NodeId i = 0; ok && i < g.num_nodes(); ++i) {
        std::int64_t sum = 0;
        for (const auto& r : t.roles)
          for (const double v : r.row_values(i)) sum += static_cast<std::int64_t>(v);
        ok = sum == d[i] * static_cast<std::int64_t>(m.size() - 1);
      }
      ++cases;
      bad += !ok;
    }
  }
  return {bad == 0, fmt("%zu tensors checked against oracle counts, %zu mismatches", cases, bad)};
}

Outcome conv_equivalence() {
  const auto motifs = testutil::small_motifs(2);
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (std::size_t trial = 0; trial < 20; ++trial) {
    const HeteroGraph g = random_typed_graph(10 + trial, 0.3, 1 + trial % 2, 0.3, 500 + trial);
    const Motif m = compute_role_map(motifs[(trial * 11) % motifs.size()]);
    ConvUnitParams p;
    for (std::size_t k = 0; k <= m.num_roles(); ++k) p.weights.push_back(testutil::random_dense(6, 5, rng));
    const DenseMatrix x = testutil::random_dense(g.num_nodes(), 6, rng);
    const auto inst = enumerate_instances(g, m);
    const DenseMatrix a = conv_unit_forward(x, build_motif_tensor(g, m), p, Activation::ReLU);
    const DenseMatrix b = reference_instance_conv(g.num_nodes(), m, inst, p, x, Activation::ReLU);
    worst = std::max(worst, max_abs_difference(a, b));
  }
  return {worst < 1e-10, fmt("20 triples, max |tensor - instance| = %.3e (limit 1e-10)", worst)};
}

Outcome gradient_exactness() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t groups = 0;
  for (const Task task : {Task::MultiClass, Task::MultiLabel}) {
    const GradcheckReport r = gradcheck_random_case(task, 3, 1, 15);
    worst = std::max(worst, r.max_relative_error());
    groups += r.groups.size();
  }
  const double secs = seconds_since(start);
  return {worst < 1e-5 && secs < 60.0,
          fmt("%zu groups over both heads, max relative error %.3e (limit 1e-5), %.2f s", groups, worst, secs)};
}

Outcome gcn_reduction() {
  const HeteroGraph g = erdos_renyi_gnp(40, 0.15, 8);
  const MotifTensor t = build_motif_tensor(g, compute_role_map(edge_motif()));
  std::mt19937_64 rng(8);
  const DenseMatrix x = testutil::random_dense(40, 6, rng);
  const ConvUnitParams p{{testutil::random_dense(6, 4, rng), testutil::random_dense(6, 4, rng)}};
  const DenseMatrix h = conv_unit_forward(x, t, p, Activation::ReLU);
  // relu(X W0 + D^-1 A X W1) evaluated from the graph's own adjacency.
  std::vector<Triplet> adj;
  for (NodeId i = 0; i < 40; ++i)
    for (const NodeId j : g.neighbors(i)) adj.push_back({i, j, 1.0});
  const DenseMatrix axw1 = spmm(SparseMatrix::from_triplets(40, 40, adj), gemm(x, p.weights[1]));
  const DenseMatrix xw0 = gemm(x, p.weights[0]);
  std::size_t differing = 0;
  for (NodeId i = 0; i < 40; ++i) {
    const double d = static_cast<double>(g.degree(i));
    for (std::size_t c = 0; c < 4; ++c) {
      const double direct = std::max(xw0(i, c) + (d > 0 ? (1.0 / d) * axw1(i, c) : 0.0), 0.0);
      differing += h(i, c) != direct;
    }
  }
  return {differing == 0, fmt("%zu of 160 entries differ from the direct formula", differing)};
}

Outcome attention_properties() {
  std::mt19937_64 rng(6);
  double col_err = 0.0, single_err = 0.0, mean_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<DenseMatrix> h;
    for (int k = 0; k < 4; ++k) h.push_back(testutil::random_dense(30, 8, rng, 3.0));
    const auto r = attention_combine(h, testutil::random_dense(4, 8, rng, 2.0));
    for (std::size_t i = 0; i < 30; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += r.coefficients(i, k);
      col_err = std::max(col_err, std::abs(s - 1.0));
    }
    const auto one = attention_combine(std::span(h).first(1), testutil::random_dense(1, 8, rng));
    single_err = std::max(single_err, max_abs_difference(one.output, h[0]));
    const auto flat = attention_combine(h, DenseMatrix(4, 8));
    DenseMatrix mean(30, 8);
    for (const auto& hk : h) axpy_inplace(mean, 0.25, hk);
    mean_err = std::max(mean_err, max_abs_difference(flat.output, mean));
  }
  return {col_err <= 1e-12 && single_err == 0.0 && mean_err <= 1e-12,
          fmt("sum(alpha)-1 %.2e, U=1 deviation %.2e, z=0 vs mean %.2e (limit 1e-12)", col_err, single_err,
              mean_err)};
}

Outcome directional_result() {
  const auto start = Clock::now();
  PlantedHeteroConfig pc;
  pc.noise = 0.2;
  pc.seed = 1;
  const Dataset d = planted_hetero(pc);
  TrainConfig tc;
  tc.layers = 2;
  tc.filters = 16;
  tc.train_fraction = 0.1;
  tc.validation_fraction = 0.1;
  tc.seed = 1;
  auto run = [&](std::vector<Motif> motifs) {
    const Experiment e = prepare_experiment(d, motifs, tc);
    Model m = init_model(model_config(e, motifs, tc), tc.seed);
    return train(m, e.data(), tc).test->accuracy;
  };
  const double with_motif =
      run({compute_role_map(author_paper_venue_motif(d.graph.types())), compute_role_map(edge_motif())});
  const double edge_only = run({compute_role_map(edge_motif())});
  const double secs = seconds_since(start);
  return {with_motif >= 0.85 && with_motif - edge_only >= 0.10 && secs < 120.0,
          fmt("%zu nodes; A-P-V + edge accuracy %.4f (need >= 0.85), edge only %.4f, gap %.4f (need >= 0.10), "
              "%.1f s",
              d.graph.num_nodes(), with_motif, edge_only, with_motif - edge_only, secs)};
}

Outcome permutation_equivariance() {
  const HeteroGraph g = random_typed_graph(30, 0.2, 2, 0.3, 31);
  std::vector<NodeId> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(31));
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) edges.push_back({perm[e.src], perm[e.dst], e.directed});
  std::vector<NodeTypeId> types(30);
  for (NodeId v = 0; v < 30; ++v) types[perm[v]] = g.type_of(v);
  const HeteroGraph pg(g.types(), types, edges);

  const std::vector<Motif> motifs{compute_role_map(edge_motif()),
                                  compute_role_map({"typed", {NodeTypeId{0}, NodeTypeId{1}, std::nullopt},
                                                    {{0, 2, false}, {2, 1, true}}, 0, 1, {2}})};
  std::vector<MotifTensor> t, pt;
  for (const auto& m : motifs) {
    t.push_back(build_motif_tensor(g, m));
    pt.push_back(build_motif_tensor(pg, m));
  }
  std::mt19937_64 rng(31);
  const DenseMatrix x = testutil::random_dense(30, 5, rng);
  DenseMatrix px(30, 5);
  for (NodeId v = 0; v < 30; ++v)
    for (std::size_t c = 0; c < 5; ++c) px(perm[v], c) = x(v, c);
  const Model model = init_model({5, 6, 3, 3, {motifs[0].num_roles(), motifs[1].num_roles()}, 0.0}, 31);
  const DenseMatrix a = model_forward(model, x, t, Mode::Eval).logits;
  const DenseMatrix b = model_forward(model, px, pt, Mode::Eval).logits;
  double worst = 0.0;
  for (NodeId v = 0; v < 30; ++v)
    for (std::size_t c = 0; c < 3; ++c) worst = std::max(worst, std::abs(a(v, c) - b(perm[v], c)));
  return {worst < 1e-10, fmt("max |logits - permuted logits| = %.3e (limit 1e-10)", worst)};
}

Outcome triangle_performance() {
  const HeteroGraph g = erdos_renyi_gnm(2000, 100000, 99);
  const Motif tri = compute_role_map(triangle_motif());
  const int saved = num_threads();
  set_num_threads(1);
  const auto start = Clock::now();
  const auto single = enumerate_triangles(g, tri);
  const double secs = seconds_since(start);
  set_num_threads(4);
  const auto multi = enumerate_triangles(g, tri);
  set_num_threads(saved);
  const bool same = single == multi;
  return {secs < 5.0 && same, fmt("%zu edges, %zu triangle instances in %.3f s single-threaded (limit 5 s); "
                                  "4-thread output %s",
                                  g.num_edges(), single.size(), secs, same ? "identical" : "DIFFERENT")};
}

Outcome determinism() {
  auto full_run = [] {
    PlantedHeteroConfig pc;
    pc.authors = 120;
    pc.noise = 0.3;
    pc.seed = 4;
    const Dataset d = planted_hetero(pc);
    const std::vector<Motif> motifs{compute_role_map(author_paper_venue_motif(d.graph.types())),
                                    compute_role_map(edge_motif())};
    TrainConfig tc;
    tc.max_epochs = 40;
    tc.layers = 2;
    tc.filters = 8;
    tc.dropout = 0.3;
    tc.seed = 4;
    const Experiment e = prepare_experiment(d, motifs, tc);
    Checkpoint ck;
    ck.model = init_model(model_config(e, motifs, tc), tc.seed);
    ck.task = d.labels.task;
    ck.motif_hash = motif_list_hash(motifs, d.graph.types());
    ck.config = tc;
    TrainReport report = train(ck.model, e.data(), tc);
    std::ostringstream bytes;
    write_checkpoint(bytes, ck);
    return std::pair{report, bytes.str()};
  };
  const auto [r1, c1] = full_run();
  const auto [r2, c2] = full_run();
  const bool same_report = r1.same_run(r2);
  const bool same_ckpt = c1 == c2;
  return {same_report && same_ckpt,
          fmt("%zu epochs; reports %s, checkpoints (%zu bytes) %s", r1.epochs.size(),
              same_report ? "identical" : "DIFFER", c1.size(), same_ckpt ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"enumeration matches brute force", enumeration_oracle},
      {"tensor matches oracle counts", tensor_formula},
      {"tensor conv equals instance conv", conv_equivalence},
      {"gradients match finite differences", gradient_exactness},
      {"edge motif gives the GCN form exactly", gcn_reduction},
      {"attention properties", attention_properties},
      {"planted-hetero directional result", directional_result},
      {"permutation equivariance", permutation_equivariance},
      {"triangle enumeration speed and thread invariance", triangle_performance},
      {"bit-identical repeated training", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
