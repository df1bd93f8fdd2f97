#include "motifcnn/synth.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace motifcnn {

namespace {

bool coin(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::vector<Edge> gnp_edges(std::size_t n, double p, double directed_fraction, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p <= 1.0) || !(directed_fraction >= 0.0 && directed_fraction <= 1.0)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (!coin(rng, p)) continue;
      if (directed_fraction > 0.0 && coin(rng, directed_fraction)) {
        edges.push_back(coin(rng, 0.5) ? Edge{u, v, true} : Edge{v, u, true});
      } else {
        edges.push_back({u, v, false});
      }
    }
  }
  return edges;
}

}  // namespace

HeteroGraph erdos_renyi_gnp(std::size_t n, double p, std::uint64_t seed, double directed_fraction) {
  std::mt19937_64 rng(seed);
  auto edges = gnp_edges(n, p, directed_fraction, rng);
  return HeteroGraph(TypeRegistry({"node"}), std::vector<NodeTypeId>(n), std::move(edges));
}

HeteroGraph erdos_renyi_gnm(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2 || m > n * (n - 1) / 2) throw std::invalid_argument("gnm: too many edges for the node count");
  std::mt19937_64 rng(seed);
  std::unordered_set<std::uint64_t> seen;
  std::vector<Edge> edges;
  edges.reserve(m);
  while (edges.size() < m) {
    auto u = static_cast<NodeId>(uniform_index(rng, n));
    auto v = static_cast<NodeId>(uniform_index(rng, n));
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (!seen.insert((static_cast<std::uint64_t>(u) << 32) | v).second) continue;
    edges.push_back({u, v, false});
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::pair{a.src, a.dst} < std::pair{b.src, b.dst}; });
  return HeteroGraph(TypeRegistry({"node"}), std::vector<NodeTypeId>(n), std::move(edges));
}

HeteroGraph random_typed_graph(std::size_t n, double p, std::size_t num_types, double directed_fraction,
                               std::uint64_t seed) {
  if (num_types == 0) throw std::invalid_argument("need at least one node type");
  std::mt19937_64 rng(seed);
  std::vector<std::string> names;
  for (std::size_t t = 0; t < num_types; ++t) names.push_back("t" + std::to_string(t));
  std::vector<NodeTypeId> types(n);
  for (auto& t : types) t = NodeTypeId{static_cast<std::uint16_t>(uniform_index(rng, num_types))};
  auto edges = gnp_edges(n, p, directed_fraction, rng);
  return HeteroGraph(TypeRegistry(std::move(names)), std::move(types), std::move(edges));
}

Dataset planted_hetero(const PlantedHeteroConfig& c) {
  if (c.authors == 0 || c.classes < 2 || c.venues_per_class == 0 || c.min_papers == 0 ||
      c.min_papers > c.max_papers || c.noise < 0.0) {
    throw std::invalid_argument("planted-hetero: invalid sizes");
  }
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t num_venues = c.classes * c.venues_per_class;
  std::vector<std::uint32_t> author_class(c.authors);
  std::vector<std::vector<std::size_t>> author_venues(c.authors);  // one entry per paper
  std::size_t num_papers = 0;
  for (std::size_t a = 0; a < c.authors; ++a) {
    const auto cls = static_cast<std::uint32_t>(a % c.classes);
    author_class[a] = cls;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(c.min_papers, c.max_papers)(rng);
    const std::size_t on_area = std::uniform_int_distribution<std::size_t>(n / 2 + 1, n)(rng);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t venue_class = cls;
      if (k >= on_area) {
        venue_class = uniform_index(rng, c.classes - 1);
        if (venue_class >= cls) ++venue_class;
      }
      author_venues[a].push_back(venue_class * c.venues_per_class + uniform_index(rng, c.venues_per_class));
    }
    num_papers += n;
  }

  // Node ids: authors, then papers, then venues.
  const NodeId paper0 = static_cast<NodeId>(c.authors);
  const NodeId venue0 = static_cast<NodeId>(c.authors + num_papers);
  const std::size_t n = c.authors + num_papers + num_venues;
  std::vector<NodeTypeId> types(n);
  for (NodeId v = paper0; v < venue0; ++v) types[v] = NodeTypeId{1};
  for (NodeId v = venue0; v < n; ++v) types[v] = NodeTypeId{2};

  std::vector<Edge> edges;
  NodeId paper = paper0;
  for (std::size_t a = 0; a < c.authors; ++a) {
    for (const std::size_t venue : author_venues[a]) {
      edges.push_back({static_cast<NodeId>(a), paper, false});
      edges.push_back({paper, static_cast<NodeId>(venue0 + venue), false});
      ++paper;
    }
  }
  if (num_papers > 1) {
    for (NodeId p = paper0; p < venue0; ++p) {
      std::vector<NodeId> cited;
      const std::size_t want = std::min(c.citations, num_papers - 1);
      while (cited.size() < want) {
        const auto q = static_cast<NodeId>(paper0 + uniform_index(rng, num_papers));
        if (q == p || std::find(cited.begin(), cited.end(), q) != cited.end()) continue;
        cited.push_back(q);
      }
      std::sort(cited.begin(), cited.end());
      for (const NodeId q : cited) edges.push_back({p, q, true});
    }
  }

  Dataset d{HeteroGraph(TypeRegistry({"A", "P", "V"}), std::move(types), std::move(edges)), {}, {}};

  TypeFeatures venue_features;
  venue_features.block = DenseMatrix(num_venues, c.classes + c.extra_dims);
  for (std::size_t v = 0; v < num_venues; ++v) {
    venue_features.nodes.push_back(static_cast<NodeId>(venue0 + v));
    auto row = venue_features.block.row(v);
    row[v / c.venues_per_class] = 1.0;
    if (c.noise > 0.0) {
      for (double& x : row) x += c.noise * gauss(rng);
    }
  }
  d.features.emplace(NodeTypeId{2}, std::move(venue_features));

  d.labels.task = Task::MultiClass;
  d.labels.num_classes = c.classes;
  for (std::size_t a = 0; a < c.authors; ++a) d.labels.classes[static_cast<NodeId>(a)] = {author_class[a]};
  return d;
}

Dataset sbm_homo(const SbmConfig& c) {
  if (c.nodes < 2 || !(c.p_in >= 0.0 && c.p_in <= 1.0) || !(c.p_out >= 0.0 && c.p_out <= 1.0) || c.noise < 0.0) {
    throw std::invalid_argument("sbm-homo: invalid sizes");
  }
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t half = c.nodes / 2;
  auto block = [&](NodeId v) -> std::uint32_t { return v < half ? 0 : 1; };

  std::vector<Edge> edges;
  for (NodeId u = 0; u < c.nodes; ++u) {
    for (NodeId v = u + 1; v < c.nodes; ++v) {
      if (coin(rng, block(u) == block(v) ? c.p_in : c.p_out)) edges.push_back({u, v, false});
    }
  }
  Dataset d{HeteroGraph(TypeRegistry({"node"}), std::vector<NodeTypeId>(c.nodes), std::move(edges)), {}, {}};

  TypeFeatures f;
  f.block = DenseMatrix(c.nodes, 2);
  for (NodeId v = 0; v < c.nodes; ++v) {
    f.nodes.push_back(v);
    f.block(v, block(v)) = 1.0;
    for (double& x : f.block.row(v)) x += c.noise * gauss(rng);
  }
  d.features.emplace(NodeTypeId{0}, std::move(f));

  d.labels.task = Task::MultiClass;
  d.labels.num_classes = 2;
  for (NodeId v = 0; v < c.nodes; ++v) d.labels.classes[v] = {block(v)};
  return d;
}

MotifPattern edge_motif() { return {"edge", {std::nullopt, std::nullopt}, {{0, 1, false}}, 0, 1, {}}; }

MotifPattern triangle_motif() {
  return {"triangle", {std::nullopt, std::nullopt, std::nullopt}, {{0, 1, false}, {1, 2, false}, {0, 2, false}}, 0, 1,
          {2}};
}

MotifPattern author_paper_venue_motif(const TypeRegistry& types) {
  auto need = [&](std::string_view name) {
    auto t = types.find(name);
    if (!t) throw std::invalid_argument("graph has no node type " + std::string(name));
    return *t;
  };
  // Positions: 0 author (target), 1 venue (context), 2 paper.
  return {"apv", {need("A"), need("V"), need("P")}, {{0, 2, false}, {2, 1, false}}, 0, 1, {2}};
}

}  // namespace motifcnn
