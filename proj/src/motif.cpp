#include "motifcnn/motif.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "motifcnn/errors.hpp"
#include "motifcnn/parallel.hpp"

namespace motifcnn {

namespace {

using json = nlohmann::json;

bool has_pattern_edge(const MotifPattern& p, Position a, Position b, bool directed) {
  for (const auto& e : p.edges) {
    if (e.directed != directed) continue;
    if (e.src == a && e.dst == b) return true;
    if (!directed && e.src == b && e.dst == a) return true;
  }
  return false;
}

void validate_pattern(const MotifPattern& p) {
  const std::size_t n = p.node_types.size();
  if (n < 2 || n > kMaxMotifNodes) {
    throw ValidationError("motif '" + p.name + "' must have between 2 and " + std::to_string(kMaxMotifNodes) +
                          " nodes");
  }
  if (p.target >= n || p.context >= n) throw ValidationError("motif '" + p.name + "': target/context out of range");
  if (p.target == p.context) throw ValidationError("motif '" + p.name + "': target and context must differ");

  std::set<std::pair<Position, Position>> undirected;
  std::set<std::pair<Position, Position>> directed;
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    const MotifEdge& e = p.edges[i];
    if (e.src >= n || e.dst >= n) throw ValidationError("motif '" + p.name + "': edge endpoint out of range", i);
    if (e.src == e.dst) throw ValidationError("motif '" + p.name + "': self-loop", i);
    const auto pair = std::minmax(e.src, e.dst);
    const bool clash = e.directed ? (!directed.insert({e.src, e.dst}).second || undirected.contains(pair))
                                  : (!undirected.insert(pair).second || directed.contains({e.src, e.dst}) ||
                                     directed.contains({e.dst, e.src}));
    if (clash) throw ValidationError("motif '" + p.name + "': duplicate edge", i);
  }

  // Connectivity of the undirected view.
  std::vector<bool> seen(n, false);
  std::vector<Position> stack{p.target};
  seen[p.target] = true;
  while (!stack.empty()) {
    const Position x = stack.back();
    stack.pop_back();
    for (const auto& e : p.edges) {
      for (const auto& [a, b] : {std::pair{e.src, e.dst}, std::pair{e.dst, e.src}}) {
        if (a == x && !seen[b]) {
          seen[b] = true;
          stack.push_back(b);
        }
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ValidationError("motif '" + p.name + "' is not connected");
  }

  std::vector<Position> expected;
  for (Position x = 0; x < n; ++x) {
    if (x != p.target && x != p.context) expected.push_back(x);
  }
  std::vector<Position> aux = p.aux;
  std::sort(aux.begin(), aux.end());
  if (aux != expected) {
    throw ValidationError("motif '" + p.name + "': aux must list every node other than target and context");
  }
}

// --- Matching plan for backtracking ---------------------------------------

struct EdgeCheck {
  Position other;  // already placed position
  LinkKind kind;   // link from graph(other) to the new node
};

struct PlanStep {
  Position position;
  Position parent;
  LinkKind parent_kind;  // candidates = neighbors(mapping[parent], parent_kind)
  std::vector<EdgeCheck> checks;
};

LinkKind kind_from(const MotifEdge& e, Position from) {
  if (!e.directed) return LinkKind::Any;
  return e.src == from ? LinkKind::Out : LinkKind::In;
}

std::vector<PlanStep> make_plan(const Motif& motif) {
  const MotifPattern& p = motif.pattern();
  const std::size_t n = motif.size();
  std::vector<Position> order{motif.target()};
  std::vector<bool> placed(n, false);
  placed[motif.target()] = true;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (Position y = 0; y < n; ++y) {
      if (placed[y]) continue;
      for (const auto& e : p.edges) {
        if ((e.src == order[head] && e.dst == y) || (e.dst == order[head] && e.src == y)) {
          placed[y] = true;
          order.push_back(y);
          break;
        }
      }
    }
  }

  std::vector<PlanStep> plan;
  for (std::size_t i = 1; i < order.size(); ++i) {
    PlanStep step{order[i], 0, LinkKind::Any, {}};
    bool have_parent = false;
    for (std::size_t j = 0; j < i; ++j) {
      for (const auto& e : p.edges) {
        const bool touches = (e.src == order[j] && e.dst == order[i]) || (e.dst == order[j] && e.src == order[i]);
        if (!touches) continue;
        const LinkKind kind = kind_from(e, order[j]);
        if (!have_parent) {
          step.parent = order[j];
          step.parent_kind = kind;
          have_parent = true;
        } else {
          step.checks.push_back({order[j], kind});
        }
      }
    }
    plan.push_back(std::move(step));
  }
  return plan;
}

bool type_matches(const Motif& motif, const HeteroGraph& g, Position p, NodeId v) {
  const auto& t = motif.pattern().node_types[p];
  return !t || *t == g.type_of(v);
}

bool used(std::span<const NodeId> mapping, std::span<const bool> assigned, NodeId v) {
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    if (assigned[i] && mapping[i] == v) return true;
  }
  return false;
}

// Sort by (key, mapping) and keep the first mapping of every key.
void canonicalize(const Motif& motif, std::vector<MotifInstance>& instances) {
  std::vector<std::pair<std::vector<NodeId>, MotifInstance>> keyed;
  keyed.reserve(instances.size());
  for (auto& inst : instances) keyed.emplace_back(instance_key(motif, inst), std::move(inst));
  std::sort(keyed.begin(), keyed.end());
  instances.clear();
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0 && keyed[i].first == keyed[i - 1].first) continue;
    instances.push_back(std::move(keyed[i].second));
  }
}

class InstanceBudget {
 public:
  explicit InstanceBudget(std::size_t cap) : cap_(cap) {}
  // Returns false once the cap is exceeded.
  bool add(std::size_t count) { return used_.fetch_add(count) + count <= cap_; }
  bool exhausted() const { return used_.load() > cap_; }
  [[noreturn]] void fail(const Motif& motif) const {
    throw ResourceError("motif '" + motif.name() + "' exceeds the instance cap of " + std::to_string(cap_));
  }

 private:
  std::size_t cap_;
  std::atomic<std::size_t> used_{0};
};

std::vector<MotifInstance> enumerate_for_target(const HeteroGraph& g, const Motif& motif,
                                                const std::vector<PlanStep>& plan, NodeId u) {
  std::vector<MotifInstance> out;
  if (!type_matches(motif, g, motif.target(), u)) return out;
  const std::size_t n = motif.size();
  std::vector<NodeId> mapping(n, 0);
  bool assigned[kMaxMotifNodes] = {};
  mapping[motif.target()] = u;
  assigned[motif.target()] = true;

  auto recurse = [&](auto&& self, std::size_t depth) -> void {
    if (depth == plan.size()) {
      out.push_back({u, mapping});
      return;
    }
    const PlanStep& step = plan[depth];
    for (const NodeId v : g.neighbors(mapping[step.parent], step.parent_kind)) {
      if (!type_matches(motif, g, step.position, v)) continue;
      if (used(mapping, std::span<const bool>(assigned, n), v)) continue;
      bool ok = true;
      for (const auto& c : step.checks) {
        if (!g.has_edge(mapping[c.other], v, c.kind)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      mapping[step.position] = v;
      assigned[step.position] = true;
      self(self, depth + 1);
      assigned[step.position] = false;
    }
  };
  recurse(recurse, 0);
  canonicalize(motif, out);
  return out;
}

// Runs `per_node(v)` for every node in parallel and concatenates the results
// in node order.
template <typename Fn>
std::vector<MotifInstance> collect_by_node(std::size_t n, Fn&& per_node) {
  std::vector<std::vector<MotifInstance>> buckets(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64) num_threads(num_threads())
  for (std::int64_t v = 0; v < count; ++v) buckets[static_cast<std::size_t>(v)] = per_node(static_cast<NodeId>(v));
  std::size_t total = 0;
  for (const auto& b : buckets) total += b.size();
  std::vector<MotifInstance> out;
  out.reserve(total);
  for (auto& b : buckets) std::move(b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

// --- Motif ------------------------------------------------------------------

std::vector<Position> Motif::positions_with_role(std::uint32_t role) const {
  std::vector<Position> out;
  for (Position p = 0; p < roles_.size(); ++p) {
    if (p != target() && roles_[p] == role) out.push_back(p);
  }
  return out;
}

bool Motif::is_triangle() const {
  if (size() != 3 || pattern_.edges.size() != 3) return false;
  return std::none_of(pattern_.edges.begin(), pattern_.edges.end(), [](const MotifEdge& e) { return e.directed; });
}

bool Motif::is_path3() const {
  if (size() != 3 || pattern_.edges.size() != 2) return false;
  // Connected with two edges on three nodes: always a path, provided the two
  // edges do not join the same pair.
  const auto a = std::minmax(pattern_.edges[0].src, pattern_.edges[0].dst);
  const auto b = std::minmax(pattern_.edges[1].src, pattern_.edges[1].dst);
  return a != b;
}

Motif compute_role_map(MotifPattern pattern) {
  validate_pattern(pattern);
  const std::size_t n = pattern.node_types.size();

  Motif m;
  std::vector<Position> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    if (perm[pattern.target] != pattern.target) continue;
    bool ok = true;
    for (Position x = 0; x < n && ok; ++x) ok = pattern.node_types[perm[x]] == pattern.node_types[x];
    for (const auto& e : pattern.edges) {
      if (!ok) break;
      ok = has_pattern_edge(pattern, perm[e.src], perm[e.dst], e.directed);
    }
    if (ok) m.automorphisms_.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  // Orbit representative = smallest image over the group.
  std::vector<Position> orbit(n);
  for (Position x = 0; x < n; ++x) {
    orbit[x] = x;
    for (const auto& sigma : m.automorphisms_) orbit[x] = std::min(orbit[x], sigma[x]);
  }

  m.roles_.assign(n, 0);
  std::map<Position, std::uint32_t> role_of_orbit;
  role_of_orbit[orbit[pattern.context]] = 1;
  for (Position x = 0; x < n; ++x) {
    if (x == pattern.target) continue;
    if (!role_of_orbit.contains(orbit[x])) {
      const auto next = static_cast<std::uint32_t>(role_of_orbit.size() + 1);
      role_of_orbit[orbit[x]] = next;
    }
    m.roles_[x] = role_of_orbit[orbit[x]];
  }
  m.num_roles_ = role_of_orbit.size();
  for (Position x = 0; x < n; ++x) {
    if (x != pattern.target && x != pattern.context && m.roles_[x] == 1) m.context_shares_role_ = true;
  }
  m.pattern_ = std::move(pattern);
  return m;
}

// --- JSON -------------------------------------------------------------------

MotifPattern parse_motif(std::string_view text, const TypeRegistry& types) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("motif json: ") + e.what());
  }
  auto fail = [](const std::string& what) -> ParseError { return ParseError(0, "motif json: " + what); };

  try {
    if (!doc.is_object()) throw fail("expected a JSON object");
    MotifPattern p;
    p.name = doc.value("name", std::string());

    const auto& nodes = doc.at("nodes");
    if (!nodes.is_array()) throw fail("'nodes' must be an array");
    p.node_types.assign(nodes.size(), std::nullopt);
    std::vector<bool> seen(nodes.size(), false);
    for (const auto& node : nodes) {
      const auto id = node.at("id").get<std::int64_t>();
      if (id < 0 || static_cast<std::size_t>(id) >= nodes.size() || seen[static_cast<std::size_t>(id)]) {
        throw fail("node ids must be 0..n-1, each once");
      }
      seen[static_cast<std::size_t>(id)] = true;
      if (node.contains("type")) {
        const auto name = node.at("type").get<std::string>();
        if (name != "*") {
          const auto t = types.find(name);
          if (!t) throw fail("unknown node type '" + name + "'");
          p.node_types[static_cast<std::size_t>(id)] = *t;
        }
      }
    }

    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) throw fail("edges are [src, dst] or [src, dst, \"directed\"]");
      MotifEdge edge{e[0].get<Position>(), e[1].get<Position>(), false};
      if (e.size() == 3) {
        if (e[2].get<std::string>() != "directed") throw fail("unknown edge flag '" + e[2].get<std::string>() + "'");
        edge.directed = true;
      }
      p.edges.push_back(edge);
    }

    p.target = doc.at("target").get<Position>();
    p.context = doc.at("context").get<Position>();
    if (doc.contains("aux")) {
      p.aux = doc.at("aux").get<std::vector<Position>>();
    } else {
      for (Position x = 0; x < p.node_types.size(); ++x) {
        if (x != p.target && x != p.context) p.aux.push_back(x);
      }
    }
    return p;
  } catch (const json::exception& e) {
    throw fail(e.what());
  }
}

MotifPattern load_motif(const std::string& path, const TypeRegistry& types) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open motif file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  MotifPattern p;
  try {
    p = parse_motif(buf.str(), types);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
  if (p.name.empty()) p.name = std::filesystem::path(path).stem().string();
  return p;
}

std::string motif_to_json(const Motif& motif, const TypeRegistry& types) {
  const MotifPattern& p = motif.pattern();
  json doc;
  doc["name"] = p.name;
  doc["nodes"] = json::array();
  for (Position x = 0; x < p.node_types.size(); ++x) {
    doc["nodes"].push_back({{"id", x}, {"type", p.node_types[x] ? types.name(*p.node_types[x]) : "*"}});
  }
  doc["edges"] = json::array();
  for (const auto& e : p.edges) {
    json edge = {e.src, e.dst};
    if (e.directed) edge.push_back("directed");
    doc["edges"].push_back(edge);
  }
  doc["target"] = p.target;
  doc["context"] = p.context;
  std::vector<Position> aux = p.aux;
  std::sort(aux.begin(), aux.end());
  doc["aux"] = aux;
  return doc.dump();
}

// --- Instances --------------------------------------------------------------

std::vector<NodeId> instance_key(const Motif& motif, const MotifInstance& instance) {
  std::vector<NodeId> key{instance.target};
  key.reserve(motif.size());
  for (std::uint32_t role = 1; role <= motif.num_roles(); ++role) {
    const auto begin = key.size();
    for (Position p = 0; p < motif.size(); ++p) {
      if (p != motif.target() && motif.role(p) == role) key.push_back(instance.mapping[p]);
    }
    std::sort(key.begin() + static_cast<std::ptrdiff_t>(begin), key.end());
  }
  return key;
}

bool is_embedding(const HeteroGraph& g, const Motif& motif, std::span<const NodeId> mapping) {
  if (mapping.size() != motif.size()) return false;
  for (Position p = 0; p < mapping.size(); ++p) {
    if (mapping[p] >= g.num_nodes() || !type_matches(motif, g, p, mapping[p])) return false;
    for (Position q = 0; q < p; ++q) {
      if (mapping[q] == mapping[p]) return false;
    }
  }
  for (const auto& e : motif.pattern().edges) {
    if (!g.has_edge(mapping[e.src], mapping[e.dst], e.directed ? LinkKind::Out : LinkKind::Any)) return false;
  }
  return true;
}

std::vector<MotifInstance> enumerate_instances(const HeteroGraph& g, const Motif& motif, std::optional<NodeId> target,
                                               const EnumerationOptions& options) {
  const auto plan = make_plan(motif);
  if (target) {
    if (*target >= g.num_nodes()) throw ValidationError("target node out of range");
    auto out = enumerate_for_target(g, motif, plan, *target);
    if (out.size() > options.max_instances) InstanceBudget(options.max_instances).fail(motif);
    return out;
  }
  InstanceBudget budget(options.max_instances);
  auto out = collect_by_node(g.num_nodes(), [&](NodeId u) {
    if (budget.exhausted()) return std::vector<MotifInstance>{};
    auto found = enumerate_for_target(g, motif, plan, u);
    budget.add(found.size());
    return found;
  });
  if (budget.exhausted()) budget.fail(motif);
  return out;
}

std::vector<MotifInstance> brute_force_instances(const HeteroGraph& g, const Motif& motif, std::optional<NodeId> target,
                                                 std::size_t max_nodes) {
  if (g.num_nodes() > max_nodes) {
    throw ResourceError("brute-force enumeration is capped at " + std::to_string(max_nodes) + " nodes");
  }
  const std::size_t n = motif.size();
  std::vector<MotifInstance> out;
  std::vector<NodeId> mapping(n);
  auto assign = [&](auto&& self, Position p) -> void {
    if (p == n) {
      if (is_embedding(g, motif, mapping)) out.push_back({mapping[motif.target()], mapping});
      return;
    }
    if (p == motif.target()) {
      self(self, p + 1);
      return;
    }
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      mapping[p] = v;
      self(self, p + 1);
    }
  };
  for (NodeId u = 0; u < g.num_nodes(); ++u) {
    if (target && *target != u) continue;
    mapping[motif.target()] = u;
    assign(assign, 0);
  }
  canonicalize(motif, out);
  return out;
}

std::vector<std::array<NodeId, 3>> find_triangles(const HeteroGraph& g) {
  const std::size_t n = g.num_nodes();
  // rank order: (degree, id); orient every link from lower to higher rank.
  auto before = [&](NodeId a, NodeId b) {
    const auto da = g.neighbors(a).size();
    const auto db = g.neighbors(b).size();
    return da != db ? da < db : a < b;
  };
  std::vector<std::vector<NodeId>> forward(n);
  for (NodeId v = 0; v < n; ++v) {
    for (const NodeId w : g.neighbors(v)) {
      if (before(v, w)) forward[v].push_back(w);
    }
  }

  std::vector<std::vector<std::array<NodeId, 3>>> per_node(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64) num_threads(num_threads())
  for (std::int64_t i = 0; i < count; ++i) {
    const auto u = static_cast<NodeId>(i);
    const auto& fu = forward[u];
    for (const NodeId v : fu) {
      const auto& fv = forward[v];
      auto a = fu.begin();
      auto b = fv.begin();
      while (a != fu.end() && b != fv.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          std::array<NodeId, 3> tri{u, v, *a};
          std::sort(tri.begin(), tri.end());
          per_node[u].push_back(tri);
          ++a;
          ++b;
        }
      }
    }
  }
  std::vector<std::array<NodeId, 3>> out;
  for (auto& t : per_node) out.insert(out.end(), t.begin(), t.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<MotifInstance> enumerate_triangles(const HeteroGraph& g, const Motif& motif,
                                               const EnumerationOptions& options) {
  if (!motif.is_triangle()) throw ValidationError("motif '" + motif.name() + "' is not an undirected triangle");
  const auto triangles = find_triangles(g);
  const Position t = motif.target();
  const Position p = (t + 1) % 3;
  const Position q = (t + 2) % 3;

  std::vector<MotifInstance> out;
  for (const auto& tri : triangles) {
    for (int i = 0; i < 3; ++i) {
      const NodeId u = tri[i];
      if (!type_matches(motif, g, t, u)) continue;
      const NodeId a = tri[(i + 1) % 3];
      const NodeId b = tri[(i + 2) % 3];
      for (const auto& [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
        if (!type_matches(motif, g, p, x) || !type_matches(motif, g, q, y)) continue;
        MotifInstance inst{u, std::vector<NodeId>(3)};
        inst.mapping[t] = u;
        inst.mapping[p] = x;
        inst.mapping[q] = y;
        out.push_back(std::move(inst));
      }
    }
  }
  canonicalize(motif, out);
  if (out.size() > options.max_instances) InstanceBudget(options.max_instances).fail(motif);
  return out;
}

std::vector<MotifInstance> enumerate_wedges(const HeteroGraph& g, const Motif& motif,
                                            const EnumerationOptions& options) {
  if (!motif.is_path3()) throw ValidationError("motif '" + motif.name() + "' is not a 3-node path");
  const auto& edges = motif.pattern().edges;
  // The middle is the position shared by both edges.
  Position middle = edges[0].src;
  if (middle != edges[1].src && middle != edges[1].dst) middle = edges[0].dst;
  auto other_end = [middle](const MotifEdge& e) { return e.src == middle ? e.dst : e.src; };
  const Position end1 = other_end(edges[0]);
  const Position end2 = other_end(edges[1]);
  const LinkKind kind1 = kind_from(edges[0], middle);
  const LinkKind kind2 = kind_from(edges[1], middle);

  InstanceBudget budget(options.max_instances);
  auto out = collect_by_node(g.num_nodes(), [&](NodeId c) {
    std::vector<MotifInstance> found;
    if (budget.exhausted() || !type_matches(motif, g, middle, c)) return found;
    for (const NodeId a : g.neighbors(c, kind1)) {
      if (!type_matches(motif, g, end1, a)) continue;
      for (const NodeId b : g.neighbors(c, kind2)) {
        if (a == b || !type_matches(motif, g, end2, b)) continue;
        MotifInstance inst{0, std::vector<NodeId>(3)};
        inst.mapping[middle] = c;
        inst.mapping[end1] = a;
        inst.mapping[end2] = b;
        inst.target = inst.mapping[motif.target()];
        found.push_back(std::move(inst));
      }
    }
    budget.add(found.size());
    return found;
  });
  // Symmetric endpoints yield every instance twice.
  canonicalize(motif, out);
  if (out.size() > options.max_instances) budget.fail(motif);
  return out;
}

// --- Tensor -----------------------------------------------------------------

std::int64_t MotifTensor::total_instances() const {
  return std::accumulate(instance_counts.begin(), instance_counts.end(), std::int64_t{0});
}

MotifTensor tensor_from_instances(std::size_t num_nodes, const Motif& motif, std::span<const MotifInstance> instances) {
  std::vector<std::vector<Triplet>> triplets(motif.num_roles());
  MotifTensor t;
  t.instance_counts.assign(num_nodes, 0);
  for (const auto& inst : instances) {
    ++t.instance_counts.at(inst.target);
    for (Position p = 0; p < motif.size(); ++p) {
      if (p == motif.target()) continue;
      triplets[motif.role(p) - 1].push_back({inst.target, inst.mapping[p], 1.0});
    }
  }
  for (auto& trip : triplets) t.roles.push_back(SparseMatrix::from_triplets(num_nodes, num_nodes, std::move(trip)));
  return t;
}

MotifTensor build_motif_tensor(const HeteroGraph& g, const Motif& motif, const EnumerationOptions& options) {
  std::vector<MotifInstance> instances;
  if (motif.is_triangle()) {
    instances = enumerate_triangles(g, motif, options);
  } else if (motif.is_path3()) {
    instances = enumerate_wedges(g, motif, options);
  } else {
    instances = enumerate_instances(g, motif, std::nullopt, options);
  }
  return tensor_from_instances(g.num_nodes(), motif, instances);
}

void write_motif_tensor(const std::string& dir, const MotifTensor& tensor) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < tensor.roles.size(); ++k) {
    const auto path = std::filesystem::path(dir) / ("role_" + std::to_string(k + 1) + ".txt");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    const SparseMatrix& a = tensor.roles[k];
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const auto cols = a.row_columns(i);
      const auto vals = a.row_values(i);
      for (std::size_t e = 0; e < cols.size(); ++e) {
        out << i << ' ' << cols[e] << ' ' << static_cast<std::int64_t>(vals[e]) << '\n';
      }
    }
  }
  const auto path = std::filesystem::path(dir) / "diag.txt";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < tensor.instance_counts.size(); ++i) out << i << ' ' << tensor.instance_counts[i] << '\n';
}

MotifTensor read_motif_tensor(const std::string& dir, std::size_t num_nodes, std::size_t num_roles) {
  auto open = [](const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return in;
  };
  MotifTensor t;
  for (std::size_t k = 1; k <= num_roles; ++k) {
    auto in = open(std::filesystem::path(dir) / ("role_" + std::to_string(k) + ".txt"));
    std::vector<Triplet> trip;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::int64_t i = -1, j = -1, c = 0;
      if (!(ss >> i >> j >> c) || i < 0 || j < 0 || c <= 0 || static_cast<std::size_t>(i) >= num_nodes ||
          static_cast<std::size_t>(j) >= num_nodes) {
        throw ParseError(line_no, "role_" + std::to_string(k) + ".txt: expected 'i j count'");
      }
      trip.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<double>(c)});
    }
    t.roles.push_back(SparseMatrix::from_triplets(num_nodes, num_nodes, std::move(trip)));
  }
  auto in = open(std::filesystem::path(dir) / "diag.txt");
  t.instance_counts.assign(num_nodes, 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::int64_t i = -1, c = -1;
    if (!(ss >> i >> c) || i < 0 || c < 0 || static_cast<std::size_t>(i) >= num_nodes) {
      throw ParseError(line_no, "diag.txt: expected 'i L_i'");
    }
    t.instance_counts[static_cast<std::size_t>(i)] = c;
  }
  return t;
}

}  // namespace motifcnn
