#include "motifcnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "motifcnn/errors.hpp"

namespace motifcnn {

TypeRegistry::TypeRegistry(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > 0xFFFF) throw ValidationError("too many node types");
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw ValidationError("empty node type name", i);
    if (!seen.insert(names_[i]).second) throw ValidationError("duplicate node type name '" + names_[i] + "'", i);
  }
}

std::optional<NodeTypeId> TypeRegistry::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return NodeTypeId{static_cast<std::uint16_t>(i)};
  }
  return std::nullopt;
}

HeteroGraph::HeteroGraph(TypeRegistry types, std::vector<NodeTypeId> node_types, std::vector<Edge> edges)
    : types_(std::move(types)), node_types_(std::move(node_types)), edges_(std::move(edges)) {
  const std::size_t n = node_types_.size();
  for (std::size_t v = 0; v < n; ++v) {
    if (node_types_[v].value >= types_.size()) {
      throw ValidationError("node " + std::to_string(v) + " has unknown type id", v);
    }
  }

  // Per unordered pair: bit 0 undirected, bit 1 low->high, bit 2 high->low.
  std::unordered_map<std::uint64_t, std::uint8_t> pairs;
  pairs.reserve(edges_.size() * 2);
  std::vector<std::vector<NodeId>> lists[3];
  for (auto& l : lists) l.resize(n);

  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.src >= n || edge.dst >= n) {
      throw ValidationError("edge " + std::to_string(edge.src) + "-" + std::to_string(edge.dst) +
                                ": node index out of range",
                            e);
    }
    if (edge.src == edge.dst) {
      throw ValidationError("edge " + std::to_string(edge.src) + "-" + std::to_string(edge.dst) + ": self-loop", e);
    }
    const NodeId lo = std::min(edge.src, edge.dst);
    const NodeId hi = std::max(edge.src, edge.dst);
    const std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | hi;
    const std::uint8_t bit = !edge.directed ? 1 : (edge.src == lo ? 2 : 4);
    std::uint8_t& mask = pairs[key];
    if ((mask & bit) || (bit == 1 && mask) || (mask & 1)) {
      throw ValidationError("edge " + std::to_string(edge.src) + "-" + std::to_string(edge.dst) + ": duplicate edge",
                            e);
    }
    mask |= bit;

    if (edge.directed) {
      lists[static_cast<int>(LinkKind::Out)][edge.src].push_back(edge.dst);
      lists[static_cast<int>(LinkKind::In)][edge.dst].push_back(edge.src);
    } else {
      lists[static_cast<int>(LinkKind::Undirected)][edge.src].push_back(edge.dst);
      lists[static_cast<int>(LinkKind::Undirected)][edge.dst].push_back(edge.src);
    }
  }

  auto flatten = [n](std::vector<std::vector<NodeId>>& per_node, Adjacency& adj) {
    adj.offsets.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) {
      std::sort(per_node[v].begin(), per_node[v].end());
      adj.offsets[v + 1] = adj.offsets[v] + per_node[v].size();
    }
    adj.targets.reserve(adj.offsets[n]);
    for (auto& l : per_node) adj.targets.insert(adj.targets.end(), l.begin(), l.end());
  };

  std::vector<std::vector<NodeId>> any(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& l : lists) any[v].insert(any[v].end(), l[v].begin(), l[v].end());
    std::sort(any[v].begin(), any[v].end());
    any[v].erase(std::unique(any[v].begin(), any[v].end()), any[v].end());
  }
  for (int k = 0; k < 3; ++k) flatten(lists[k], adjacency_[k]);
  flatten(any, adjacency_[static_cast<int>(LinkKind::Any)]);
}

std::span<const NodeId> HeteroGraph::neighbors(NodeId v, LinkKind kind) const {
  const Adjacency& adj = adjacency(kind);
  return {adj.targets.data() + adj.offsets[v], adj.offsets[v + 1] - adj.offsets[v]};
}

bool HeteroGraph::has_edge(NodeId u, NodeId v, LinkKind kind) const {
  const auto nbrs = neighbors(u, kind);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::size_t HeteroGraph::degree(NodeId v) const {
  return neighbors(v, LinkKind::Undirected).size() + neighbors(v, LinkKind::Out).size() +
         neighbors(v, LinkKind::In).size();
}

FeatureMatrix build_feature_matrix(const HeteroGraph& graph, const std::map<NodeTypeId, TypeFeatures>& per_type) {
  const std::size_t n = graph.num_nodes();
  const std::size_t num_types = graph.types().size();

  std::vector<std::vector<NodeId>> members(num_types);
  for (NodeId v = 0; v < n; ++v) members[graph.type_of(v).value].push_back(v);

  FeatureMatrix fm;
  fm.slices.resize(num_types);
  std::size_t width = 0;
  for (std::size_t t = 0; t < num_types; ++t) {
    const auto it = per_type.find(NodeTypeId{static_cast<std::uint16_t>(t)});
    FeatureSlice& slice = fm.slices[t];
    slice.begin = width;
    if (it == per_type.end()) {
      slice.width = members[t].size();
      slice.one_hot = true;
    } else {
      if (it->second.nodes.size() != it->second.block.rows()) {
        throw ValidationError("features for type '" + graph.types().name(it->first) +
                              "': node list and block row count differ");
      }
      slice.width = it->second.block.cols();
    }
    width += slice.width;
  }
  for (const auto& [type, block] : per_type) {
    if (type.value >= num_types) throw ValidationError("features supplied for unknown type id");
  }

  fm.data = DenseMatrix(n, width);
  for (std::size_t t = 0; t < num_types; ++t) {
    const FeatureSlice& slice = fm.slices[t];
    if (slice.one_hot) {
      for (std::size_t r = 0; r < members[t].size(); ++r) fm.data(members[t][r], slice.begin + r) = 1.0;
      continue;
    }
    const TypeFeatures& tf = per_type.at(NodeTypeId{static_cast<std::uint16_t>(t)});
    std::vector<bool> seen(n, false);
    for (std::size_t r = 0; r < tf.nodes.size(); ++r) {
      const NodeId v = tf.nodes[r];
      if (v >= n || graph.type_of(v).value != t) {
        throw ValidationError("features for type '" + graph.types().name(NodeTypeId{static_cast<std::uint16_t>(t)}) +
                                  "' list node " + std::to_string(v) + " which is not of that type",
                              r);
      }
      if (seen[v]) throw ValidationError("node " + std::to_string(v) + " appears twice in its feature block", r);
      seen[v] = true;
      const auto src = tf.block.row(r);
      std::copy(src.begin(), src.end(), fm.data.row(v).begin() + static_cast<std::ptrdiff_t>(slice.begin));
    }
    for (const NodeId v : members[t]) {
      if (!seen[v]) {
        throw ValidationError("node " + std::to_string(v) + " is missing from the feature block of type '" +
                              graph.types().name(NodeTypeId{static_cast<std::uint16_t>(t)}) + "'");
      }
    }
  }
  return fm;
}

std::vector<NodeId> LabelSet::nodes(Split which) const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < split.size(); ++v) {
    if (split[v] == which) out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

namespace {

// Per-group quotas summing to `total`: floors first, then the largest
// fractional remainders (ties to the lower group index), capped by `room`.
std::vector<std::size_t> allocate_quotas(std::span<const std::size_t> sizes, double fraction, std::size_t total,
                                         std::span<const std::size_t> room) {
  std::vector<std::size_t> quota(sizes.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const double exact = fraction * static_cast<double>(sizes[g]);
    quota[g] = std::min(room[g], static_cast<std::size_t>(std::floor(exact + 1e-9)));
    assigned += quota[g];
    remainders.emplace_back(exact - std::floor(exact + 1e-9), g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t pass = 0; pass < 2 && assigned < total; ++pass) {
    for (const auto& [rem, g] : remainders) {
      if (assigned >= total) break;
      if (quota[g] < room[g] && (pass == 1 || rem > 1e-9)) {
        ++quota[g];
        ++assigned;
      }
    }
  }
  return quota;
}

}  // namespace

LabelSet split_labels(const Labels& labels, SplitFractions fractions, std::uint64_t seed) {
  if (!(fractions.train > 0.0) || !(fractions.validation > 0.0) || fractions.train + fractions.validation >= 1.0) {
    throw ValidationError("split fractions must be positive and sum to less than 1");
  }
  LabelSet out;
  out.labels = labels;
  std::size_t n = 0;
  if (!labels.classes.empty()) n = labels.classes.rbegin()->first + 1;
  out.split.assign(n, Split::None);

  std::mt19937_64 rng(seed);
  const std::size_t total = labels.classes.size();
  const auto train_total = static_cast<std::size_t>(std::llround(fractions.train * static_cast<double>(total)));
  const auto val_total = static_cast<std::size_t>(std::llround(fractions.validation * static_cast<double>(total)));

  std::vector<std::vector<NodeId>> groups;
  if (labels.task == Task::MultiClass) {
    groups.resize(labels.num_classes);
    for (const auto& [v, cls] : labels.classes) groups.at(cls.at(0)).push_back(v);
  } else {
    groups.emplace_back();
    for (const auto& [v, cls] : labels.classes) groups[0].push_back(v);
  }
  for (auto& g : groups) std::shuffle(g.begin(), g.end(), rng);

  std::vector<std::size_t> sizes;
  for (const auto& g : groups) sizes.push_back(g.size());
  const auto train_quota = allocate_quotas(sizes, fractions.train, train_total, sizes);
  std::vector<std::size_t> room(sizes.size());
  for (std::size_t g = 0; g < sizes.size(); ++g) room[g] = sizes[g] - train_quota[g];
  const auto val_quota = allocate_quotas(sizes, fractions.validation, val_total, room);

  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t r = 0; r < groups[g].size(); ++r) {
      Split s = Split::Test;
      if (r < train_quota[g]) {
        s = Split::Train;
      } else if (r < train_quota[g] + val_quota[g]) {
        s = Split::Validation;
      }
      out.split[groups[g][r]] = s;
    }
    if (labels.task == Task::MultiClass && train_quota[g] == 0) {
      throw ValidationError("class " + std::to_string(g) + " has no training examples after the split", g);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset text format.

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  for (std::string tok; ss >> tok;) tokens.push_back(std::move(tok));
  return tokens;
}

template <typename T>
T parse_number(const std::string& tok, std::size_t line, const char* what) {
  std::istringstream ss(tok);
  T value{};
  ss >> value;
  if (!ss || !ss.eof()) throw ParseError(line, std::string("expected ") + what + ", got '" + tok + "'");
  if constexpr (std::is_unsigned_v<T>) {
    if (tok.starts_with('-')) throw ParseError(line, std::string("expected ") + what + ", got '" + tok + "'");
  }
  return value;
}

}  // namespace

Dataset parse_dataset(std::istream& in) {
  std::optional<std::size_t> num_nodes;
  std::vector<std::string> type_names;
  bool have_types = false;
  std::optional<Task> task;
  std::size_t num_classes = 0;
  std::vector<std::optional<NodeTypeId>> node_types;
  std::vector<Edge> edges;
  std::vector<std::size_t> edge_lines;
  std::map<NodeTypeId, TypeFeatures> features;
  std::map<NodeTypeId, std::size_t> feature_lines;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> label_records;

  TypeFeatures* open_block = nullptr;
  std::vector<double> block_values;
  std::size_t block_width = 0;
  auto close_block = [&] {
    if (open_block == nullptr) return;
    open_block->block = DenseMatrix(open_block->nodes.size(), block_width);
    std::copy(block_values.begin(), block_values.end(), open_block->block.values().begin());
    open_block = nullptr;
    block_values.clear();
  };

  auto require_n = [&](std::size_t line) {
    if (!num_nodes) throw ParseError(line, "record before the 'N <count>' header");
    return *num_nodes;
  };
  auto resolve_type = [&](const std::string& name, std::size_t line) {
    if (!have_types) {
      type_names = {"node"};
      have_types = true;
    }
    for (std::size_t i = 0; i < type_names.size(); ++i) {
      if (type_names[i] == name) return NodeTypeId{static_cast<std::uint16_t>(i)};
    }
    throw ParseError(line, "unknown node type '" + name + "'");
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto tok = tokenize(raw);
    if (tok.empty()) continue;
    const std::string& key = tok[0];

    if (open_block != nullptr && key != "N" && key != "TYPES" && key != "TASK" && key != "NODE" && key != "EDGE" &&
        key != "FEAT" && key != "LABEL") {
      if (tok.size() != block_width + 1) {
        throw ParseError(line_no, "feature row needs a node id and " + std::to_string(block_width) + " values");
      }
      const auto v = parse_number<NodeId>(tok[0], line_no, "node id");
      if (v >= require_n(line_no)) throw ValidationError("line " + std::to_string(line_no) + ": node index out of range");
      open_block->nodes.push_back(v);
      for (std::size_t c = 1; c < tok.size(); ++c) block_values.push_back(parse_number<double>(tok[c], line_no, "number"));
      continue;
    }
    close_block();

    if (key == "N") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'N <count>'");
      if (num_nodes) throw ParseError(line_no, "duplicate N header");
      num_nodes = parse_number<std::size_t>(tok[1], line_no, "node count");
      node_types.assign(*num_nodes, std::nullopt);
    } else if (key == "TYPES") {
      if (tok.size() < 2) throw ParseError(line_no, "expected 'TYPES <name...>'");
      if (have_types) throw ParseError(line_no, "TYPES must precede NODE/FEAT records and appear once");
      type_names.assign(tok.begin() + 1, tok.end());
      have_types = true;
      try {
        TypeRegistry check(type_names);
      } catch (const ValidationError& e) {
        throw ParseError(line_no, e.what());
      }
    } else if (key == "TASK") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'TASK multiclass|multilabel <K>'");
      if (tok[1] == "multiclass") {
        task = Task::MultiClass;
      } else if (tok[1] == "multilabel") {
        task = Task::MultiLabel;
      } else {
        throw ParseError(line_no, "unknown task '" + tok[1] + "'");
      }
      num_classes = parse_number<std::size_t>(tok[2], line_no, "class count");
      if (num_classes == 0) throw ParseError(line_no, "class count must be positive");
    } else if (key == "NODE") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'NODE <id> <type>'");
      const auto v = parse_number<NodeId>(tok[1], line_no, "node id");
      if (v >= require_n(line_no)) throw ValidationError("line " + std::to_string(line_no) + ": node index out of range");
      if (node_types[v]) throw ValidationError("line " + std::to_string(line_no) + ": node " + tok[1] + " typed twice");
      node_types[v] = resolve_type(tok[2], line_no);
    } else if (key == "EDGE") {
      if (tok.size() != 3 && !(tok.size() == 4 && tok[3] == "directed")) {
        throw ParseError(line_no, "expected 'EDGE <src> <dst> [directed]'");
      }
      require_n(line_no);
      edges.push_back({parse_number<NodeId>(tok[1], line_no, "node id"), parse_number<NodeId>(tok[2], line_no, "node id"),
                       tok.size() == 4});
      edge_lines.push_back(line_no);
    } else if (key == "FEAT") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'FEAT <type> <width>'");
      require_n(line_no);
      const NodeTypeId t = resolve_type(tok[1], line_no);
      if (features.contains(t)) throw ParseError(line_no, "duplicate FEAT block for type '" + tok[1] + "'");
      block_width = parse_number<std::size_t>(tok[2], line_no, "width");
      open_block = &features[t];
      feature_lines[t] = line_no;
    } else if (key == "LABEL") {
      if (tok.size() != 3) throw ParseError(line_no, "expected 'LABEL <id> <class[,class...]>'");
      label_records.emplace_back(line_no, tok);
    } else {
      throw ParseError(line_no, "unknown record '" + key + "'");
    }
  }
  close_block();

  if (!num_nodes) throw ParseError(line_no, "missing 'N <count>' header");
  if (!have_types) type_names = {"node"};

  std::vector<NodeTypeId> resolved(*num_nodes);
  for (std::size_t v = 0; v < *num_nodes; ++v) {
    if (node_types[v]) {
      resolved[v] = *node_types[v];
    } else if (type_names.size() == 1) {
      resolved[v] = NodeTypeId{0};
    } else {
      throw ValidationError("node " + std::to_string(v) + " has no NODE record", v);
    }
  }

  Dataset ds;
  try {
    ds.graph = HeteroGraph(TypeRegistry(type_names), std::move(resolved), std::move(edges));
  } catch (const ValidationError& e) {
    if (e.record() < edge_lines.size()) {
      throw ValidationError("line " + std::to_string(edge_lines[e.record()]) + ": " + e.what(), e.record());
    }
    throw;
  }

  for (auto& [type, tf] : features) {
    try {
      (void)build_feature_matrix(ds.graph, {{type, tf}});
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(feature_lines[type]) + ": " + e.what());
    }
  }
  ds.features = std::move(features);

  if (!label_records.empty() && !task) throw ParseError(label_records.front().first, "LABEL records require a TASK header");
  ds.labels.task = task.value_or(Task::MultiClass);
  ds.labels.num_classes = num_classes;
  for (const auto& [line, tok] : label_records) {
    const auto v = parse_number<NodeId>(tok[1], line, "node id");
    if (v >= *num_nodes) throw ValidationError("line " + std::to_string(line) + ": node index out of range");
    std::vector<std::uint32_t> cls;
    std::istringstream parts(tok[2] == "-" ? std::string() : tok[2]);
    for (std::string part; std::getline(parts, part, ',');) {
      const auto c = parse_number<std::uint32_t>(part, line, "class index");
      if (c >= num_classes) throw ValidationError("line " + std::to_string(line) + ": class index out of range");
      cls.push_back(c);
    }
    std::sort(cls.begin(), cls.end());
    if (std::adjacent_find(cls.begin(), cls.end()) != cls.end()) {
      throw ValidationError("line " + std::to_string(line) + ": repeated class index");
    }
    if (ds.labels.task == Task::MultiClass && cls.size() != 1) {
      throw ValidationError("line " + std::to_string(line) + ": multiclass labels take exactly one class");
    }
    if (!ds.labels.classes.emplace(v, std::move(cls)).second) {
      throw ValidationError("line " + std::to_string(line) + ": node labeled twice");
    }
  }
  return ds;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  try {
    return parse_dataset(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what(), e.record());
  }
}

HeteroGraph load_graph(const std::string& path) { return load_dataset(path).graph; }

void write_dataset(std::ostream& out, const Dataset& ds) {
  const HeteroGraph& g = ds.graph;
  out << "N " << g.num_nodes() << '\n';
  out << "TYPES";
  for (const auto& name : g.types().names()) out << ' ' << name;
  out << '\n';
  if (ds.labels.num_classes > 0) {
    out << "TASK " << (ds.labels.task == Task::MultiClass ? "multiclass" : "multilabel") << ' '
        << ds.labels.num_classes << '\n';
  }
  for (NodeId v = 0; v < g.num_nodes(); ++v) out << "NODE " << v << ' ' << g.types().name(g.type_of(v)) << '\n';
  for (const Edge& e : g.edges()) {
    out << "EDGE " << e.src << ' ' << e.dst << (e.directed ? " directed" : "") << '\n';
  }
  char buf[32];
  for (const auto& [type, tf] : ds.features) {
    out << "FEAT " << g.types().name(type) << ' ' << tf.block.cols() << '\n';
    for (std::size_t r = 0; r < tf.nodes.size(); ++r) {
      out << tf.nodes[r];
      for (const double x : tf.block.row(r)) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << ' ' << buf;
      }
      out << '\n';
    }
  }
  for (const auto& [v, cls] : ds.labels.classes) {
    out << "LABEL " << v << ' ';
    if (cls.empty()) out << '-';
    for (std::size_t i = 0; i < cls.size(); ++i) out << (i ? "," : "") << cls[i];
    out << '\n';
  }
}

void save_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_dataset(out, dataset);
}

}  // namespace motifcnn
