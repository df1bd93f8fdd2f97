#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motifcnn/linalg.hpp"

namespace motifcnn {

using NodeId = std::uint32_t;

struct NodeTypeId {
  std::uint16_t value = 0;
  friend auto operator<=>(const NodeTypeId&, const NodeTypeId&) = default;
};

/// Dense, name-unique set of node types.
class TypeRegistry {
 public:
  TypeRegistry() = default;
  explicit TypeRegistry(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(NodeTypeId id) const { return names_.at(id.value); }
  std::optional<NodeTypeId> find(std::string_view name) const;
  std::span<const std::string> names() const { return names_; }

  friend bool operator==(const TypeRegistry&, const TypeRegistry&) = default;

 private:
  std::vector<std::string> names_;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  bool directed = false;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Which incident links of a node to look at.
enum class LinkKind : std::uint8_t {
  Undirected,  // undirected edges
  Out,         // directed edges leaving the node
  In,          // directed edges entering the node
  Any,         // union of the three, deduplicated
};

/// Typed graph with mixed directed/undirected edges. Immutable once built.
class HeteroGraph {
 public:
  HeteroGraph() = default;

  /// Validates: node indices in range, no self-loops, no duplicate edges. An
  /// undirected edge conflicts with any other edge on the same node pair.
  /// Throws ValidationError whose record() is the offending edge index.
  HeteroGraph(TypeRegistry types, std::vector<NodeTypeId> node_types, std::vector<Edge> edges);

  std::size_t num_nodes() const { return node_types_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const TypeRegistry& types() const { return types_; }
  NodeTypeId type_of(NodeId v) const { return node_types_[v]; }
  std::span<const NodeTypeId> node_types() const { return node_types_; }
  std::span<const Edge> edges() const { return edges_; }

  /// Sorted ascending.
  std::span<const NodeId> neighbors(NodeId v, LinkKind kind = LinkKind::Any) const;
  bool has_edge(NodeId u, NodeId v, LinkKind kind = LinkKind::Any) const;
  /// Undirected + outgoing + incoming edge count.
  std::size_t degree(NodeId v) const;

  friend bool operator==(const HeteroGraph& a, const HeteroGraph& b) {
    return a.types_ == b.types_ && a.node_types_ == b.node_types_ && a.edges_ == b.edges_;
  }

 private:
  struct Adjacency {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> targets;
  };

  const Adjacency& adjacency(LinkKind kind) const { return adjacency_[static_cast<std::size_t>(kind)]; }

  TypeRegistry types_;
  std::vector<NodeTypeId> node_types_;
  std::vector<Edge> edges_;
  Adjacency adjacency_[4];
};

/// Column range of one node type inside the joint feature matrix.
struct FeatureSlice {
  std::size_t begin = 0;
  std::size_t width = 0;
  /// True when the type had no supplied features and got identity columns.
  bool one_hot = false;
};

/// Joint zero-padded feature matrix: every type owns a column slice and a
/// node's entries outside its own slice are zero.
struct FeatureMatrix {
  DenseMatrix data;
  std::vector<FeatureSlice> slices;  // indexed by NodeTypeId::value
};

/// Supplied features for one node type: `block` row r belongs to `nodes[r]`.
struct TypeFeatures {
  std::vector<NodeId> nodes;
  DenseMatrix block;
  friend bool operator==(const TypeFeatures&, const TypeFeatures&) = default;
};

/// Types without an entry get a one-hot identity block (one column per node
/// of that type, ordered by node id). Throws ValidationError when a node is
/// missing from, or misplaced in, a supplied block.
FeatureMatrix build_feature_matrix(const HeteroGraph& graph,
                                   const std::map<NodeTypeId, TypeFeatures>& per_type);

enum class Task : std::uint8_t { MultiClass, MultiLabel };

enum class Split : std::uint8_t { None, Train, Validation, Test };

/// Partial labels as read from a dataset file.
struct Labels {
  Task task = Task::MultiClass;
  std::size_t num_classes = 0;
  /// node -> sorted class indices (exactly one for MultiClass).
  std::map<NodeId, std::vector<std::uint32_t>> classes;
  friend bool operator==(const Labels&, const Labels&) = default;
};

struct LabelSet {
  Labels labels;
  std::vector<Split> split;  // indexed by node; Split::None for unlabeled nodes

  Split split_of(NodeId v) const { return v < split.size() ? split[v] : Split::None; }
  std::vector<NodeId> nodes(Split which) const;
};

struct SplitFractions {
  double train = 0.2;
  double validation = 0.1;
};

/// Deterministic for a given seed. Multi-class labels are stratified per
/// class with largest-remainder rounding so the global counts equal
/// round(fraction * labeled). Throws ValidationError when a class ends up
/// with no training node.
LabelSet split_labels(const Labels& labels, SplitFractions fractions, std::uint64_t seed);

/// Graph plus supplied features and labels: the unit stored in a dataset file.
struct Dataset {
  HeteroGraph graph;
  std::map<NodeTypeId, TypeFeatures> features;
  Labels labels;

  FeatureMatrix feature_matrix() const { return build_feature_matrix(graph, features); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

Dataset parse_dataset(std::istream& in);
Dataset load_dataset(const std::string& path);
HeteroGraph load_graph(const std::string& path);

void write_dataset(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::string& path, const Dataset& dataset);

}  // namespace motifcnn
