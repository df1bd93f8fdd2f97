#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motifcnn/graph.hpp"
#include "motifcnn/linalg.hpp"

namespace motifcnn {

inline constexpr std::size_t kMaxMotifNodes = 5;

/// Motif positions are small local ids 0..size-1.
using Position = std::uint32_t;

struct MotifEdge {
  Position src = 0;
  Position dst = 0;
  /// An undirected pattern edge is realized by any link between the two
  /// graph nodes; a directed one needs a directed edge src->dst.
  bool directed = false;
  friend bool operator==(const MotifEdge&, const MotifEdge&) = default;
};

/// A pattern as written by the user: everything but the role map.
struct MotifPattern {
  std::string name;
  /// Per position; std::nullopt matches any node type.
  std::vector<std::optional<NodeTypeId>> node_types;
  std::vector<MotifEdge> edges;
  Position target = 0;
  Position context = 1;
  /// Auxiliary positions. Must be every position other than target and context.
  std::vector<Position> aux;
};

/// Parses the JSON motif description, resolving type names against `types`. A node
/// without "type" (or with "*") matches every type. "aux" defaults to all
/// remaining positions. Throws ParseError on malformed input.
MotifPattern parse_motif(std::string_view json, const TypeRegistry& types);
/// As parse_motif; the motif name defaults to the file stem.
MotifPattern load_motif(const std::string& path, const TypeRegistry& types);

/// A validated pattern with its semantic roles.
class Motif {
 public:
  const MotifPattern& pattern() const { return pattern_; }
  const std::string& name() const { return pattern_.name; }
  std::size_t size() const { return pattern_.node_types.size(); }
  Position target() const { return pattern_.target; }
  Position context() const { return pattern_.context; }

  /// 0 for the target, 1..num_roles() otherwise. The context is always role 1.
  std::uint32_t role(Position p) const { return roles_[p]; }
  std::span<const std::uint32_t> roles() const { return roles_; }
  std::size_t num_roles() const { return num_roles_; }
  /// Positions with the given role, ascending.
  std::vector<Position> positions_with_role(std::uint32_t role) const;

  /// Set when the context is structurally symmetric to an auxiliary node and
  /// therefore shares its role.
  bool context_shares_role() const { return context_shares_role_; }

  /// Automorphisms of the typed, directed pattern fixing the target. Each
  /// entry maps position -> image position. Always contains the identity.
  const std::vector<std::vector<Position>>& automorphisms() const { return automorphisms_; }

  /// Three positions, pairwise joined by undirected edges.
  bool is_triangle() const;
  /// Three positions joined by two edges (any direction) through a middle.
  bool is_path3() const;

 private:
  friend Motif compute_role_map(MotifPattern pattern);

  MotifPattern pattern_;
  std::vector<std::uint32_t> roles_;
  std::size_t num_roles_ = 0;
  bool context_shares_role_ = false;
  std::vector<std::vector<Position>> automorphisms_;
};

/// Validates the pattern and derives roles: the orbits of the non-target
/// positions under automorphisms fixing the target. The context's orbit is
/// role 1; other orbits follow in order of their smallest position.
/// Throws ValidationError for disconnected, oversized or inconsistent
/// patterns.
Motif compute_role_map(MotifPattern pattern);

/// Canonical JSON form (the parse_motif input format, fixed key order).
std::string motif_to_json(const Motif& motif, const TypeRegistry& types);

/// One embedding of a motif: mapping[p] is the graph node at position p.
struct MotifInstance {
  NodeId target = 0;
  std::vector<NodeId> mapping;
  friend auto operator<=>(const MotifInstance&, const MotifInstance&) = default;
};

/// [target, nodes of role 1 sorted, nodes of role 2 sorted, ...]. Two
/// embeddings with the same key are the same instance.
std::vector<NodeId> instance_key(const Motif& motif, const MotifInstance& instance);

/// Whether `mapping` is an injective, type- and edge-consistent embedding
/// (extra graph edges among the nodes are allowed).
bool is_embedding(const HeteroGraph& graph, const Motif& motif, std::span<const NodeId> mapping);

struct EnumerationOptions {
  /// Upper bound on the total number of instances; exceeding it throws
  /// ResourceError.
  std::size_t max_instances = 100'000'000;
};

/// All instances (for every target, or only `target`), one per key, each
/// represented by its lexicographically smallest mapping. Ordered by key.
/// Output is independent of the thread count.
std::vector<MotifInstance> enumerate_instances(const HeteroGraph& graph, const Motif& motif,
                                               std::optional<NodeId> target = std::nullopt,
                                               const EnumerationOptions& options = {});

/// Exhaustive reference enumeration over all injective assignments. Same
/// output contract as enumerate_instances. Throws ResourceError when the graph
/// has more than `max_nodes` nodes.
std::vector<MotifInstance> brute_force_instances(const HeteroGraph& graph, const Motif& motif,
                                                 std::optional<NodeId> target = std::nullopt,
                                                 std::size_t max_nodes = 60);

/// Every triangle of the undirected view of the graph once, as sorted node
/// triples in ascending order. Degree-ordered orientation with sorted
/// neighbor intersection.
std::vector<std::array<NodeId, 3>> find_triangles(const HeteroGraph& graph);

/// Same output as enumerate_instances for a triangle motif.
std::vector<MotifInstance> enumerate_triangles(const HeteroGraph& graph, const Motif& motif,
                                               const EnumerationOptions& options = {});

/// Same output as enumerate_instances for a 3-node path motif, by scanning
/// neighbor pairs of every middle node.
std::vector<MotifInstance> enumerate_wedges(const HeteroGraph& graph, const Motif& motif,
                                            const EnumerationOptions& options = {});

/// Role-indexed motif-adjacency counts plus per-node instance counts.
struct MotifTensor {
  /// roles[k-1](i, j): times node j filled a role-k position in an instance
  /// targeted at node i.
  std::vector<SparseMatrix> roles;
  /// Number of instances targeted at each node.
  std::vector<std::int64_t> instance_counts;

  std::size_t num_nodes() const { return instance_counts.size(); }
  std::size_t num_roles() const { return roles.size(); }
  std::int64_t total_instances() const;
  friend bool operator==(const MotifTensor&, const MotifTensor&) = default;
};

MotifTensor tensor_from_instances(std::size_t num_nodes, const Motif& motif, std::span<const MotifInstance> instances);

/// Picks the triangle or wedge enumerator when the motif allows it.
MotifTensor build_motif_tensor(const HeteroGraph& graph, const Motif& motif, const EnumerationOptions& options = {});

/// Writes role_<k>.txt ("i j count" lines) for each role and diag.txt
/// ("i L_i" for every node) into `dir`, creating it if needed.
void write_motif_tensor(const std::string& dir, const MotifTensor& tensor);
MotifTensor read_motif_tensor(const std::string& dir, std::size_t num_nodes, std::size_t num_roles);

}  // namespace motifcnn
