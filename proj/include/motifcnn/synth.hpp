#pragma once

#include <cstdint>
#include <string>

#include "motifcnn/graph.hpp"
#include "motifcnn/motif.hpp"

namespace motifcnn {

/// Single node type "node", each pair linked independently with probability
/// p. A pair is directed (random orientation) with probability
/// `directed_fraction`, undirected otherwise.
HeteroGraph erdos_renyi_gnp(std::size_t n, double p, std::uint64_t seed, double directed_fraction = 0.0);
/// Single node type, exactly m distinct undirected edges chosen uniformly.
HeteroGraph erdos_renyi_gnm(std::size_t n, std::size_t m, std::uint64_t seed);

/// As erdos_renyi_gnp, with `num_types` node types ("t0", "t1", ...) drawn
/// uniformly per node.
HeteroGraph random_typed_graph(std::size_t n, double p, std::size_t num_types, double directed_fraction,
                               std::uint64_t seed);

/// Authors (A), papers (P) and venues (V). Each author has a class and
/// writes a few papers, a strict majority of them at venues of that class.
/// Papers cite other papers (P->P). Only venues carry features: their class
/// one-hot plus `extra_dims` zero columns, all with Gaussian noise of scale
/// `noise`. Authors are labeled with their class.
struct PlantedHeteroConfig {
  std::size_t authors = 300;
  std::size_t min_papers = 3;
  std::size_t max_papers = 5;
  std::size_t venues_per_class = 5;
  std::size_t classes = 4;
  std::size_t citations = 4;
  std::size_t extra_dims = 4;
  double noise = 0.0;
  std::uint64_t seed = 1;
};
Dataset planted_hetero(const PlantedHeteroConfig& config);

/// Two equal blocks; pairs link with p_in inside a block and p_out across.
/// Features are the block one-hot plus Gaussian noise of scale `noise`;
/// every node is labeled with its block.
struct SbmConfig {
  std::size_t nodes = 200;
  double p_in = 0.2;
  double p_out = 0.02;
  double noise = 1.0;
  std::uint64_t seed = 1;
};
Dataset sbm_homo(const SbmConfig& config);

/// Two wildcard positions joined by an undirected edge; target 0, context 1.
MotifPattern edge_motif();
/// Three wildcard positions pairwise joined; target 0, context 1.
MotifPattern triangle_motif();
/// Author target, paper auxiliary, venue context: A - P - V.
MotifPattern author_paper_venue_motif(const TypeRegistry& types);

}  // namespace motifcnn
