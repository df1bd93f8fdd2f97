#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "motifcnn/graph.hpp"
#include "motifcnn/model.hpp"
#include "motifcnn/motif.hpp"
#include "motifcnn/training.hpp"

namespace motifcnn {

/// A trained model plus what is needed to evaluate it again.
struct Checkpoint {
  Model model;
  Task task = Task::MultiClass;
  /// motif_list_hash of the motifs the model was trained with.
  std::uint64_t motif_hash = 0;
  TrainConfig config;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// FNV-1a over the canonical JSON of each motif, in order.
std::uint64_t motif_list_hash(std::span<const Motif> motifs, const TypeRegistry& types);

/// Versioned text format; parameters are written as hex floats so a
/// save/load round trip is bit-exact.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace motifcnn
