#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "motifcnn/graph.hpp"
#include "motifcnn/model.hpp"
#include "motifcnn/motif.hpp"

namespace motifcnn {

struct TrainConfig {
  std::size_t max_epochs = 200;
  /// Stop once this many epochs pass without a new best validation loss.
  std::size_t window = 10;
  double learning_rate = 0.01;
  double dropout = 0.0;
  std::size_t filters = 16;
  std::size_t layers = 3;
  std::uint64_t seed = 1;
  double train_fraction = 0.2;
  double validation_fraction = 0.1;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws std::invalid_argument on non-positive counts or rates out of range.
void validate(const TrainConfig& config);

/// Sets one field from its key=value text form. Throws ParseError on an
/// unknown key or a malformed value.
void set_config_value(TrainConfig& config, const std::string& key, const std::string& value);
/// key=value lines; blank lines and '#' comments ignored. Unlisted keys keep
/// their defaults.
TrainConfig parse_train_config(std::istream& in);
TrainConfig load_train_config(const std::string& path);
void write_train_config(std::ostream& out, const TrainConfig& config);

struct Metrics {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  /// Epoch whose parameters were kept (lowest validation loss).
  std::size_t best_epoch = 0;
  std::optional<Metrics> test;

  /// `epoch,train_loss,val_loss,seconds` with a header line. Losses are
  /// written with round-trip precision.
  void write_csv(std::ostream& out) const;
  /// Equal in everything but wall-clock time.
  bool same_run(const TrainReport& other) const;
};

/// Training hit a non-finite loss. `report` holds the epochs completed so far.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, TrainReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

struct TrainData {
  const DenseMatrix& features;
  std::span<const MotifTensor> tensors;
  const LabelSet& labels;
};

/// Full-batch Adam on the training split. After each update the model is
/// evaluated without dropout; the reported losses are means over the split's
/// nodes. Parameters from the best validation epoch are restored at the end.
/// Test metrics are filled in when the test split is non-empty.
TrainReport train(Model& model, const TrainData& data, const TrainConfig& config);

/// Per node: the predicted class (multiclass argmax, lowest index on ties)
/// or the set of classes with logit >= 0 (multilabel).
std::vector<std::vector<std::uint32_t>> predict(const DenseMatrix& logits, Task task);

/// Micro-F1 pools TP/FP/FN over classes; macro-F1 averages per-class F1 with
/// F1 = 1 for a class that is neither present nor predicted; accuracy counts
/// exact matches of the predicted class set. Throws ValidationError for an
/// empty split.
Metrics evaluate_f1(std::span<const std::vector<std::uint32_t>> predictions, const LabelSet& labels, Split split);

/// Eval-mode forward + prediction + metrics on one split.
Metrics evaluate(const Model& model, const TrainData& data, Split split);

/// Everything needed to train on a dataset with a motif list.
struct Experiment {
  FeatureMatrix features;
  std::vector<MotifTensor> tensors;
  LabelSet labels;

  TrainData data() const { return {features.data, tensors, labels}; }
};

/// Throws ValidationError without motifs or labelled nodes.
void check_trainable(const Dataset& dataset, std::span<const Motif> motifs);

/// Builds features and tensors and splits the labels with config.seed.
Experiment prepare_experiment(const Dataset& dataset, std::span<const Motif> motifs, const TrainConfig& config,
                              const EnumerationOptions& options = {});

ModelConfig model_config(const Experiment& experiment, std::span<const Motif> motifs, const TrainConfig& config);

}  // namespace motifcnn
