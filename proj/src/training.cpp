#include "motifcnn/training.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "motifcnn/errors.hpp"
#include "motifcnn/layers.hpp"
#include "motifcnn/optim.hpp"

namespace motifcnn {

// --- Config -----------------------------------------------------------------

void validate(const TrainConfig& c) {
  if (c.max_epochs == 0 || c.window == 0 || c.filters == 0 || c.layers == 0) {
    throw std::invalid_argument("max_epochs, window, filters and layers must be positive");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and non-negative");
  }
  if (!(c.train_fraction > 0.0) || !(c.validation_fraction >= 0.0) ||
      !(c.train_fraction + c.validation_fraction <= 1.0)) {
    throw std::invalid_argument("split fractions must be positive and sum to at most 1");
  }
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ParseError(0, "bad value for " + key + ": '" + text + "'");
  return value;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void set_config_value(TrainConfig& c, const std::string& key, const std::string& value) {
  if (key == "max_epochs") {
    c.max_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "window") {
    c.window = parse_number<std::size_t>(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_number<double>(key, value);
  } else if (key == "dropout") {
    c.dropout = parse_number<double>(key, value);
  } else if (key == "filters") {
    c.filters = parse_number<std::size_t>(key, value);
  } else if (key == "layers") {
    c.layers = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "train_fraction") {
    c.train_fraction = parse_number<double>(key, value);
  } else if (key == "validation_fraction") {
    c.validation_fraction = parse_number<double>(key, value);
  } else {
    throw ParseError(0, "unknown config key '" + key + "'");
  }
}

TrainConfig parse_train_config(std::istream& in) {
  TrainConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    try {
      set_config_value(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.detail());
    }
  }
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open config " + path);
  try {
    return parse_train_config(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

void write_train_config(std::ostream& out, const TrainConfig& c) {
  char buf[64];
  auto real = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "max_epochs=" << c.max_epochs << '\n'
      << "window=" << c.window << '\n'
      << "learning_rate=" << real(c.learning_rate) << '\n'
      << "dropout=" << real(c.dropout) << '\n'
      << "filters=" << c.filters << '\n'
      << "layers=" << c.layers << '\n'
      << "seed=" << c.seed << '\n'
      << "train_fraction=" << real(c.train_fraction) << '\n'
      << "validation_fraction=" << real(c.validation_fraction) << '\n';
}

// --- Report -----------------------------------------------------------------

void TrainReport::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,val_loss,seconds\n";
  char buf[128];
  for (const auto& e : epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.6f\n", e.epoch, e.train_loss, e.validation_loss, e.seconds);
    out << buf;
  }
}

bool TrainReport::same_run(const TrainReport& other) const {
  if (epochs.size() != other.epochs.size() || best_epoch != other.best_epoch || test != other.test) return false;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& a = epochs[i];
    const auto& b = other.epochs[i];
    if (a.epoch != b.epoch || a.train_loss != b.train_loss || a.validation_loss != b.validation_loss) return false;
  }
  return true;
}

// --- Training ---------------------------------------------------------------

namespace {

double mean_loss(const DenseMatrix& logits, const LabelSet& labels, Split split) {
  const double n = static_cast<double>(labels.nodes(split).size());
  return task_loss(logits, labels, split).loss / n;
}

}  // namespace

TrainReport train(Model& model, const TrainData& data, const TrainConfig& config) {
  validate(config);
  if (data.labels.nodes(Split::Train).empty()) throw ValidationError("training split is empty");
  if (data.labels.nodes(Split::Validation).empty()) throw ValidationError("validation split is empty");

  std::mt19937_64 rng(config.seed);
  AdamState adam = adam_init(model.params);
  const AdamConfig adam_config{config.learning_rate};

  TrainReport report;
  ModelParams best = model.params;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    auto fwd = model_forward(model, data.features, data.tensors, Mode::Train, &rng);
    const LossResult loss = task_loss(fwd.logits, data.labels, Split::Train);
    if (!std::isfinite(loss.loss)) throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch), report);
    const ModelParams grads = model_backward(model, data.tensors, fwd.tape, loss.gradient);
    adam_step(model.params, grads, adam, adam_config);

    const auto eval = model_forward(model, data.features, data.tensors, Mode::Eval);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = mean_loss(eval.logits, data.labels, Split::Train);
    rec.validation_loss = mean_loss(eval.logits, data.labels, Split::Validation);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.epochs.push_back(rec);
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.validation_loss)) {
      throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch), report);
    }

    if (rec.validation_loss < best_loss) {
      best_loss = rec.validation_loss;
      report.best_epoch = epoch;
      best = model.params;
    } else if (epoch - report.best_epoch >= config.window) {
      break;
    }
  }
  model.params = std::move(best);
  if (!data.labels.nodes(Split::Test).empty()) report.test = evaluate(model, data, Split::Test);
  return report;
}

// --- Metrics ----------------------------------------------------------------

std::vector<std::vector<std::uint32_t>> predict(const DenseMatrix& logits, Task task) {
  std::vector<std::vector<std::uint32_t>> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto z = logits.row(i);
    if (task == Task::MultiClass) {
      if (z.empty()) continue;
      out[i].push_back(static_cast<std::uint32_t>(std::max_element(z.begin(), z.end()) - z.begin()));
    } else {
      for (std::size_t c = 0; c < z.size(); ++c) {
        if (z[c] >= 0.0) out[i].push_back(static_cast<std::uint32_t>(c));
      }
    }
  }
  return out;
}

Metrics evaluate_f1(std::span<const std::vector<std::uint32_t>> predictions, const LabelSet& labels, Split split) {
  const auto nodes = labels.nodes(split);
  if (nodes.empty()) throw ValidationError("metrics over an empty split");
  const std::size_t k = labels.labels.num_classes;
  std::vector<std::size_t> tp(k), fp(k), fn(k);
  std::size_t exact = 0;
  for (const NodeId v : nodes) {
    if (v >= predictions.size()) throw ShapeError("no prediction for node " + std::to_string(v));
    std::vector<std::uint32_t> pred = predictions[v];
    std::sort(pred.begin(), pred.end());
    const auto& truth = labels.labels.classes.at(v);
    if (pred == truth) ++exact;
    for (std::size_t c = 0; c < k; ++c) {
      const bool p = std::binary_search(pred.begin(), pred.end(), c);
      const bool t = std::binary_search(truth.begin(), truth.end(), c);
      tp[c] += p && t;
      fp[c] += p && !t;
      fn[c] += !p && t;
    }
  }
  std::size_t all_tp = 0, all_fp = 0, all_fn = 0;
  double macro = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    all_tp += tp[c];
    all_fp += fp[c];
    all_fn += fn[c];
    const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
    macro += denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  Metrics m;
  const std::size_t denom = 2 * all_tp + all_fp + all_fn;
  m.micro_f1 = denom == 0 ? 1.0 : 2.0 * static_cast<double>(all_tp) / static_cast<double>(denom);
  m.macro_f1 = k == 0 ? 1.0 : macro / static_cast<double>(k);
  m.accuracy = static_cast<double>(exact) / static_cast<double>(nodes.size());
  return m;
}

Metrics evaluate(const Model& model, const TrainData& data, Split split) {
  const auto fwd = model_forward(model, data.features, data.tensors, Mode::Eval);
  const auto pred = predict(fwd.logits, data.labels.labels.task);
  return evaluate_f1(pred, data.labels, split);
}

void check_trainable(const Dataset& dataset, std::span<const Motif> motifs) {
  if (motifs.empty()) throw ValidationError("at least one motif is required");
  if (dataset.labels.classes.empty()) throw ValidationError("dataset has no labelled nodes");
}

Experiment prepare_experiment(const Dataset& dataset, std::span<const Motif> motifs, const TrainConfig& config,
                              const EnumerationOptions& options) {
  validate(config);
  check_trainable(dataset, motifs);
  Experiment e;
  e.features = dataset.feature_matrix();
  for (const Motif& m : motifs) e.tensors.push_back(build_motif_tensor(dataset.graph, m, options));
  e.labels = split_labels(dataset.labels, {config.train_fraction, config.validation_fraction}, config.seed);
  return e;
}

ModelConfig model_config(const Experiment& experiment, std::span<const Motif> motifs, const TrainConfig& config) {
  ModelConfig mc;
  mc.input_dim = experiment.features.data.cols();
  mc.filters = config.filters;
  mc.num_classes = experiment.labels.labels.num_classes;
  mc.num_layers = config.layers;
  for (const Motif& m : motifs) mc.motif_roles.push_back(m.num_roles());
  mc.dropout = config.dropout;
  return mc;
}

}  // namespace motifcnn
