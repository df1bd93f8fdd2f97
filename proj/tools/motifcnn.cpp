// Command-line front end: synth, build-tensor, train, eval, gradcheck.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "motifcnn/checkpoint.hpp"
#include "motifcnn/errors.hpp"
#include "motifcnn/gradcheck.hpp"
#include "motifcnn/motif.hpp"
#include "motifcnn/parallel.hpp"
#include "motifcnn/synth.hpp"
#include "motifcnn/training.hpp"

namespace fs = std::filesystem;
using namespace motifcnn;

namespace {

struct Common {
  std::string graph;
  std::vector<std::string> motifs;
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string out;
  std::string cache;
  std::size_t max_instances = EnumerationOptions{}.max_instances;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<Motif> load_motifs(const std::vector<std::string>& paths, const TypeRegistry& types) {
  std::vector<Motif> motifs;
  for (const auto& path : paths) {
    try {
      motifs.push_back(compute_role_map(load_motif(path, types)));
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }
  return motifs;
}

TrainConfig resolve_config(const Common& c) {
  TrainConfig cfg = c.config.empty() ? TrainConfig{} : load_train_config(c.config);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError(0, "--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed_set) cfg.seed = c.seed;
  validate(cfg);
  return cfg;
}

void apply_threads(const Common& c) {
  if (c.threads > 0) set_num_threads(c.threads);
}

/// Builds the tensor, or reuses one cached under a key derived from the
/// dataset bytes and the canonical motif.
MotifTensor tensor_for(const Dataset& ds, const std::string& dataset_bytes, const Motif& motif, const Common& c) {
  const EnumerationOptions options{c.max_instances};
  if (c.cache.empty()) return build_motif_tensor(ds.graph, motif, options);
  const std::uint64_t key = fnv1a(motif_to_json(motif, ds.graph.types()), fnv1a(dataset_bytes));
  const fs::path dir = fs::path(c.cache) / hex64(key);
  if (fs::exists(dir / "diag.txt")) return read_motif_tensor(dir.string(), ds.graph.num_nodes(), motif.num_roles());
  MotifTensor t = build_motif_tensor(ds.graph, motif, options);
  write_motif_tensor(dir.string(), t);
  return t;
}

std::string instance_summary(const MotifTensor& t) {
  const std::int64_t total = t.total_instances();
  std::ostringstream s;
  s << "instances: " << total;
  if (total == 0) return s.str();
  std::size_t targets = 0;
  std::int64_t first = -1;
  bool uniform = true;
  for (const auto n : t.instance_counts) {
    if (n == 0) continue;
    ++targets;
    if (first < 0) first = n;
    uniform = uniform && n == first;
  }
  if (uniform) {
    s << " (" << first << " per target)";
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (mean %.2f per target over %zu targets)",
                  static_cast<double>(total) / static_cast<double>(targets), targets);
    s << buf;
  }
  return s.str();
}

void print_metrics(const char* label, const Metrics& m) {
  std::printf("%s micro_f1=%.6f macro_f1=%.6f accuracy=%.6f\n", label, m.micro_f1, m.macro_f1, m.accuracy);
}

int cmd_synth(const std::string& kind, std::size_t size, double noise, const Common& c) {
  Dataset ds;
  std::vector<MotifPattern> motifs;
  if (kind == "planted-hetero") {
    PlantedHeteroConfig pc;
    if (size > 0) pc.authors = size;
    pc.noise = noise;
    pc.seed = c.seed;
    ds = planted_hetero(pc);
    motifs = {author_paper_venue_motif(ds.graph.types()), edge_motif()};
  } else if (kind == "sbm-homo") {
    SbmConfig sc;
    if (size > 0) sc.nodes = size;
    sc.noise = noise;
    sc.seed = c.seed;
    ds = sbm_homo(sc);
    motifs = {edge_motif(), triangle_motif()};
  } else {
    throw std::invalid_argument("unknown dataset kind '" + kind + "'");
  }
  const fs::path out(c.out);
  fs::create_directories(out / "motifs");
  save_dataset((out / "dataset.txt").string(), ds);
  for (auto& p : motifs) {
    std::ofstream f(out / "motifs" / (p.name + ".json"));
    f << motif_to_json(compute_role_map(p), ds.graph.types()) << '\n';
  }
  std::printf("wrote %s: %zu nodes, %zu edges, %zu labeled\n", (out / "dataset.txt").c_str(), ds.graph.num_nodes(),
              ds.graph.num_edges(), ds.labels.classes.size());
  return 0;
}

int cmd_build_tensor(const Common& c) {
  apply_threads(c);
  const Dataset ds = load_dataset(c.graph);
  const std::vector<Motif> motifs = load_motifs(c.motifs, ds.graph.types());
  for (const Motif& m : motifs) {
    const auto start = std::chrono::steady_clock::now();
    const MotifTensor t = build_motif_tensor(ds.graph, m, EnumerationOptions{c.max_instances});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!c.out.empty()) write_motif_tensor((fs::path(c.out) / m.name()).string(), t);
    std::printf("%s: roles %zu, %s, %.3f s\n", m.name().c_str(), m.num_roles(), instance_summary(t).c_str(), secs);
  }
  return 0;
}

int cmd_train(const Common& c) {
  apply_threads(c);
  const TrainConfig cfg = resolve_config(c);
  const std::string bytes = read_file(c.graph);
  std::istringstream in(bytes);
  Dataset ds;
  try {
    ds = parse_dataset(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), c.graph + ": " + e.detail());
  }
  const std::vector<Motif> motifs = load_motifs(c.motifs, ds.graph.types());
  try {
    check_trainable(ds, motifs);
  } catch (const ValidationError& e) {
    throw ValidationError(c.graph + ": " + e.what());
  }

  Experiment e;
  e.features = ds.feature_matrix();
  for (const Motif& m : motifs) e.tensors.push_back(tensor_for(ds, bytes, m, c));
  e.labels = split_labels(ds.labels, {cfg.train_fraction, cfg.validation_fraction}, cfg.seed);

  Checkpoint ck;
  ck.model = init_model(model_config(e, motifs, cfg), cfg.seed);
  ck.task = ds.labels.task;
  ck.motif_hash = motif_list_hash(motifs, ds.graph.types());
  ck.config = cfg;
  const TrainReport report = train(ck.model, e.data(), cfg);

  const fs::path out(c.out);
  fs::create_directories(out);
  save_checkpoint((out / "model.ckpt").string(), ck);
  {
    std::ofstream f(out / "report.csv");
    report.write_csv(f);
  }
  std::printf("epochs %zu, best epoch %zu, validation loss %.6f\n", report.epochs.size(), report.best_epoch,
              report.epochs[report.best_epoch - 1].validation_loss);
  if (report.test) print_metrics("test", *report.test);
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& split_name, const Common& c) {
  apply_threads(c);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const std::string bytes = read_file(c.graph);
  std::istringstream in(bytes);
  const Dataset ds = parse_dataset(in);
  const std::vector<Motif> motifs = load_motifs(c.motifs, ds.graph.types());
  if (motif_list_hash(motifs, ds.graph.types()) != ck.motif_hash) {
    throw ValidationError("motif list differs from the one the checkpoint was trained with");
  }
  if (ds.labels.task != ck.task) throw ValidationError("dataset task differs from the checkpoint task");

  Experiment e;
  e.features = ds.feature_matrix();
  for (const Motif& m : motifs) e.tensors.push_back(tensor_for(ds, bytes, m, c));
  e.labels = split_labels(ds.labels, {ck.config.train_fraction, ck.config.validation_fraction}, ck.config.seed);

  Split split = Split::Test;
  if (split_name == "train") split = Split::Train;
  if (split_name == "validation") split = Split::Validation;
  print_metrics(split_name.c_str(), evaluate(ck.model, e.data(), split));
  return 0;
}

int cmd_gradcheck(std::size_t nodes, std::size_t layers_flag, double epsilon, double tolerance, const Common& c) {
  apply_threads(c);
  TrainConfig cfg = resolve_config(c);
  const std::size_t layers = layers_flag > 0 ? layers_flag : cfg.layers;
  double worst = 0.0;
  std::printf("%-10s %-22s %6s %12s %12s\n", "head", "group", "size", "max_abs", "rel_error");
  for (const Task task : {Task::MultiClass, Task::MultiLabel}) {
    const GradcheckReport r = gradcheck_random_case(task, layers, cfg.seed, nodes, epsilon);
    for (const auto& g : r.groups) {
      std::printf("%-10s %-22s %6zu %12.3e %12.3e\n", task == Task::MultiClass ? "softmax" : "sigmoid",
                  g.name.c_str(), g.size, g.max_abs_error, g.relative_error);
    }
    worst = std::max(worst, r.max_relative_error());
  }
  const bool ok = worst < tolerance;
  std::printf("max relative error %.3e (tolerance %.1e): %s\n", worst, tolerance, ok ? "ok" : "FAILED");
  return ok ? 0 : 1;
}

void add_threads(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "Worker threads for kernels and enumeration")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motif-based graph convolutional networks"};
  app.require_subcommand(1);
  Common c;
  int status = 0;

  std::string kind = "planted-hetero";
  std::size_t size = 0;
  double noise = 0.0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset and matching motif files");
  synth->add_option("--kind", kind, "planted-hetero or sbm-homo")->check(CLI::IsMember({"planted-hetero", "sbm-homo"}));
  synth->add_option("--size", size, "Authors (planted-hetero) or nodes (sbm-homo)");
  synth->add_option("--noise", noise, "Feature noise scale");
  synth->add_option("--seed", c.seed, "Random seed");
  synth->add_option("--out", c.out, "Output directory")->required();
  synth->callback([&] { status = cmd_synth(kind, size, noise, c); });

  auto* build = app.add_subcommand("build-tensor", "Enumerate motif instances and dump the adjacency tensors");
  build->add_option("--graph", c.graph, "Dataset file")->required()->check(CLI::ExistingFile);
  build->add_option("--motif", c.motifs, "Motif JSON file (repeatable)")->required()->check(CLI::ExistingFile);
  build->add_option("--out", c.out, "Directory for the tensor dumps");
  build->add_option("--max-instances", c.max_instances, "Instance cap per motif");
  add_threads(build, c);
  build->callback([&] { status = cmd_build_tensor(c); });

  auto* trn = app.add_subcommand("train", "Train a model and write a checkpoint and report");
  trn->add_option("--graph", c.graph, "Dataset file")->required()->check(CLI::ExistingFile);
  trn->add_option("--motif", c.motifs, "Motif JSON file (repeatable)")->required()->check(CLI::ExistingFile);
  trn->add_option("--config", c.config, "key=value config file")->check(CLI::ExistingFile);
  trn->add_option("--set", c.overrides, "Config override key=value (repeatable)");
  auto* seed_opt = trn->add_option("--seed", c.seed, "Random seed (overrides the config)");
  trn->add_option("--out", c.out, "Output directory")->required();
  trn->add_option("--cache", c.cache, "Tensor cache directory");
  trn->add_option("--max-instances", c.max_instances, "Instance cap per motif");
  add_threads(trn, c);
  trn->callback([&] {
    c.seed_set = seed_opt->count() > 0;
    status = cmd_train(c);
  });

  std::string checkpoint;
  std::string split = "test";
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  ev->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  ev->add_option("--graph", c.graph, "Dataset file")->required()->check(CLI::ExistingFile);
  ev->add_option("--motif", c.motifs, "Motif JSON file (repeatable)")->required()->check(CLI::ExistingFile);
  ev->add_option("--split", split, "train, validation or test")->check(CLI::IsMember({"train", "validation", "test"}));
  ev->add_option("--cache", c.cache, "Tensor cache directory");
  ev->add_option("--max-instances", c.max_instances, "Instance cap per motif");
  add_threads(ev, c);
  ev->callback([&] { status = cmd_eval(checkpoint, split, c); });

  std::size_t nodes = 15;
  std::size_t layers = 0;
  double epsilon = 1e-6;
  double tolerance = 1e-5;
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gc->add_option("--config", c.config, "key=value config file (layers, seed)")->check(CLI::ExistingFile);
  gc->add_option("--set", c.overrides, "Config override key=value (repeatable)");
  auto* gc_seed = gc->add_option("--seed", c.seed, "Random seed");
  gc->add_option("--nodes", nodes, "Graph size")->check(CLI::Range(3, 200));
  gc->add_option("--layers", layers, "Layer count (default: from config)");
  gc->add_option("--epsilon", epsilon, "Finite-difference step");
  gc->add_option("--tolerance", tolerance, "Largest accepted relative error");
  add_threads(gc, c);
  gc->callback([&] {
    c.seed_set = gc_seed->count() > 0;
    status = cmd_gradcheck(nodes, layers, epsilon, tolerance, c);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return status;
}
