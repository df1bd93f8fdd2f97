#include "motifcnn/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "motifcnn/errors.hpp"

namespace motifcnn {

namespace {

constexpr const char* kMagic = "motifcnn-checkpoint";
constexpr int kVersion = 1;

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next(const std::string& expected_key) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(line_, "unexpected end of checkpoint, wanted " + expected_key);
    ++line_;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key != expected_key) throw ParseError(line_, "expected '" + expected_key + "', got '" + key + "'");
    return ss;
  }

  std::vector<double> reals(std::size_t count) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(line_, "unexpected end of checkpoint");
    ++line_;
    std::istringstream ss(line);
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(real(tok));
    if (out.size() != count) throw ParseError(line_, "expected " + std::to_string(count) + " values");
    return out;
  }

  double real(const std::string& tok) const {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0') throw ParseError(line_, "bad number '" + tok + "'");
    return v;
  }

  template <typename T>
  T get(std::istringstream& ss, const char* what) const {
    T v{};
    if (!(ss >> v)) throw ParseError(line_, std::string("bad ") + what);
    return v;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

std::uint64_t motif_list_hash(std::span<const Motif> motifs, const TypeRegistry& types) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const Motif& m : motifs) {
    for (const char c : motif_to_json(m, types)) feed(static_cast<unsigned char>(c));
    feed('\n');
  }
  return h;
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  const ModelConfig& mc = c.model.config;
  out << kMagic << ' ' << kVersion << '\n';
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(c.motif_hash));
  out << "motif_hash " << buf << '\n';
  out << "task " << (c.task == Task::MultiClass ? "multiclass" : "multilabel") << '\n';
  out << "input_dim " << mc.input_dim << '\n';
  out << "filters " << mc.filters << '\n';
  out << "classes " << mc.num_classes << '\n';
  out << "layers " << mc.num_layers << '\n';
  out << "dropout " << hex(mc.dropout) << '\n';
  out << "roles " << mc.motif_roles.size();
  for (const auto r : mc.motif_roles) out << ' ' << r;
  out << '\n';
  const TrainConfig& t = c.config;
  out << "train " << t.max_epochs << ' ' << t.window << ' ' << hex(t.learning_rate) << ' ' << hex(t.dropout) << ' '
      << t.filters << ' ' << t.layers << ' ' << t.seed << ' ' << hex(t.train_fraction) << ' '
      << hex(t.validation_fraction) << '\n';
  for_each_parameter(c.model.params, [&](const std::string& name, const DenseMatrix& m) {
    out << "param " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto row = m.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << hex(row[j]);
      out << '\n';
    }
  });
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  LineReader r(in);
  Checkpoint c;
  {
    auto ss = r.next(kMagic);
    if (r.get<int>(ss, "version") != kVersion) throw ParseError(r.line(), "unsupported checkpoint version");
  }
  {
    auto ss = r.next("motif_hash");
    std::string h = r.get<std::string>(ss, "hash");
    char* end = nullptr;
    c.motif_hash = std::strtoull(h.c_str(), &end, 16);
    if (h.empty() || *end != '\0') throw ParseError(r.line(), "bad motif hash");
  }
  {
    auto ss = r.next("task");
    const auto task = r.get<std::string>(ss, "task");
    if (task == "multiclass") {
      c.task = Task::MultiClass;
    } else if (task == "multilabel") {
      c.task = Task::MultiLabel;
    } else {
      throw ParseError(r.line(), "unknown task '" + task + "'");
    }
  }
  ModelConfig& mc = c.model.config;
  {
    auto ss = r.next("input_dim");
    mc.input_dim = r.get<std::size_t>(ss, "input_dim");
  }
  {
    auto ss = r.next("filters");
    mc.filters = r.get<std::size_t>(ss, "filters");
  }
  {
    auto ss = r.next("classes");
    mc.num_classes = r.get<std::size_t>(ss, "classes");
  }
  {
    auto ss = r.next("layers");
    mc.num_layers = r.get<std::size_t>(ss, "layers");
  }
  {
    auto ss = r.next("dropout");
    mc.dropout = r.real(r.get<std::string>(ss, "dropout"));
  }
  {
    auto ss = r.next("roles");
    const auto n = r.get<std::size_t>(ss, "motif count");
    for (std::size_t i = 0; i < n; ++i) mc.motif_roles.push_back(r.get<std::size_t>(ss, "role count"));
  }
  {
    auto ss = r.next("train");
    TrainConfig& t = c.config;
    t.max_epochs = r.get<std::size_t>(ss, "max_epochs");
    t.window = r.get<std::size_t>(ss, "window");
    t.learning_rate = r.real(r.get<std::string>(ss, "learning_rate"));
    t.dropout = r.real(r.get<std::string>(ss, "dropout"));
    t.filters = r.get<std::size_t>(ss, "filters");
    t.layers = r.get<std::size_t>(ss, "layers");
    t.seed = r.get<std::uint64_t>(ss, "seed");
    t.train_fraction = r.real(r.get<std::string>(ss, "train_fraction"));
    t.validation_fraction = r.real(r.get<std::string>(ss, "validation_fraction"));
  }

  // The layout follows from the config; the stored names and shapes must agree.
  try {
    c.model.params = init_model(mc, 0).params;
  } catch (const std::invalid_argument& e) {
    throw ParseError(r.line(), std::string("inconsistent model header: ") + e.what());
  }
  for_each_parameter(c.model.params, [&](const std::string& name, DenseMatrix& m) {
    auto ss = r.next("param");
    const auto got = r.get<std::string>(ss, "parameter name");
    const auto rows = r.get<std::size_t>(ss, "rows");
    const auto cols = r.get<std::size_t>(ss, "cols");
    if (got != name || rows != m.rows() || cols != m.cols()) {
      throw ParseError(r.line(), "parameter " + got + " does not match the expected " + name + " " +
                                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    for (std::size_t i = 0; i < rows; ++i) {
      const auto values = r.reals(cols);
      std::copy(values.begin(), values.end(), m.row(i).begin());
    }
  });
  r.next("end");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  write_checkpoint(out, checkpoint);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open checkpoint " + path);
  try {
    return read_checkpoint(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

}  // namespace motifcnn
