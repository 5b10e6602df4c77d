// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "flowhigh/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace flowhigh {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class N>
N parse_number(const std::string& key, const std::string& v) {
  N out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("config: bad numeric value for '" + key + "': '" + v + "'");
  return out;
}

template <class N>
std::string format_number(N v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean for '" + key + "': '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<int>(key, item));
  }
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
};

#define INT_FIELD(expr)                                                              \
  Field {                                                                            \
    [](const RunConfig& c) { return std::to_string(c.expr); },                      \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.expr = parse_number<int>(k, v); } \
  }
#define DOUBLE_FIELD(expr)                                                           \
  Field {                                                                            \
    [](const RunConfig& c) { return format_number(c.expr); },                       \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.expr = parse_number<double>(k, v); } \
  }
#define LIST_FIELD(expr)                                                             \
  Field {                                                                            \
    [](const RunConfig& c) { return format_int_list(c.expr); },                     \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.expr = parse_int_list(k, v); } \
  }

// Ordered; serialisation follows this order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"sample_rate", INT_FIELD(sample_rate)},
      {"train_rates", LIST_FIELD(train_rates)},
      {"eval_rates", LIST_FIELD(eval_rates)},
      {"seed", Field{[](const RunConfig& c) { return std::to_string(c.seed); },
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                       c.seed = parse_number<std::uint64_t>(k, v);
                     }}},
      {"threads", INT_FIELD(threads)},
      {"stft.window_size", INT_FIELD(stft.window_size)},
      {"stft.hop", INT_FIELD(stft.hop)},
      {"stft.n_fft", INT_FIELD(stft.n_fft)},
      {"mel.bins", INT_FIELD(mel.mel_bins)},
      {"mel.fmin", DOUBLE_FIELD(mel.fmin)},
      {"mel.fmax", DOUBLE_FIELD(mel.fmax)},
      {"mel.floor", DOUBLE_FIELD(mel.floor)},
      {"mel.gl_iters", INT_FIELD(mel.gl_iters)},
      {"path", Field{[](const RunConfig& c) { return std::string(path_kind_name(c.path)); },
                     [](RunConfig& c, const std::string&, const std::string& v) { c.path = parse_path_kind(v); }}},
      {"sigma_min", DOUBLE_FIELD(path_params.sigma_min)},
      {"model.layers", INT_FIELD(model.layers)},
      {"model.heads", INT_FIELD(model.heads)},
      {"model.dim", INT_FIELD(model.model_dim)},
      {"model.ff_dim", INT_FIELD(model.ff_dim)},
      {"model.max_frames", INT_FIELD(model.max_frames)},
      {"model.position_encoding",
       Field{[](const RunConfig& c) { return std::string(c.model.position_encoding ? "true" : "false"); },
             [](RunConfig& c, const std::string& k, const std::string& v) {
               c.model.position_encoding = parse_bool(k, v);
             }}},
      {"adam.lr", DOUBLE_FIELD(adam.lr)},
      {"adam.beta1", DOUBLE_FIELD(adam.beta1)},
      {"adam.beta2", DOUBLE_FIELD(adam.beta2)},
      {"adam.eps", DOUBLE_FIELD(adam.eps)},
      {"train.batch", INT_FIELD(train.batch)},
      {"train.steps", INT_FIELD(train.steps)},
      {"train.crop_frames", INT_FIELD(train.crop_frames)},
      {"train.checkpoint_every", INT_FIELD(train.checkpoint_every)},
      {"train.threads", INT_FIELD(train.threads)},
      {"solver.method",
       Field{[](const RunConfig& c) { return std::string(solver_method_name(c.solver.method)); },
             [](RunConfig& c, const std::string&, const std::string& v) { c.solver.method = parse_solver_method(v); }}},
      {"solver.steps", INT_FIELD(solver.steps)},
      {"solver.seed", Field{[](const RunConfig& c) { return std::to_string(c.solver.seed); },
                            [](RunConfig& c, const std::string& k, const std::string& v) {
                              c.solver.seed = parse_number<std::uint64_t>(k, v);
                            }}},
      {"degrade.order_min", INT_FIELD(degrade.order_min)},
      {"degrade.order_max", INT_FIELD(degrade.order_max)},
      {"degrade.ripple_min_db", DOUBLE_FIELD(degrade.ripple_min_db)},
      {"degrade.ripple_max_db", DOUBLE_FIELD(degrade.ripple_max_db)},
      {"degrade.eval_order", INT_FIELD(degrade.eval_order)},
      {"degrade.eval_ripple_db", DOUBLE_FIELD(degrade.eval_ripple_db)},
      {"degrade.phase",
       Field{[](const RunConfig& c) { return std::string(c.degrade.phase == PhaseMode::kCausal ? "causal" : "zero"); },
             [](RunConfig& c, const std::string& k, const std::string& v) {
               if (v == "causal") c.degrade.phase = PhaseMode::kCausal;
               else if (v == "zero") c.degrade.phase = PhaseMode::kZeroPhase;
               else throw ConfigError("config: '" + k + "' must be causal|zero");
             }}},
      {"corpus.utterances", INT_FIELD(corpus.utterances)},
      {"corpus.duration_s", DOUBLE_FIELD(corpus.duration_s)},
      {"corpus.eval_fraction", DOUBLE_FIELD(corpus.eval_fraction)},
      {"postproc.crossfade_bins", INT_FIELD(postproc_crossfade_bins)},
      {"bench.nfe", LIST_FIELD(bench_nfe)},
      {"bench.repeats", INT_FIELD(bench_repeats)},
  };
  return table;
}

#undef INT_FIELD
#undef DOUBLE_FIELD
#undef LIST_FIELD

const Field& find_field(const std::string& key) {
  for (const auto& [name, field] : fields()) {
    if (name == key) return field;
  }
  throw ConfigError("config: unknown key '" + key + "'");
}

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  find_field(key).set(cfg, key, trim(value));
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) { return find_field(key).get(cfg); }

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.first);
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(cfg) + "\n";
  return out;
}

EstimatorConfig RunConfig::estimator_config() const {
  EstimatorConfig e = model;
  e.mel_bins = mel.mel_bins;
  return e;
}

void RunConfig::validate() const {
  if (sample_rate <= 0) throw ConfigError("config: sample_rate must be positive");
  if (train_rates.empty() || eval_rates.empty()) throw ConfigError("config: rate lists must not be empty");
  for (int r : train_rates) {
    if (r < 4000 || r > 32000 || r >= sample_rate) {
      throw ConfigError("config: train rate " + std::to_string(r) + " must lie in [4000, 32000] and below sample_rate");
    }
  }
  for (int r : eval_rates) {
    if (r <= 0 || r >= sample_rate) throw ConfigError("config: eval rate " + std::to_string(r) + " must be below sample_rate");
  }
  try {
    stft.validate();
    estimator_config().validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const double fmax = mel.fmax > 0.0 ? mel.fmax : 0.5 * sample_rate;
  if (mel.mel_bins < 2 || mel.fmin < 0.0 || mel.fmin >= fmax || fmax > 0.5 * sample_rate) {
    throw ConfigError("config: mel range must satisfy 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (!(mel.floor > 0.0) || mel.gl_iters < 0) throw ConfigError("config: mel.floor must be positive");
  if (!(path_params.sigma_min > 0.0 && path_params.sigma_min < 1.0)) throw ConfigError("config: sigma_min must lie in (0, 1)");
  if (!(adam.lr > 0.0)) throw ConfigError("config: adam.lr must be positive");
  if (train.batch < 1 || train.steps < 0 || train.crop_frames < 1 || train.checkpoint_every < 0) {
    throw ConfigError("config: invalid training sizes");
  }
  if (train.crop_frames > model.max_frames) throw ConfigError("config: crop_frames exceeds model.max_frames");
  if (solver.steps < 1) throw ConfigError("config: solver.steps must be >= 1");
  if (degrade.order_min < 1 || degrade.order_max > 12 || degrade.order_min > degrade.order_max) {
    throw ConfigError("config: degrade order range must lie in [1, 12]");
  }
  if (!(degrade.ripple_min_db > 0.0) || degrade.ripple_min_db > degrade.ripple_max_db) {
    throw ConfigError("config: degrade ripple range invalid");
  }
  if (degrade.eval_order < 1 || degrade.eval_order > 12 || !(degrade.eval_ripple_db > 0.0)) {
    throw ConfigError("config: eval filter invalid");
  }
  if (corpus.utterances < 1 || !(corpus.duration_s > 0.0) || corpus.eval_fraction < 0.0 || corpus.eval_fraction >= 1.0) {
    throw ConfigError("config: corpus settings invalid");
  }
  if (postproc_crossfade_bins < 0) throw ConfigError("config: crossfade must be non-negative");
  if (bench_repeats < 1) throw ConfigError("config: bench.repeats must be >= 1");
  for (int n : bench_nfe) {
    if (n < 1) throw ConfigError("config: bench nfe entries must be >= 1");
  }
  if (threads < 1 || train.threads < 1) throw ConfigError("config: thread counts must be >= 1");
}

}  // namespace flowhigh
