#include "logic_cells/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "logic_cells/error.hpp"

namespace logic_cells {

std::string to_string(Task task) { return task == Task::Motor ? "motor" : "bars"; }

int ExperimentConfig::input_size() const {
  return task == Task::Motor ? population.n_cells : bars.bank.input_size();
}

int ExperimentConfig::output_size() const {
  return task == Task::Motor ? motor::target_size(encoding) : bars::num_classes(bars.experiment);
}

int ExperimentConfig::num_conditions() const {
  return task == Task::Motor ? motor::kNumConditions : bars::num_classes(bars.experiment);
}

logic::ConditionSet ExperimentConfig::conditions() const {
  if (task == Task::Motor) return {{"E", "H", "EH"}};
  return {bars::class_names(bars.experiment)};
}

void ExperimentConfig::validate() const {
  network.validate();
  train.validate();
  if (task == Task::Motor) {
    population.validate();
  } else {
    bars.validate();
    if (bars.experiment == bars::Experiment::Three && bars.bank.colors != 3) {
      throw ConfigError("experiment 3 needs three sensor blocks");
    }
    if (bars.experiment != bars::Experiment::Three && bars.bank.colors != 2) {
      throw ConfigError("experiments 1 and 2 use two sensor blocks");
    }
  }
  if (network.input_size() != input_size()) {
    throw ConfigError("input layer has " + std::to_string(network.input_size()) + " cells, task needs " +
                      std::to_string(input_size()));
  }
  if (network.output_size() != output_size()) {
    throw ConfigError("output layer has " + std::to_string(network.output_size()) + " cells, task needs " +
                      std::to_string(output_size()));
  }
  if (network.num_weight_layers() < 2) throw ConfigError("at least one hidden layer is required");
  if (train_samples < 1 || test_samples < 1) throw ConfigError("sample counts must be positive");
  const auto& q = analysis.quantization;
  if (!(q.threshold > 0.0 && q.threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  if (!(q.concentration > 0.0 && q.concentration <= 1.0)) throw ConfigError("concentration must lie in (0, 1]");
  if (analysis.raw_resolution < 4) throw ConfigError("raw_resolution must be at least 4");
  if (analysis.harmonic_degree < 1 || 2 * analysis.harmonic_degree >= analysis.raw_resolution) {
    throw ConfigError("harmonic_degree must be in [1, raw_resolution / 2)");
  }
  if (analysis.enumeration.full_limit < 3 || analysis.enumeration.samples < 1) {
    throw ConfigError("invalid triple enumeration limits");
  }
  if (analysis.near_conclusive < 0) throw ConfigError("near_conclusive must be nonnegative");
  if (analysis.permutations < 0) throw ConfigError("permutations must be nonnegative");
  if (seeds.empty()) throw ConfigError("seed list is empty");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list item in '" + value + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(d)) throw ConfigError(key + ": not a number: '" + v + "'");
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long i = 0;
  try {
    i = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return i;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v[0] == '-') throw ConfigError(key + ": not a nonnegative integer: '" + v + "'");
  std::size_t used = 0;
  std::uint64_t i = 0;
  try {
    i = std::stoull(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
  if (used != v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return i;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false");
}

int to_count(const std::string& key, const std::string& v) {
  const long long i = to_int(key, v);
  if (i < 0 || i > 100000000) throw ConfigError(key + ": out of range");
  return static_cast<int>(i);
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(to_count(key, item));
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(items[i]);
    } else {
      out += std::to_string(items[i]);
    }
  }
  return out;
}

// Hidden sizes as in the reference architectures.
std::vector<int> default_hidden(Task task) {
  return task == Task::Motor ? std::vector<int>{50, 25} : std::vector<int>{55, 50, 25};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (!kv.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
  }

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  ExperimentConfig c;
  const std::string task = take("task").value_or("motor");
  if (task == "motor") {
    c.task = Task::Motor;
  } else if (task == "bars") {
    c.task = Task::Bars;
  } else {
    throw ConfigError("task must be motor or bars");
  }

  // Task-dependent defaults first, then explicit keys.
  if (c.task == Task::Bars) {
    const auto e = bars::parse_experiment(take("experiment").value_or("1"));
    const auto space = bars::parse_space_kind(take("space").value_or("linear"));
    c.bars = bars::default_spec(e, space);
    c.network.final_layer_mode = FinalLayerMode::LinearSoftmax;
    c.network.loss = LossKind::CrossEntropy;
    c.network.activation_gain = 2.0;
    c.train.batch_size = 64;
    c.train.epochs = 300;
  } else {
    c.network.activation_gain = 4.0;
    c.train.batch_size = 32;
    c.train.epochs = 200;
  }
  std::vector<int> hidden = default_hidden(c.task);

  std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters{
      {"encoding", [&](auto&, auto& v) { c.encoding = motor::parse_target_encoding(v); }},
      {"type1_cells", [&](auto& k, auto& v) { c.population.n_type1 = to_count(k, v); }},
      {"type2a_cells", [&](auto& k, auto& v) { c.population.n_type2a = to_count(k, v); }},
      {"type2b_cells", [&](auto& k, auto& v) { c.population.n_type2b = to_count(k, v); }},
      {"type2c_cells", [&](auto& k, auto& v) { c.population.n_type2c = to_count(k, v); }},
      {"offset_sigma_deg", [&](auto& k, auto& v) { c.population.offset_sigma = to_double(k, v) * std::numbers::pi / 180.0; }},
      {"kappa", [&](auto& k, auto& v) {
         const auto ks = to_doubles(k, v);
         if (ks.size() != 3) throw ConfigError("kappa needs three values (E, H, EH)");
         c.population.kappa = {ks[0], ks[1], ks[2]};
       }},
      {"diameter", [&](auto& k, auto& v) { c.bars.space.diameter = to_double(k, v); }},
      {"dots", [&](auto& k, auto& v) { c.bars.space.dots = to_count(k, v); }},
      {"red_lengths", [&](auto& k, auto& v) { c.bars.red_lengths = to_doubles(k, v); }},
      {"green_lengths", [&](auto& k, auto& v) { c.bars.green_lengths = to_doubles(k, v); }},
      {"blue_length", [&](auto& k, auto& v) { c.bars.blue_length = to_double(k, v); }},
      {"blue_probability", [&](auto& k, auto& v) { c.bars.blue_probability = to_double(k, v); }},
      {"balanced", [&](auto& k, auto& v) { c.bars.balanced = to_bool(k, v); }},
      {"sensor_profile", [&](auto&, auto& v) { c.bars.bank.profile = bars::parse_sensor_profile(v); }},
      {"sensor_width", [&](auto& k, auto& v) { c.bars.bank.width = to_double(k, v); }},
      {"sensors_per_color", [&](auto& k, auto& v) { c.bars.bank.per_color = to_count(k, v); }},
      {"hidden_layers", [&](auto& k, auto& v) { hidden = to_ints(k, v); }},
      {"activation_gain", [&](auto& k, auto& v) { c.network.activation_gain = to_double(k, v); }},
      {"final_layer", [&](auto&, auto& v) { c.network.final_layer_mode = parse_final_layer_mode(v); }},
      {"loss", [&](auto&, auto& v) { c.network.loss = parse_loss_kind(v); }},
      {"learning_rate", [&](auto& k, auto& v) { c.train.learning_rate = to_double(k, v); }},
      {"beta1", [&](auto& k, auto& v) { c.train.beta1 = to_double(k, v); }},
      {"beta2", [&](auto& k, auto& v) { c.train.beta2 = to_double(k, v); }},
      {"epsilon", [&](auto& k, auto& v) { c.train.epsilon = to_double(k, v); }},
      {"batch_size", [&](auto& k, auto& v) { c.train.batch_size = to_count(k, v); }},
      {"epochs", [&](auto& k, auto& v) { c.train.epochs = to_count(k, v); }},
      {"train_samples", [&](auto& k, auto& v) { c.train_samples = to_count(k, v); }},
      {"test_samples", [&](auto& k, auto& v) { c.test_samples = to_count(k, v); }},
      {"threshold", [&](auto& k, auto& v) { c.analysis.quantization.threshold = to_double(k, v); }},
      {"concentration", [&](auto& k, auto& v) { c.analysis.quantization.concentration = to_double(k, v); }},
      {"raw_resolution", [&](auto& k, auto& v) { c.analysis.raw_resolution = to_count(k, v); }},
      {"harmonic_degree", [&](auto& k, auto& v) { c.analysis.harmonic_degree = to_count(k, v); }},
      {"triple_full_limit", [&](auto& k, auto& v) { c.analysis.enumeration.full_limit = to_count(k, v); }},
      {"triple_samples", [&](auto& k, auto& v) { c.analysis.enumeration.samples = to_count(k, v); }},
      {"near_conclusive", [&](auto& k, auto& v) { c.analysis.near_conclusive = to_count(k, v); }},
      {"permutations", [&](auto& k, auto& v) { c.analysis.permutations = to_count(k, v); }},
      {"theory_limit", [&](auto& k, auto& v) { c.analysis.theory_limit = to_count(k, v); }},
      {"out", [&](auto&, auto& v) { c.out_dir = v; }},
      {"seeds", [&](auto& k, auto& v) {
         c.seeds.clear();
         for (const auto& s : split_list(v)) c.seeds.push_back(to_u64(k, s));
       }},
  };
  for (const auto& [key, value] : kv) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown key '" + key + "'");
    it->second(key, value);
  }
  if (c.task == Task::Motor) {
    auto& p = c.population;
    p.n_cells = p.n_type1 + p.n_type2a + p.n_type2b + p.n_type2c;
  }
  c.network.layer_sizes.clear();
  c.network.layer_sizes.push_back(c.input_size());
  for (int h : hidden) c.network.layer_sizes.push_back(h);
  c.network.layer_sizes.push_back(c.output_size());
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "task=" << to_string(c.task) << "\n";
  if (c.task == Task::Motor) {
    const auto& p = c.population;
    o << "encoding=" << motor::to_string(c.encoding) << "\n"
      << "cells=" << join(std::vector<int>{p.n_type1, p.n_type2a, p.n_type2b, p.n_type2c}) << "\n"
      << "offset_sigma=" << fmt(p.offset_sigma) << "\n"
      << "kappa=" << join(std::vector<double>(p.kappa.begin(), p.kappa.end())) << "\n";
  } else {
    const auto& b = c.bars;
    o << "experiment=" << static_cast<int>(b.experiment) << "\n"
      << "space=" << bars::to_string(b.space.kind) << "\n"
      << "diameter=" << fmt(b.space.diameter) << "\n"
      << "dots=" << b.space.dots << "\n"
      << "red_lengths=" << join(b.red_lengths) << "\n"
      << "green_lengths=" << join(b.green_lengths) << "\n"
      << "blue_length=" << fmt(b.blue_length) << "\n"
      << "blue_probability=" << fmt(b.blue_probability) << "\n"
      << "balanced=" << (b.balanced ? "true" : "false") << "\n"
      << "sensor_profile=" << bars::to_string(b.bank.profile) << "\n"
      << "sensor_width=" << fmt(b.bank.width) << "\n"
      << "sensors_per_color=" << b.bank.per_color << "\n";
  }
  const auto& n = c.network;
  const auto& t = c.train;
  const auto& a = c.analysis;
  o << "layer_sizes=" << join(n.layer_sizes) << "\n"
    << "activation_gain=" << fmt(n.activation_gain) << "\n"
    << "final_layer=" << to_string(n.final_layer_mode) << "\n"
    << "loss=" << to_string(n.loss) << "\n"
    << "learning_rate=" << fmt(t.learning_rate) << "\n"
    << "beta1=" << fmt(t.beta1) << "\n"
    << "beta2=" << fmt(t.beta2) << "\n"
    << "epsilon=" << fmt(t.epsilon) << "\n"
    << "batch_size=" << t.batch_size << "\n"
    << "epochs=" << t.epochs << "\n"
    << "train_samples=" << c.train_samples << "\n"
    << "test_samples=" << c.test_samples << "\n"
    << "threshold=" << fmt(a.quantization.threshold) << "\n"
    << "concentration=" << fmt(a.quantization.concentration) << "\n"
    << "raw_resolution=" << a.raw_resolution << "\n"
    << "harmonic_degree=" << a.harmonic_degree << "\n"
    << "triple_full_limit=" << a.enumeration.full_limit << "\n"
    << "triple_samples=" << a.enumeration.samples << "\n"
    << "near_conclusive=" << a.near_conclusive << "\n"
    << "permutations=" << a.permutations << "\n"
    << "theory_limit=" << a.theory_limit << "\n"
    << "out=" << c.out_dir << "\n"
    << "seeds=" << join(c.seeds) << "\n";
  return o.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string config_hash(const ExperimentConfig& config) { return hex64(fnv1a(canonical_text(config))); }

}  // namespace logic_cells
