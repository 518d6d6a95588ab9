// One line per acceptance criterion. Usage: logic_cells_acceptance <work dir>

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "logic_cells/config.hpp"
#include "logic_cells/error.hpp"
#include "logic_cells/experiment.hpp"
#include "logic_cells/report.hpp"
#include "logic_cells/weight_logic.hpp"
#include "support.hpp"

using namespace logic_cells;
namespace fs = std::filesystem;
using experiment::Json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string work_root;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig config_named(const std::string& name, const std::string& sub) {
  auto c = load_config(std::string(LOGIC_CELLS_CONFIG_DIR) + "/" + name + ".conf");
  c.out_dir = (fs::path(work_root) / sub).string();
  return c;
}

std::string prepare(const ExperimentConfig& c, std::uint64_t seed) {
  const auto dir = experiment::seed_dir(c.out_dir, seed);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json read_json(const std::string& path) { return Json::parse(report::read_file(path)); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Trains and analyzes each seed of `name` once; later criteria reuse the files.
const std::vector<std::string>& seed_dirs(const std::string& name, bool full) {
  static std::map<std::string, std::vector<std::string>> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  const auto c = config_named(name, name);
  std::vector<std::string> dirs;
  for (auto seed : c.seeds) {
    const auto dir = prepare(c, seed);
    if (full) {
      experiment::cmd_full(c, seed, dir);
    } else {
      experiment::cmd_train(c, seed, dir);
      experiment::cmd_analyze(c, seed, dir);
    }
    dirs.push_back(dir);
  }
  return cache.emplace(name, std::move(dirs)).first->second;
}

Outcome gradient_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto g = fixtures::random_gradient_case(1000 + i);
    worst = std::max(worst, fixtures::gradient_error(g.net, g.input, g.target));
  }
  const double t = seconds_since(t0);
  return {worst < 1e-5 && t < 5.0, "max relative error " + fmt(worst) + ", " + fmt(t) + " s"};
}

Outcome deduction_tables() {
  const auto m = fixtures::roman_matrix();
  int rows = 0, matched = 0, printed = 0;
  for (const auto& t : fixtures::published_tables()) {
    std::vector<int> group;
    for (int n : t.cells) group.push_back(fixtures::roman(n));
    const auto g = logic::classify_group(m, group);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      ++rows;
      const bool ok = i < g.table.size() && fixtures::deduction_label(g.table[i].deduction) == t.rows[i];
      matched += ok;
      // As printed, the (I,II,V) table reads EH on its first row.
      const bool misprint = t.name == "I,II,V" && i == 0;
      printed += misprint ? fixtures::deduction_label(g.table[i].deduction) == "EH" : ok;
    }
  }
  // Four tables of eight rows.
  return {matched == rows && rows == 32,
          std::to_string(matched) + "/" + std::to_string(rows) + " rows; " + std::to_string(printed) +
              " match the tables as printed (I,II,V at (1,1,1) is printed EH, deduced contradiction)"};
}

Outcome motor_accuracy() {
  const auto c = config_named("motor_2h", "motor_2h");
  const auto dir = prepare(c, 1);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = experiment::cmd_train(c, 1, dir);
  const double t = seconds_since(t0);
  const double err = r["test_error"].get<double>();
  return {err <= 0.03 && t <= 600.0 && c.network.loss == LossKind::MSE,
          "test error " + fmt(err) + ", " + fmt(t) + " s"};
}

Outcome motor_logic() {
  int good = 0;
  std::string detail;
  for (const auto& dir : seed_dirs("motor_3h", false)) {
    const auto s = read_json(dir + "/summary.json");
    const auto& census = s["layers"].back()["census"];
    const int logical = census["logical"].get<int>(), cells = census["cells"].get<int>();
    good += 2 * logical >= cells;
    detail += (detail.empty() ? "" : " ") + std::to_string(logical) + "/" + std::to_string(cells);
  }
  return {good >= 3, "logical cells per seed " + detail + "; " + std::to_string(good) + " of 5 seeds at half"};
}

Outcome bars_census() {
  int good = 0, accurate = 0;
  std::string detail;
  for (const auto& dir : seed_dirs("bars_exp1", true)) {
    const auto s = read_json(dir + "/summary.json");
    const auto m = read_json(dir + "/manifest.json");
    const double err = m["results"]["train"]["test_error"].get<double>();
    const auto& counts = s["layers"].back()["census"]["counts"];
    const int d = counts["D-type"], io = counts["IO-type"], ii = counts["II-type"];
    accurate += err <= 0.03;
    good += d >= 5 && ii >= 5 && io == 0;
    detail += " [err " + fmt(err) + " D " + std::to_string(d) + " IO " + std::to_string(io) + " II " +
              std::to_string(ii) + "]";
  }
  return {accurate == 5 && good >= 3,
          "error <= 3% in " + std::to_string(accurate) + "/5, census in " + std::to_string(good) + "/5;" + detail};
}

Outcome triple_density() {
  int good = 0;
  std::string detail;
  for (const auto& dir : seed_dirs("bars_exp3", true)) {
    const auto s = read_json(dir + "/summary.json");
    const double f = s["triples"]["conclusive_fraction"].get<double>();
    good += f >= 0.01 && f <= 0.15;
    detail += " " + fmt(f);
  }
  return {good >= 3, "conclusive fraction per seed" + detail + "; " + std::to_string(good) + " of 5 in band"};
}

std::string correlation_of(const std::string& dir, bool& positive) {
  positive = false;
  if (!fs::exists(dir + "/correlation.json")) return "none";
  const auto c = read_json(dir + "/correlation.json");
  if (c["r_angle_mu"].is_null()) return "undefined";
  const double r = c["r_angle_mu"].get<double>();
  positive = r > 0.0;
  return fmt(r);
}

Outcome weight_correlation() {
  int good = 0;
  std::string detail;
  for (const auto& dir : seed_dirs("bars_exp3", true)) {
    bool positive = false;
    detail += " " + correlation_of(dir, positive);
    good += positive;
  }
  std::string one;
  for (const auto& dir : seed_dirs("bars_exp1", true)) {
    bool positive = false;
    one += " " + correlation_of(dir, positive);
  }
  return {good >= 4, "r(angle, mu_W) three colors" + detail + "; " + std::to_string(good) +
                         " of 5 positive (two colors:" + one + ")"};
}

Outcome mu_units() {
  const double a = weights::weighted_logical_score(Eigen::MatrixXd::Identity(6, 6));
  const double b = weights::weighted_logical_score(Eigen::MatrixXd::Zero(6, 6));
  const double c = weights::weighted_logical_score(Eigen::MatrixXd::Ones(6, 6));
  return {a == 5.0 && b == 0.0 && c == 0.0, "identity " + fmt(a) + ", zero " + fmt(b) + ", ones " + fmt(c)};
}

Outcome label_oracle() {
  int mismatches = 0, scenes = 0;
  for (auto kind : {bars::SpaceKind::Linear, bars::SpaceKind::Circular}) {
    for (auto e : {bars::Experiment::One, bars::Experiment::Two, bars::Experiment::Three}) {
      auto spec = bars::default_spec(e, kind);
      spec.count = 10000;
      spec.seed = 99;
      for (const auto& s : bars::sample_scenes(spec)) {
        ++scenes;
        mismatches += bars::label_scene(s, spec.space, e) != bars::label_scene_pointwise(s, spec.space, e);
      }
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over " + std::to_string(scenes) + " scenes"};
}

Outcome injectivity() {
  const auto pop = motor::build_population(1);
  const auto grid = motor::grid_dataset(360, motor::TargetEncoding::SymmetricZ, pop);
  const auto& x = grid.data.inputs;
  double min_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < x.cols(); ++j) min_d = std::min(min_d, (x.col(i) - x.col(j)).norm());
  }
  double worst = 0.0;
  for (double k : pop.kappa) {
    const int n = 10000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += motor::von_mises(-std::numbers::pi + 2 * std::numbers::pi * i / n, 0.3, k);
    worst = std::max(worst, std::abs(sum * 2 * std::numbers::pi / n - 1.0));
  }
  return {x.cols() == 1080 && min_d > 0.0 && worst < 1e-6,
          std::to_string(x.cols()) + " points, min distance " + fmt(min_d) + ", normalization error " + fmt(worst)};
}

Outcome generalization() {
  int good = 0;
  std::string detail;
  for (const auto& dir : seed_dirs("bars_exp1", true)) {
    const auto g = read_json(dir + "/manifest.json")["results"]["generalize"];
    const double a = g["longer_error"], b = g["swapped_error"], c = g["longer_swapped_error"];
    good += a <= 0.25 && b <= 0.25 && c <= 0.25;
    detail += " [" + fmt(a) + " " + fmt(b) + " " + fmt(c) + "]";
  }
  return {good == 5, "longer/swapped/both per seed" + detail};
}

std::map<std::string, std::string> artifacts(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".json" || ext == ".jsonl")) {
      out[fs::relative(e.path(), dir).string()] = report::read_file(e.path().string());
    }
  }
  return out;
}

Outcome determinism() {
  // Same config both times; the first result is moved aside before the replay.
  const auto c = config_named("bars_exp1", "replay");
  std::map<std::string, std::string> runs[2];
  for (int i = 0; i < 2; ++i) {
    const auto dir = prepare(c, 1);
    experiment::cmd_full(c, 1, dir);
    runs[i] = artifacts(dir);
    const auto kept = fs::path(work_root) / ("replay_" + std::to_string(i));
    fs::remove_all(kept);
    fs::rename(dir, kept);
  }
  int differing = 0;
  for (const auto& [path, bytes] : runs[0]) {
    auto it = runs[1].find(path);
    differing += it == runs[1].end() || it->second != bytes;
  }
  differing += runs[1].size() != runs[0].size();
  return {differing == 0 && !runs[0].empty(),
          std::to_string(runs[0].size()) + " CSV/JSON files, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  work_root = argc > 1 ? argv[1] : "acceptance_out";
  fs::create_directories(work_root);
  const std::vector<std::function<Outcome()>> criteria{gradient_oracle, deduction_tables, motor_accuracy,
                                                       motor_logic,     bars_census,      triple_density,
                                                       weight_correlation, mu_units,      label_oracle,
                                                       injectivity,     generalization,   determinism};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu: %s %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
