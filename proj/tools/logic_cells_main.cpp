// logic_cells {train,analyze,weights,generalize,full} --config PATH [--seed N | --seeds A,B] [--out DIR]

#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "logic_cells/config.hpp"
#include "logic_cells/error.hpp"
#include "logic_cells/experiment.hpp"

namespace ex = logic_cells::experiment;
using logic_cells::ExperimentConfig;

namespace {

std::string one_line(const std::string& command, const ex::Json& r) {
  std::string s = command;
  for (const auto& [k, v] : r.items()) {
    if (v.is_primitive()) s += " " + k + "=" + v.dump();
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Logical cells in trained perceptrons"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;

  const std::vector<std::string> names{"train", "analyze", "weights", "generalize", "full"};
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file")->required();
    auto* one = sub->add_option("--seed", seed, "single seed");
    sub->add_option("--seeds", seeds, "comma separated seeds")->delimiter(',')->excludes(one);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig config;
  try {
    config = logic_cells::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  auto* sub = app.get_subcommand(command);
  std::vector<std::uint64_t> run_seeds = config.seeds;
  if (sub->count("--seed")) run_seeds = {seed};
  if (sub->count("--seeds")) run_seeds = seeds;
  const std::string out = sub->count("--out") ? out_dir : config.out_dir;

  const auto outcomes = ex::for_each_seed(run_seeds, ex::fanout_threads(), [&](std::uint64_t s) {
    const std::string dir = ex::seed_dir(out, s);
    const auto t0 = std::chrono::steady_clock::now();
    ex::Json r;
    if (command == "train") {
      r = ex::cmd_train(config, s, dir);
    } else if (command == "analyze") {
      r = ex::cmd_analyze(config, s, dir);
    } else if (command == "weights") {
      r = ex::cmd_weights(config, s, dir);
    } else if (command == "generalize") {
      r = ex::cmd_generalize(config, s, dir);
    } else {
      r = ex::cmd_full(config, s, dir);
    }
    ex::record_timing(dir, command, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (command == "analyze") {
      ex::Json brief = ex::Json::object();
      if (r.contains("triples")) brief["conclusive_fraction"] = r["triples"]["conclusive_fraction"];
      brief["last_layer_logical"] = r["layers"].back()["census"]["logical"];
      return one_line(command, brief);
    }
    if (command == "full") {
      std::string s2 = one_line("train", r["train"]);
      if (r.contains("generalize")) s2 += "; " + one_line("generalize", r["generalize"]);
      return s2;
    }
    return one_line(command, r);
  });

  int code = 0;
  for (const auto& o : outcomes) {
    if (o.exit_code == 0) {
      std::cout << "seed " << o.seed << ": " << o.message << "\n";
    } else {
      std::cerr << "seed " << o.seed << ": error (exit " << o.exit_code << "): " << o.message << "\n";
      if (code == 0) code = o.exit_code;
    }
  }
  return code;
}
