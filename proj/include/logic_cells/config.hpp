#pragma once

// Flat key = value experiment configuration.
//
//   # comment
//   task = bars
//   experiment = 1
//   seeds = 1,2,3
//
// Lists are comma separated. Unknown keys are rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "logic_cells/bars_task.hpp"
#include "logic_cells/logic_analyzer.hpp"
#include "logic_cells/mlp.hpp"
#include "logic_cells/motor_task.hpp"

namespace logic_cells {

enum class Task { Motor, Bars };
std::string to_string(Task task);

struct AnalysisOptions {
  logic::QuantizationOptions quantization{};
  int raw_resolution = 100;
  int harmonic_degree = 6;
  logic::EnumerationOptions enumeration{};
  int near_conclusive = 2;  // triples with N >= c - near_conclusive enter the weight analysis
  int permutations = 200;
  int theory_limit = 12;
};

struct ExperimentConfig {
  Task task = Task::Motor;
  motor::TargetEncoding encoding = motor::TargetEncoding::SymmetricZ;
  motor::PopulationConfig population{};
  bars::BarsSpec bars = bars::default_spec(bars::Experiment::One);
  NetworkConfig network{};
  TrainConfig train{};
  int train_samples = 3000;
  int test_samples = 3000;
  AnalysisOptions analysis{};
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds{1};

  int input_size() const;
  int output_size() const;
  int num_conditions() const;
  logic::ConditionSet conditions() const;

  // Throws ConfigError on inconsistencies (layer sizes against the task, ...).
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Every field in fixed order; the hash input.
std::string canonical_text(const ExperimentConfig& config);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t value);
std::string config_hash(const ExperimentConfig& config);

}  // namespace logic_cells
