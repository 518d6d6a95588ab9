#pragma once

// End-to-end commands over one seed. Every command reads and writes files in
// a per-seed directory and refreshes manifest.json there.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "logic_cells/bars_task.hpp"
#include "logic_cells/config.hpp"
#include "logic_cells/motor_task.hpp"

namespace logic_cells::experiment {

using Json = nlohmann::ordered_json;

// out/seed_<seed>
std::string seed_dir(const std::string& out, std::uint64_t seed);

// Datasets of one seed. Population and training share the seed; the train and
// test sets use the derived streams 10 and 11.
struct TaskData {
  Task task = Task::Motor;
  motor::TuningPopulation population;
  motor::MotorDataset motor_train;
  motor::MotorDataset motor_test;
  bars::BarsSpec test_spec;
  bars::BarsDataset bars_train;
  bars::BarsDataset bars_test;

  const Dataset& train() const { return task == Task::Motor ? motor_train.data : bars_train.data; }
  const Dataset& test() const { return task == Task::Motor ? motor_test.data : bars_test.data; }
};
TaskData make_task_data(const ExperimentConfig& config, std::uint64_t seed);

// Fraction of misclassified samples under the task's decoder.
double task_error(const ExperimentConfig& config, const Network& net, const TaskData& data, bool test);

// weights.json, loss_curve.csv, errors.csv.
Json cmd_train(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir);

// Reads weights.json; throws ShapeError when it does not match the config.
Network load_network(const ExperimentConfig& config, const std::string& dir);

// Per hidden layer: verdicts, logic matrix, receptive fields, theory families.
// Last layer: triples and group reports. Bars with two bars: raw activity and
// harmonics. Writes summary.json and returns it.
Json cmd_analyze(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir);

// Reads the last layer verdict table written by cmd_analyze. Throws
// EmptyResultError when no triple is conclusive.
Json cmd_weights(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir);

// Experiment one only (ConfigError otherwise).
Json cmd_generalize(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir);

// train, analyze, weights (an empty result is recorded, not fatal), and
// generalize for experiment one.
Json cmd_full(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir);

// Rescans `dir` and rewrites manifest.json with `section` merged into the
// results. timing.txt and the manifest itself are not listed.
void update_manifest(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir,
                     const std::string& section, const Json& results);

// Appends "<label> <seconds>" to timing.txt.
void record_timing(const std::string& dir, const std::string& label, double seconds);

// Thread count for seed fan-out: LOGIC_CELLS_THREADS when set, else the
// hardware concurrency, at least 1.
int fanout_threads();

struct SeedOutcome {
  std::uint64_t seed = 0;
  int exit_code = 0;
  std::string message;  // one line per seed
};

// Runs `job` for every seed on at most `threads` workers. Exceptions are
// turned into exit codes; outcomes come back in seed order.
std::vector<SeedOutcome> for_each_seed(const std::vector<std::uint64_t>& seeds, int threads,
                                       const std::function<std::string(std::uint64_t)>& job);

// Exit code of an exception: 2 config, 3 numerical, 4 empty result, 1 otherwise.
int exit_code_of(const std::exception& e);

}  // namespace logic_cells::experiment
