#include "logic_cells/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "logic_cells/error.hpp"
#include "logic_cells/harmonics.hpp"
#include "logic_cells/logic_analyzer.hpp"
#include "logic_cells/report.hpp"
#include "logic_cells/rng.hpp"
#include "logic_cells/weight_logic.hpp"

namespace fs = std::filesystem;

namespace logic_cells::experiment {

namespace {

constexpr std::uint64_t kTrainStream = 10;
constexpr std::uint64_t kTestStream = 11;
constexpr std::uint64_t kTripleStream = 12;
constexpr std::uint64_t kNullStream = 13;

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string layer_file(const std::string& stem, int layer, const std::string& ext) {
  return stem + "_L" + std::to_string(layer) + "." + ext;
}

std::string verdict_text(const logic::Verdict& v) { return v ? std::to_string(*v) : "none"; }

std::string mask_text(logic::Mask m, const logic::ConditionSet& conditions) {
  std::string out = "{";
  bool first = true;
  for (int s : logic::members(m)) {
    if (!first) out += "|";
    out += conditions.names[s];
    first = false;
  }
  return out + "}";
}

std::string deduction_text(const logic::Deduction& d, const logic::ConditionSet& conditions) {
  switch (d.kind) {
    case logic::DeductionKind::Condition: return conditions.names[d.condition];
    case logic::DeductionKind::Contradiction: return "contradiction";
    case logic::DeductionKind::Undecided: return "undecided" + mask_text(d.allowed, conditions);
  }
  return "?";
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json fit_json(const std::optional<weights::LinearFit>& f) {
  if (!f) return nullptr;
  return Json{{"slope", f->slope}, {"intercept", f->intercept}};
}

std::vector<bool> represented_from(const std::vector<logic::ReceptiveField>& fields, int conditions) {
  std::vector<bool> rep(conditions, false);
  if (!fields.empty()) {
    for (int s = 0; s < conditions; ++s) rep[s] = fields.front().represented(s);
  }
  return rep;
}

struct LayerLogic {
  int layer = 0;
  Eigen::MatrixXd activity;  // cells x test samples
  std::vector<logic::ReceptiveField> fields;
  logic::LogicMatrix matrix;
  logic::Census census;
};

LayerLogic layer_logic(const ExperimentConfig& config, const Network& net, const Dataset& data, int layer) {
  LayerLogic out;
  out.layer = layer;
  const auto conditions = config.conditions();
  out.activity = layer_activity(net, data.inputs, layer);
  out.fields = logic::record_receptive_fields(out.activity, data.labels, layer, conditions);
  std::vector<logic::CellVerdict> verdicts;
  verdicts.reserve(out.fields.size());
  for (const auto& f : out.fields) verdicts.push_back(logic::quantize_cell(f, config.analysis.quantization));
  out.matrix = logic::build_logic_matrix(verdicts, conditions, represented_from(out.fields, conditions.size()));
  out.census = logic::cell_census(out.matrix);
  return out;
}

logic::EnumerationOptions enumeration_options(const ExperimentConfig& config, std::uint64_t seed) {
  auto opts = config.analysis.enumeration;
  opts.seed = mix_seed(seed, kTripleStream);
  return opts;
}

int min_score(const ExperimentConfig& config) {
  return std::max(0, config.num_conditions() - config.analysis.near_conclusive);
}

std::string receptive_fields_csv(const LayerLogic& ll, const logic::ConditionSet& conditions) {
  report::CsvWriter w({"cell", "condition", "bin", "lo", "hi", "count"});
  constexpr int kBins = 20;
  for (const auto& f : ll.fields) {
    for (int s = 0; s < conditions.size(); ++s) {
      const auto h = f.histogram(s, kBins);
      const double width = (h.hi - h.lo) / kBins;
      for (int b = 0; b < kBins; ++b) {
        w.cell(f.cell).cell(conditions.names[s]).cell(b).cell(h.lo + b * width).cell(h.lo + (b + 1) * width);
        w.cell(h.counts[b]);
        w.end_row();
      }
    }
  }
  return w.text();
}

Json census_json(const logic::Census& census) {
  Json counts = Json::object();
  for (const auto& [k, v] : census.counts) counts[k] = v;
  return Json{{"counts", counts}, {"logical", census.logical}, {"cells", static_cast<int>(census.cells.size())}};
}

Json group_json(const logic::GroupReport& g, const logic::ConditionSet& conditions) {
  Json realized = Json::object();
  Json reconstructed = Json::array();
  for (int s = 0; s < conditions.size(); ++s) {
    realized[conditions.names[s]] = g.realized[s];
    if (g.reconstructed[s]) reconstructed.push_back(conditions.names[s]);
  }
  Json table = Json::array();
  for (const auto& row : g.table) {
    table.push_back(Json{{"signs", row.signs}, {"deduces", deduction_text(row.deduction, conditions)}});
  }
  Json skipped = Json::array();
  for (int s : g.skipped) skipped.push_back(conditions.names[s]);
  return Json{{"cells", g.cells},         {"score", g.score},       {"complete", g.complete},
              {"good_enough", g.good_enough}, {"efficient", g.efficient}, {"realized", realized},
              {"reconstructed", reconstructed}, {"skipped", skipped},  {"table", table}};
}

// Block average down to at most `limit` points per side.
Eigen::MatrixXd downsample(const Eigen::MatrixXd& m, int limit) {
  const int n = static_cast<int>(m.rows());
  if (n <= limit) return m;
  const int f = (n + limit - 1) / limit;
  const int r = (n + f - 1) / f;
  const int c = (static_cast<int>(m.cols()) + f - 1) / f;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r, c);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(r, c);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      out(i / f, j / f) += m(i, j);
      counts(i / f, j / f) += 1.0;
    }
  }
  return out.cwiseQuotient(counts);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Raw activity maps of the last hidden layer, with harmonic or reflection content.
Json analyze_raw_activity(const ExperimentConfig& config, const Network& net, const LayerLogic& ll,
                          const std::string& dir) {
  const auto& b = config.bars;
  logic::RawActivityOptions opts;
  opts.resolution = config.analysis.raw_resolution;
  opts.red_length = b.red_lengths.front();
  opts.green_length = b.green_lengths.front();
  const auto raw = logic::raw_activity(net, ll.layer, b.space, b.bank, opts);
  const fs::path raw_dir = fs::path(dir) / "raw";
  fs::create_directories(raw_dir);

  {
    Eigen::MatrixXd labels = raw.labels.cast<double>();
    report::write_file((raw_dir / "labels.csv").string(), report::matrix_csv(labels));
    report::write_file((raw_dir / "labels.svg").string(),
                       report::heatmap_svg(downsample(labels, 50), -1.0, 2.0, "topology label"));
  }

  const bool circular = b.space.kind == bars::SpaceKind::Circular;
  const bool experiment_one = b.experiment == bars::Experiment::One;
  std::vector<std::string> header{"cell", "kind", "min", "max", "mean", "region_agreement"};
  if (circular) {
    for (const char* h : {"total", "constant", "dominant_family", "dominant_degree", "dominant_fraction",
                          "fourier_cell"}) {
      header.push_back(h);
    }
  } else {
    for (const char* h : {"total", "symmetric", "antisymmetric"}) header.push_back(h);
  }
  report::CsvWriter w(header);
  int fourier_cells = 0;
  std::map<std::string, int> dominant;
  double sym_share_sum = 0.0;
  for (int k = 0; k < static_cast<int>(raw.maps.size()); ++k) {
    const auto& map = raw.maps[k];
    const std::string name = "L" + std::to_string(ll.layer) + "_cell" + std::to_string(k);
    report::write_file((raw_dir / (name + ".csv")).string(), report::matrix_csv(map));
    const std::string& kind = ll.census.cells[k].kind;
    std::string agreement;
    if (experiment_one && ends_with(kind, "-type")) {
      const int s = ll.matrix.conditions().index_of(kind.substr(0, kind.size() - 5));
      const auto& v = ll.matrix.cells()[k];
      const int other = (s + 1) % ll.matrix.num_conditions();
      agreement = report::format_double(logic::region_agreement(map, raw.labels, s, *v.bucket[s], *v.bucket[other],
                                                                config.analysis.quantization.threshold));
      report::write_file((raw_dir / (name + ".svg")).string(),
                         report::heatmap_svg(downsample(map, 50), -1.0, 1.0, name + " " + kind));
    }
    w.cell(k).cell(kind).cell(map.minCoeff()).cell(map.maxCoeff()).cell(map.mean()).cell(agreement.empty() ? "" : agreement);
    if (circular) {
      const auto h = logic::fit_harmonics(map, config.analysis.harmonic_degree);
      w.cell(h.total_energy).cell(h.constant).cell(logic::to_string(h.dominant_family)).cell(h.dominant_degree);
      w.cell(h.dominant_fraction).cell(h.fourier_cell ? 1 : 0);
      if (h.fourier_cell) {
        ++fourier_cells;
        ++dominant[logic::to_string(h.dominant_family) + std::to_string(h.dominant_degree)];
      }
    } else {
      const auto r = logic::reflection_split(map);
      w.cell(r.total_energy).cell(r.symmetric).cell(r.antisymmetric);
      if (r.total_energy > 0) sym_share_sum += r.symmetric / r.total_energy;
    }
    w.end_row();
  }
  report::write_file((raw_dir / layer_file("summary", ll.layer, "csv")).string(), w.text());

  Json out{{"layer", ll.layer}, {"resolution", opts.resolution}, {"cells", static_cast<int>(raw.maps.size())}};
  if (circular) {
    Json dom = Json::object();
    for (const auto& [key, count] : dominant) dom[key] = count;
    out["fourier_cells"] = fourier_cells;
    out["fourier_dominant"] = dom;
  } else {
    out["mean_symmetric_share"] = raw.maps.empty() ? 0.0 : sym_share_sum / raw.maps.size();
  }
  return out;
}

Json conditioning_decode_summary(const TaskData& data) {
  const auto& test = data.motor_test;
  int correct = 0, consistent = 0, failed = 0;
  double angle_error = 0.0;
  for (int j = 0; j < test.data.size(); ++j) {
    try {
      const auto d = motor::logical_conditioning_decode(test.data.inputs.col(j), data.population);
      const auto& truth = test.samples[j];
      if (d.condition == truth.condition) ++correct;
      if (d.consistent) ++consistent;
      angle_error += std::abs(motor::wrap_angle(d.theta - truth.theta));
    } catch (const DomainError&) {
      ++failed;
    }
  }
  const int n = test.data.size();
  const int ok = n - failed;
  return Json{{"samples", n},
              {"accuracy", n == 0 ? 0.0 : static_cast<double>(correct) / n},
              {"consistent", n == 0 ? 0.0 : static_cast<double>(consistent) / n},
              {"mean_angle_error", ok == 0 ? 0.0 : angle_error / ok},
              {"undecodable", failed}};
}

Json read_json(const std::string& path) { return Json::parse(report::read_file(path)); }

}  // namespace

std::string seed_dir(const std::string& out, std::uint64_t seed) {
  return (fs::path(out) / ("seed_" + std::to_string(seed))).string();
}

TaskData make_task_data(const ExperimentConfig& config, std::uint64_t seed) {
  TaskData d;
  d.task = config.task;
  if (config.task == Task::Motor) {
    d.population = motor::build_population(seed, config.population);
    d.motor_train = motor::generate_dataset(config.train_samples, mix_seed(seed, kTrainStream), config.encoding,
                                            d.population);
    d.motor_test = motor::generate_dataset(config.test_samples, mix_seed(seed, kTestStream), config.encoding,
                                           d.population);
  } else {
    auto train = config.bars;
    train.count = config.train_samples;
    train.seed = mix_seed(seed, kTrainStream);
    d.bars_train = bars::generate_dataset(train);
    d.test_spec = config.bars;
    d.test_spec.count = config.test_samples;
    d.test_spec.seed = mix_seed(seed, kTestStream);
    d.test_spec.balanced = false;
    d.bars_test = bars::generate_dataset(d.test_spec);
  }
  return d;
}

double task_error(const ExperimentConfig& config, const Network& net, const TaskData& data, bool test) {
  if (config.task == Task::Motor) {
    return motor::condition_error(net, test ? data.motor_test : data.motor_train, config.encoding);
  }
  return bars::classification_error(net, test ? data.bars_test : data.bars_train);
}

Json cmd_train(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir) {
  fs::create_directories(dir);
  const TaskData data = make_task_data(config, seed);
  auto tc = config.train;
  tc.seed = seed;
  const auto result = train(config.network, data.train(), tc);

  report::write_file(path_in(dir, "weights.json"), network_to_json(result.net, seed, result.loss_curve));
  report::CsvWriter curve({"epoch", "loss"});
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e) {
    curve.cell(static_cast<int>(e + 1)).cell(result.loss_curve[e]);
    curve.end_row();
  }
  report::write_file(path_in(dir, "loss_curve.csv"), curve.text());

  const double train_error = task_error(config, result.net, data, false);
  const double test_error = task_error(config, result.net, data, true);
  report::CsvWriter errors({"set", "samples", "error"});
  errors.cell("train").cell(data.train().size()).cell(train_error).end_row();
  errors.cell("test").cell(data.test().size()).cell(test_error).end_row();
  report::write_file(path_in(dir, "errors.csv"), errors.text());

  Json results{{"epochs", tc.epochs},
               {"final_loss", result.loss_curve.empty() ? Json(nullptr) : Json(result.loss_curve.back())},
               {"test_loss", mean_loss(result.net, data.test())},
               {"train_error", train_error},
               {"test_error", test_error}};
  update_manifest(config, seed, dir, "train", results);
  return results;
}

Network load_network(const ExperimentConfig& config, const std::string& dir) {
  auto dump = network_from_json(report::read_file(path_in(dir, "weights.json")));
  if (!(dump.net.config == config.network)) throw ShapeError("weight dump does not match the configured network");
  return std::move(dump.net);
}

Json cmd_analyze(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir) {
  const Network net = load_network(config, dir);
  const TaskData data = make_task_data(config, seed);
  const auto conditions = config.conditions();
  const int hidden = net.num_hidden_layers();

  Json layers = Json::array();
  Json summary{{"seed", seed}, {"analysis_set", "test"}, {"samples", data.test().size()}};
  LayerLogic last;
  for (int layer = 1; layer <= hidden; ++layer) {
    LayerLogic ll = layer_logic(config, net, data.test(), layer);
    report::write_file(path_in(dir, layer_file("verdicts", layer, "csv")), report::verdicts_csv(ll.matrix, ll.census));
    report::write_file(path_in(dir, layer_file("logic_matrix", layer, "csv")), report::logic_matrix_csv(ll.matrix));
    report::write_file(path_in(dir, layer_file("receptive_fields", layer, "csv")),
                       receptive_fields_csv(ll, conditions));

    logic::TheoryOptions topts;
    topts.enumeration_limit = config.analysis.theory_limit;
    topts.quantization = config.analysis.quantization;
    const auto theory = logic::theory_families(ll.matrix, ll.activity, topts);
    std::optional<double> mli;
    try {
      mli = logic::minimal_logical_information(theory, conditions.size());
    } catch (const EmptyResultError&) {
    }
    {
      std::vector<std::string> header{"count", "deduces"};
      for (int c : theory.cells) header.push_back("cell" + std::to_string(c));
      report::CsvWriter w(header);
      for (const auto& t : theory.t2) {
        w.cell(t.count).cell(deduction_text(t.deduction, conditions));
        for (int s : t.signs) w.cell(s);
        w.end_row();
      }
      report::write_file(path_in(dir, layer_file("theories", layer, "csv")), w.text());
    }
    const auto sound = logic::check_soundness(ll.matrix, ll.activity, data.test().labels, config.analysis.quantization);

    double value_sum = 0.0;
    for (int k = 0; k < ll.matrix.num_cells(); ++k) value_sum += logic::individual_logical_value(ll.matrix, k).value;

    layers.push_back(Json{
        {"layer", layer},
        {"census", census_json(ll.census)},
        {"mean_logical_value", ll.matrix.num_cells() == 0 ? 0.0 : value_sum / ll.matrix.num_cells()},
        {"theory",
         Json{{"logical_cells", static_cast<int>(theory.cells.size())},
              {"t0_size", theory.t0_size},
              {"t1_size", theory.t1_size ? Json(*theory.t1_size) : Json(nullptr)},
              {"t2_size", static_cast<int>(theory.t2.size())},
              {"t2_contradictions", theory.t2_contradictions},
              {"t2_within_t1", theory.t2_within_t1}}},
        {"minimal_logical_information", optional_json(mli)},
        {"soundness", Json{{"samples", sound.samples}, {"contradictions", sound.contradictions}}}});
    if (layer == hidden) last = std::move(ll);
  }
  summary["layers"] = layers;

  if (hidden >= 1) {
    const auto triples = logic::enumerate_conclusive_triples(last.matrix, enumeration_options(config, seed));
    report::CsvWriter w({"a", "b", "c", "N"});
    std::vector<int> histogram(conditions.size() + 1, 0);
    for (const auto& t : triples.triples) {
      w.cell(t.cells[0]).cell(t.cells[1]).cell(t.cells[2]).cell(t.score).end_row();
      ++histogram[t.score];
    }
    report::write_file(path_in(dir, "triples.csv"), w.text());

    const int cutoff = min_score(config);
    std::string groups;
    int reported = 0;
    for (const auto& t : triples.triples) {
      if (t.score < cutoff) break;  // sorted by score
      const auto g = logic::classify_group(last.matrix, {t.cells.begin(), t.cells.end()});
      groups += group_json(g, conditions).dump() + "\n";
      ++reported;
    }
    report::write_file(path_in(dir, "groups.jsonl"), groups);
    summary["triples"] = Json{{"layer", last.layer},
                              {"total", triples.total},
                              {"evaluated", triples.evaluated},
                              {"sampled", triples.sampled},
                              {"conclusive", triples.conclusive},
                              {"conclusive_fraction", triples.conclusive_fraction()},
                              {"score_histogram", histogram},
                              {"groups_reported", reported}};

    if (config.task == Task::Bars && config.bars.experiment != bars::Experiment::Three) {
      summary["raw_activity"] = analyze_raw_activity(config, net, last, dir);
    }
  }
  if (config.task == Task::Motor) summary["conditioning_decode"] = conditioning_decode_summary(data);

  report::write_file(path_in(dir, "summary.json"), summary.dump(2) + "\n");
  Json results{{"last_layer_census", summary["layers"].back()["census"]}};
  if (summary.contains("triples")) results["conclusive_fraction"] = summary["triples"]["conclusive_fraction"];
  update_manifest(config, seed, dir, "analyze", results);
  return summary;
}

Json cmd_weights(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir) {
  const Network net = load_network(config, dir);
  const auto conditions = config.conditions();
  const int layer = net.num_hidden_layers();
  if (layer < 1) throw ConfigError("weight analysis needs a hidden layer");
  const auto verdicts =
      report::read_verdicts_csv(report::read_file(path_in(dir, layer_file("verdicts", layer, "csv"))), conditions);
  std::vector<bool> represented(conditions.size(), false);
  for (const auto& v : verdicts) {
    for (int s = 0; s < conditions.size(); ++s) represented[s] = represented[s] || v.concentration[s] > 0.0;
  }
  const auto matrix = logic::build_logic_matrix(verdicts, conditions, represented);
  const auto triples = logic::enumerate_conclusive_triples(matrix, enumeration_options(config, seed));
  if (triples.conclusive == 0) {
    update_manifest(config, seed, dir, "weights", Json{{"conclusive", 0}});
    throw EmptyResultError("no conclusive triple in layer " + std::to_string(layer));
  }
  const auto records = weights::score_triples(net, matrix, triples, min_score(config));
  report::write_file(path_in(dir, "scores.csv"), report::scores_csv(records));

  std::string cores;
  for (const auto& t : triples.triples) {
    if (t.score < conditions.size()) break;
    const std::vector<int> cells(t.cells.begin(), t.cells.end());
    const auto core = weights::core_matrix(matrix, cells);
    const auto w = weights::extract_weight_slice(net, cells);
    const auto m = weights::composite(w, core);
    cores += Json{{"cells", cells},
                  {"signs", matrix_json(core.signs)},
                  {"deduction", matrix_json(core.deduction)},
                  {"weights", matrix_json(w)},
                  {"composite", matrix_json(m)}}
                 .dump() +
             "\n";
  }
  report::write_file(path_in(dir, "core_matrices.jsonl"), cores);

  Json corr{{"layer", layer},
            {"conclusive", triples.conclusive},
            {"min_score", min_score(config)},
            {"records", static_cast<int>(records.size())}};
  if (records.size() >= 3) {
    const auto cr = weights::correlate(records);
    std::vector<double> angle, mu, brut;
    for (const auto& r : records) {
      angle.push_back(r.logic_angle);
      mu.push_back(r.mu_w);
      brut.push_back(r.brut);
    }
    corr["r_angle_mu"] = optional_json(cr.r_angle_mu);
    corr["r_angle_brut"] = optional_json(cr.r_angle_brut);
    corr["fit_mu"] = fit_json(cr.fit_mu);
    corr["fit_brut"] = fit_json(cr.fit_brut);
    if (cr.r_angle_mu) {
      const auto null = weights::permutation_null(angle, mu, config.analysis.permutations, mix_seed(seed, kNullStream));
      corr["null_angle_mu"] =
          Json{{"mean_abs_r", null.mean_abs_r}, {"p_value", null.p_value}, {"permutations", null.permutations}};
    }
    report::write_file(path_in(dir, "scatter_angle_mu.svg"),
                       report::scatter_svg(angle, mu, cr.fit_mu, "logic angle vs mu_W", "logic angle", "mu_W"));
    report::write_file(path_in(dir, "scatter_angle_brut.svg"),
                       report::scatter_svg(angle, brut, cr.fit_brut, "logic angle vs brut score", "logic angle",
                                           "brut weight score"));
    report::write_file(path_in(dir, "hist_angle.svg"), report::histogram_svg(cr.angle_bins, "logic angle", "angle"));
    report::write_file(path_in(dir, "hist_score.svg"), report::histogram_svg(cr.score_bins, "score N", "N"));
    report::write_file(path_in(dir, "hist_mu.svg"), report::histogram_svg(cr.mu_bins, "mu_W", "mu_W"));
    report::write_file(path_in(dir, "hist_brut.svg"),
                       report::histogram_svg(cr.brut_bins, "brut weight score", "l1 norm"));
  } else {
    corr["r_angle_mu"] = nullptr;
    corr["r_angle_brut"] = nullptr;
  }
  report::write_file(path_in(dir, "correlation.json"), corr.dump(2) + "\n");
  update_manifest(config, seed, dir, "weights", corr);
  return corr;
}

Json cmd_generalize(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir) {
  if (config.task != Task::Bars || config.bars.experiment != bars::Experiment::One) {
    throw ConfigError("generalize needs a bars experiment 1 configuration");
  }
  const Network net = load_network(config, dir);
  const TaskData data = make_task_data(config, seed);
  const auto sets = bars::generalization_sets(data.test_spec);
  const std::vector<std::pair<std::string, const bars::BarsDataset*>> named{
      {"base", &data.bars_test}, {"longer", &sets.longer}, {"swapped", &sets.swapped},
      {"longer_swapped", &sets.longer_swapped}};

  report::CsvWriter errors({"set", "samples", "error"});
  Json results = Json::object();
  for (const auto& [name, ds] : named) {
    const double e = bars::classification_error(net, *ds);
    errors.cell(name).cell(ds->data.size()).cell(e).end_row();
    results[name + "_error"] = e;
  }
  report::write_file(path_in(dir, "generalization.csv"), errors.text());

  const auto conditions = config.conditions();
  report::CsvWriter diff({"set", "layer", "cell", "condition", "base", "other"});
  Json flips = Json::object();
  for (int layer = 1; layer <= net.num_hidden_layers(); ++layer) {
    const auto base = layer_logic(config, net, data.bars_test.data, layer);
    for (std::size_t i = 1; i < named.size(); ++i) {
      const auto other = layer_logic(config, net, named[i].second->data, layer);
      int changed = 0;
      for (int k = 0; k < base.matrix.num_cells(); ++k) {
        for (int s = 0; s < conditions.size(); ++s) {
          const auto& a = base.matrix.cells()[k].bucket[s];
          const auto& b = other.matrix.cells()[k].bucket[s];
          if (a == b) continue;
          diff.cell(named[i].first).cell(layer).cell(k).cell(conditions.names[s]).cell(verdict_text(a));
          diff.cell(verdict_text(b)).end_row();
          ++changed;
        }
      }
      const std::string key = named[i].first;
      if (!flips.contains(key)) flips[key] = Json::object();
      flips[key]["L" + std::to_string(layer)] = changed;
    }
  }
  report::write_file(path_in(dir, "verdict_diff.csv"), diff.text());
  results["verdict_changes"] = flips;
  update_manifest(config, seed, dir, "generalize", results);
  return results;
}

Json cmd_full(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir) {
  Json out = Json::object();
  out["train"] = cmd_train(config, seed, dir);
  const Json summary = cmd_analyze(config, seed, dir);
  out["analyze"] = Json{{"conclusive_fraction", summary.contains("triples") ? summary["triples"]["conclusive_fraction"]
                                                                             : Json(nullptr)}};
  try {
    out["weights"] = cmd_weights(config, seed, dir);
  } catch (const EmptyResultError& e) {
    out["weights"] = Json{{"empty", e.what()}};
  }
  if (config.task == Task::Bars && config.bars.experiment == bars::Experiment::One) {
    out["generalize"] = cmd_generalize(config, seed, dir);
  }
  return out;
}

void update_manifest(const ExperimentConfig& config, std::uint64_t seed, const std::string& dir,
                     const std::string& section, const Json& results) {
  const std::string manifest_path = path_in(dir, "manifest.json");
  Json all_results = Json::object();
  if (fs::exists(manifest_path)) {
    const Json old = read_json(manifest_path);
    if (old.contains("results")) all_results = old["results"];
  }
  all_results[section] = results;

  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == "manifest.json" || rel == "timing.txt") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  Json listed = Json::array();
  for (const auto& f : files) {
    const std::string bytes = report::read_file(path_in(dir, f));
    listed.push_back(Json{{"path", f}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
  }
  Json manifest{{"config_hash", config_hash(config)}, {"seed", seed}, {"results", all_results}, {"files", listed}};
  report::write_file(manifest_path, manifest.dump(2) + "\n");
}

void record_timing(const std::string& dir, const std::string& label, double seconds) {
  fs::create_directories(dir);
  std::ofstream out(path_in(dir, "timing.txt"), std::ios::app);
  out << label << " " << seconds << "\n";
}

int fanout_threads() {
  if (const char* env = std::getenv("LOGIC_CELLS_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<SeedOutcome> for_each_seed(const std::vector<std::uint64_t>& seeds, int threads,
                                       const std::function<std::string(std::uint64_t)>& job) {
  std::vector<SeedOutcome> out(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      out[i].seed = seeds[i];
      try {
        out[i].message = job(seeds[i]);
      } catch (const std::exception& e) {
        out[i].exit_code = exit_code_of(e);
        out[i].message = e.what();
      }
    }
  };
  const int n = std::clamp(threads, 1, std::max(1, static_cast<int>(seeds.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

int exit_code_of(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  if (dynamic_cast<const EmptyResultError*>(&e)) return 4;
  return 1;
}

}  // namespace logic_cells::experiment
