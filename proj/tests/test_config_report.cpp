#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "logic_cells/config.hpp"
#include "logic_cells/error.hpp"
#include "logic_cells/report.hpp"
#include "support.hpp"

using namespace logic_cells;

TEST_CASE("config defaults per task") {
  const auto m = parse_config("task = motor\n");
  CHECK(m.network.layer_sizes == std::vector<int>{55, 50, 25, 4});
  CHECK(m.num_conditions() == 3);
  const auto b = parse_config("task = bars\nexperiment = 3\n");
  CHECK(b.input_size() == 165);
  CHECK(b.num_conditions() == 6);
  CHECK(b.network.final_layer_mode == FinalLayerMode::LinearSoftmax);
  const auto two = parse_config("task = bars\nexperiment = 2\n");
  CHECK(two.conditions().names == std::vector<std::string>{"D", "IO", "II_R", "II_G"});
}

TEST_CASE("config grammar") {
  const auto c = parse_config("# comment\n task = bars # trailing\n\nseeds = 3, 1,2\nhidden_layers = 10,5\n");
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 1, 2});
  CHECK(c.network.layer_sizes == std::vector<int>{110, 10, 5, 3});
  CHECK_THROWS_AS(parse_config("colour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("task = motor\ntask = bars\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epochs\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epochs = \n"), ConfigError);
  CHECK_THROWS_AS(parse_config("task = fish\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epochs = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epochs = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("kappa = 1,2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("learning_rate = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("task = bars\nexperiment = 4\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/x.conf"), ConfigError);
}

TEST_CASE("shipped configs load") {
  for (const auto& e : std::filesystem::directory_iterator(LOGIC_CELLS_CONFIG_DIR)) {
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_config(e.path().string()));
  }
}

TEST_CASE("fnv1a reference values") {
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
}

TEST_CASE("every field moves the hash") {
  const std::vector<std::pair<std::string, std::string>> motor_fields{
      {"encoding", "z_prime"}, {"type1_cells", "18"}, {"type2a_cells", "14"}, {"type2b_cells", "12"},
      {"type2c_cells", "11"}, {"offset_sigma_deg", "30"}, {"kappa", "2,4,6"},
      {"final_layer", "linear_softmax\nloss = cross_entropy"}};
  const std::vector<std::pair<std::string, std::string>> bars_fields{
      {"experiment", "2"}, {"space", "circular"}, {"diameter", "20"}, {"dots", "120"}, {"red_lengths", "4"},
      {"green_lengths", "2"}, {"blue_length", "2"}, {"balanced", "true"},
      {"sensor_profile", "dog"}, {"sensor_width", "2"}, {"sensors_per_color", "50"},
      {"final_layer", "tanh\nloss = mse"}};
  const std::vector<std::pair<std::string, std::string>> common{
      {"hidden_layers", "20,10"}, {"activation_gain", "1.5"},
      {"learning_rate", "0.01"}, {"beta1", "0.8"}, {"beta2", "0.99"}, {"epsilon", "1e-7"},
      {"batch_size", "8"}, {"epochs", "3"}, {"train_samples", "100"}, {"test_samples", "100"},
      {"threshold", "0.4"}, {"concentration", "0.9"}, {"raw_resolution", "50"}, {"harmonic_degree", "4"},
      {"triple_full_limit", "40"}, {"triple_samples", "100"}, {"near_conclusive", "1"},
      {"permutations", "10"}, {"theory_limit", "8"}, {"out", "elsewhere"}, {"seeds", "2"}};
  for (const std::string task : {"motor", "bars"}) {
    const std::string base = "task = " + task + "\n";
    std::set<std::string> hashes{config_hash(parse_config(base))};
    auto fields = common;
    const auto& extra = task == "motor" ? motor_fields : bars_fields;
    fields.insert(fields.end(), extra.begin(), extra.end());
    for (const auto& [k, v] : fields) {
      CAPTURE(k);
      const auto c = parse_config(base + k + " = " + v + "\n");
      CHECK(hashes.insert(config_hash(c)).second);
    }
    CHECK(config_hash(parse_config(base)) == config_hash(parse_config("# same\n" + base)));
  }
  const auto blue = parse_config("task = bars\nexperiment = 3\nblue_probability = 0.3\n");
  CHECK(config_hash(blue) != config_hash(parse_config("task = bars\nexperiment = 3\n")));
}

TEST_CASE("double formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0, 0.0}) CHECK(std::stod(report::format_double(v)) == v);
  CHECK(report::format_double(1.0) == "1");
  CHECK(report::format_double(std::nan("")) == "nan");
}

TEST_CASE("csv writer and parser") {
  report::CsvWriter w({"a", "b"});
  w.cell("x").cell(1.5).end_row();
  CHECK(w.text() == "a,b\nx,1.5\n");
  CHECK_THROWS_AS(w.cell(1).end_row(), ShapeError);
  report::CsvWriter bad({"a"});
  CHECK_THROWS_AS(bad.cell("x,y"), DomainError);
  const auto t = report::parse_csv("a,b\n1,2\n3,4\n");
  CHECK(t.rows.size() == 2);
  CHECK(t.column("b") == 1);
  CHECK(t.rows[1][0] == "3");
  CHECK_THROWS_AS(t.column("c"), DomainError);
}

TEST_CASE("verdict table round trip") {
  auto m = fixtures::roman_matrix();
  const auto text = report::verdicts_csv(m, logic::cell_census(m));
  const auto back = report::read_verdicts_csv(text, m.conditions());
  REQUIRE(back.size() == m.cells().size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].bucket == m.cells()[k].bucket);
    CHECK(back[k].concentration == m.cells()[k].concentration);
  }
  CHECK(report::verdicts_csv(logic::build_logic_matrix(back, m.conditions()),
                             logic::cell_census(m)) == text);
  const auto lm = report::parse_csv(report::logic_matrix_csv(m));
  CHECK(lm.rows.size() == 16);
  CHECK(lm.header.back() == "score");
}

TEST_CASE("matrix csv round trip") {
  Rng rng(4);
  Eigen::MatrixXd a(4, 7);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal() * 1e3;
  CHECK(report::read_matrix_csv(report::matrix_csv(a)) == a);
}

TEST_CASE("scores csv") {
  const std::vector<weights::ScoreRecord> r{{{1, 5, 9}, 3, 0.5, 2.0, 4.0}};
  const auto t = report::parse_csv(report::scores_csv(r));
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][t.column("triple")] == "1-5-9");
}

TEST_CASE("svg figures are well formed") {
  Eigen::MatrixXd m(2, 3);
  m << -1, 0, 1, 0.5, -0.5, 0;
  const auto heat = report::heatmap_svg(m, -1, 1, "map & <title>");
  const auto hist = report::histogram_svg(weights::histogram({1, 2, 2, 3}, 3), "h", "x");
  const auto scat = report::scatter_svg({1, 2, 3}, {2, 4, 6}, weights::LinearFit{2, 0}, "s", "x", "y");
  for (const auto* svg : {&heat, &hist, &scat}) {
    CHECK(svg->rfind("<svg", 0) == 0);
    CHECK(svg->find("</svg>") != std::string::npos);
  }
  CHECK(heat.find("<title>") == std::string::npos);
  CHECK(heat.find("&amp;") != std::string::npos);
}

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(LOGIC_CELLS_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("command line exit codes") {
  const auto dir = std::filesystem::temp_directory_path() / "logic_cells_cli_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto bad = (dir / "bad.conf").string();
  std::ofstream(bad) << "colour = red\n";
  CHECK(run("train --config " + bad) == 2);
  CHECK(run("train") == 2);
  CHECK(run("frobnicate --config " + bad) == 2);

  // A tiny motor run without any conclusive triple.
  const auto tiny = (dir / "tiny.conf").string();
  std::ofstream(tiny) << "task = motor\nhidden_layers = 4,3\nepochs = 1\ntrain_samples = 60\ntest_samples = 60\n"
                      << "out = " << (dir / "out").string() << "\n";
  CHECK(run("train --config " + tiny + " --seed 1") == 0);
  CHECK(run("analyze --config " + tiny + " --seed 1") == 0);
  CHECK(std::filesystem::exists(dir / "out" / "seed_1" / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "out" / "seed_1" / "verdicts_L1.csv"));
  CHECK(run("generalize --config " + tiny + " --seed 1") == 2);
  std::filesystem::remove_all(dir);
}
