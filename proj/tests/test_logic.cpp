#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "logic_cells/error.hpp"
#include "logic_cells/harmonics.hpp"
#include "logic_cells/logic_analyzer.hpp"
#include "support.hpp"

using namespace logic_cells;
using namespace logic_cells::logic;
using fixtures::roman;

namespace {

const ConditionSet kEHEH{{"E", "H", "EH"}};

Mask bit(int s) { return Mask{1} << s; }

ReceptiveField field_of(std::vector<std::vector<double>> samples) {
  ReceptiveField f;
  f.cell = 0;
  f.layer = 1;
  f.samples = std::move(samples);
  return f;
}

LogicMatrix random_matrix(Rng& rng, int cells, int conditions) {
  std::vector<CellVerdict> v;
  for (int k = 0; k < cells; ++k) {
    std::vector<Verdict> b;
    for (int s = 0; s < conditions; ++s) {
      const auto r = rng.below(4);
      b.push_back(r == 3 ? Verdict{} : Verdict{static_cast<int>(r) - 1});
    }
    v.push_back(make_verdict(k, b));
  }
  std::vector<std::string> names;
  for (int s = 0; s < conditions; ++s) names.push_back("c" + std::to_string(s));
  return build_logic_matrix(v, {names});
}

}  // namespace

TEST_CASE("masks") {
  CHECK(full_mask(3) == 0b111U);
  CHECK(popcount(0b1011U) == 3);
  CHECK(members(0b1010U) == std::vector<int>{1, 3});
  CHECK_THROWS_AS((ConditionSet{{"A", "A"}}.validate()), ConfigError);
  CHECK(kEHEH.index_of("EH") == 2);
}

TEST_CASE("receptive fields partition the samples by label") {
  Eigen::MatrixXd act(2, 5);
  act << 0.1, 0.2, 0.3, 0.4, 0.5, -0.1, -0.2, -0.3, -0.4, -0.5;
  const auto fields = record_receptive_fields(act, {0, 1, 0, 2, 2}, 2, kEHEH);
  REQUIRE(fields.size() == 2);
  CHECK(fields[0].total() == 5);
  CHECK(fields[0].samples[0] == std::vector<double>{0.1, 0.3});
  CHECK(fields[1].samples[2] == std::vector<double>{-0.4, -0.5});
  CHECK(fields[1].layer == 2);
  const auto h = fields[0].histogram(2, 4);
  CHECK(h.counts == std::vector<int>{0, 0, 1, 1});
  const auto missing = record_receptive_fields(act, {0, 0, 0, 1, 1}, 1, kEHEH);
  CHECK_FALSE(missing[0].represented(2));
}

TEST_CASE("bucket boundaries") {
  CHECK(bucket_of(0.34) == 1);
  CHECK(bucket_of(1.0 / 3.0) == 0);
  CHECK(bucket_of(-0.34) == -1);
  CHECK(bucket_of(0.0) == 0);
}

TEST_CASE("quantization examples") {
  auto v = quantize_cell(field_of({std::vector<double>(10, 0.95), {}, {}}));
  CHECK(v.bucket[0] == Verdict{1});
  CHECK(v.concentration[0] == 1.0);
  CHECK_FALSE(v.bucket[1].has_value());

  std::vector<double> half(50, -0.9);
  half.insert(half.end(), 50, 0.9);
  v = quantize_cell(field_of({half}));
  CHECK_FALSE(v.bucket[0].has_value());

  std::vector<double> mostly(85, -0.8);
  mostly.insert(mostly.end(), 15, 0.8);
  v = quantize_cell(field_of({mostly}));
  CHECK(v.bucket[0] == Verdict{-1});
  CHECK(v.concentration[0] == doctest::Approx(0.85));

  // Order of samples does not matter.
  std::reverse(mostly.begin(), mostly.end());
  CHECK(quantize_cell(field_of({mostly})).bucket[0] == Verdict{-1});

  // The interior bucket is a verdict too.
  v = quantize_cell(field_of({std::vector<double>(10, 0.05)}));
  CHECK(v.bucket[0] == Verdict{0});
}

TEST_CASE("logic matrix rows") {
  const auto m = build_logic_matrix({make_verdict(0, {1, 1, -1}), make_verdict(1, {{}, {}, {}})}, kEHEH);
  CHECK(m.allowed(0, 1) == (bit(0) | bit(1)));
  CHECK(m.allowed(0, -1) == bit(2));
  CHECK(m.score(0, 1) == 1);
  CHECK(m.score(0, -1) == 2);
  CHECK(m.allowed(1, 1) == full_mask(3));
  CHECK(m.score(1, -1) == 0);
  CHECK(m.allowed(0, 0) == full_mask(3));
  CHECK(m.entry(0, 1, 2) == 0);
  CHECK(m.entry(0, 1, 0) == 1);

  const auto r = fixtures::roman_matrix();
  CHECK(r.allowed(roman(6), 1) == bit(0));
  for (int k = 0; k < r.num_cells(); ++k) {
    for (int eps : {1, -1}) CHECK(r.score(k, eps) == 3 - popcount(r.allowed(k, eps)));
  }
}

TEST_CASE("individual logical values") {
  const auto r = fixtures::roman_matrix();
  CHECK(individual_logical_value(r, roman(6)).value == 0.75);
  CHECK(individual_logical_value(r, roman(1)).value == 0.5);
  const auto blank = build_logic_matrix({make_verdict(0, {{}, {}, {}})}, kEHEH);
  CHECK(individual_logical_value(blank, 0).value == 0.0);
  const auto four = build_logic_matrix({make_verdict(0, {1, -1, -1, {}})}, {{"a", "b", "c", "d"}});
  const auto v = individual_logical_value(four, 0);
  CHECK(v.generalized);
  CHECK(v.value == 0.75);  // +1 excludes b, c; -1 excludes a
}

TEST_CASE("deduction examples") {
  const auto r = fixtures::roman_matrix();
  auto d = deduce(r, {roman(1), roman(2), roman(3)}, {1, 1, -1});
  CHECK(d.kind == DeductionKind::Contradiction);
  d = deduce(r, {roman(1), roman(4), roman(5)}, {-1, -1, 1});
  CHECK(d.kind == DeductionKind::Condition);
  CHECK(d.condition == 2);
  d = deduce(r, {roman(6), roman(7), roman(8)}, {1, -1, -1});
  CHECK(d.condition == 0);
  d = deduce(r, {roman(1)}, {1});
  CHECK(d.kind == DeductionKind::Undecided);
  CHECK(d.allowed == (bit(0) | bit(1)));
  CHECK_THROWS_AS(deduce(r, {0, 1}, {1}), ShapeError);
}

TEST_CASE("published truth tables") {
  const auto r = fixtures::roman_matrix();
  for (const auto& t : fixtures::published_tables()) {
    std::vector<int> group;
    for (int n : t.cells) group.push_back(roman(n));
    const auto g = classify_group(r, group);
    REQUIRE(g.table.size() == 8);
    CHECK(g.table.front().signs == std::vector<int>{1, 1, 1});
    CHECK(g.table.back().signs == std::vector<int>{-1, -1, -1});
    for (int i = 0; i < 8; ++i) {
      CAPTURE(t.name);
      CAPTURE(i);
      CHECK(fixtures::deduction_label(g.table[i].deduction) == t.rows[i]);
    }
  }
}

TEST_CASE("group classification") {
  const auto r = fixtures::roman_matrix();
  auto g = classify_group(r, {roman(1), roman(2), roman(3)});
  CHECK(g.complete);
  CHECK(g.good_enough);
  CHECK(g.efficient);
  CHECK(g.score == 3);

  // With verdicts, contraposition gives IV and V a definite sign under H, so
  // both triples of the four-cell proposition already reconstruct every
  // condition.
  for (const auto& cells : {std::vector<int>{1, 4, 5}, std::vector<int>{1, 2, 5}}) {
    std::vector<int> group;
    for (int n : cells) group.push_back(roman(n));
    g = classify_group(r, group);
    CHECK(g.complete);
    CHECK(g.good_enough);
  }
  g = classify_group(r, {roman(1), roman(2), roman(4), roman(5)});
  CHECK(g.good_enough);
  CHECK(g.efficient);

  g = classify_group(r, {roman(6), roman(7), roman(8)});
  CHECK(g.efficient);
  CHECK(g.realized[0] == std::vector<int>{1, -1, -1});

  // A lone crossed cell is neither.
  g = classify_group(r, {roman(1)});
  CHECK_FALSE(g.complete);
  CHECK_FALSE(g.good_enough);
  CHECK(g.score == 0);
  CHECK(group_score(r, {roman(1), roman(2), roman(3)}) == 3);
}

TEST_CASE("unrepresented conditions are skipped") {
  std::vector<CellVerdict> v;
  for (int k = 0; k < 8; ++k) v.push_back(make_verdict(k, fixtures::roman_cells()[k]));
  const auto m = build_logic_matrix(v, kEHEH, {true, false, true});
  const auto g = classify_group(m, {roman(6), roman(7), roman(8)});
  CHECK(g.skipped == std::vector<int>{1});
  CHECK(g.score == 2);
  CHECK(g.good_enough);
  CHECK_FALSE(g.reconstructed[1]);
}

TEST_CASE("deduction is monotone in the group") {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const auto m = random_matrix(rng, 6, 4);
    std::vector<int> group{0, 1, 2};
    std::vector<int> signs;
    for (int i = 0; i < 4; ++i) signs.push_back(static_cast<int>(rng.below(3)) - 1);
    const auto small = deduce(m, group, {signs[0], signs[1], signs[2]});
    group.push_back(3);
    const auto big = deduce(m, group, signs);
    CHECK((big.allowed & ~small.allowed) == 0);
  }
}

TEST_CASE("triple enumeration") {
  const auto r = fixtures::roman_matrix();
  const auto e = enumerate_conclusive_triples(r);
  CHECK(e.total == 56);
  CHECK(e.evaluated == 56);
  CHECK_FALSE(e.sampled);
  for (std::size_t i = 1; i < e.triples.size(); ++i) CHECK(e.triples[i - 1].score >= e.triples[i].score);
  for (const auto& t : e.triples) CHECK(t.score == group_score(r, {t.cells.begin(), t.cells.end()}));
  // VI and VII form an efficient pair; any third cell keeps the triple conclusive.
  for (const auto& t : e.triples) {
    const bool has_pair = std::count(t.cells.begin(), t.cells.end(), roman(6)) &&
                          std::count(t.cells.begin(), t.cells.end(), roman(7));
    if (has_pair) CHECK(t.score == 3);
  }

  // Three copies of one cell deduce no more than the cell alone.
  const auto copies = build_logic_matrix({make_verdict(0, {1, -1, {}}), make_verdict(1, {1, -1, {}}),
                                          make_verdict(2, {1, -1, {}})}, kEHEH);
  CHECK(enumerate_conclusive_triples(copies).triples.front().score == group_score(copies, {0}));

  Rng rng(5);
  const auto big = random_matrix(rng, 70, 3);
  EnumerationOptions opts;
  opts.samples = 500;
  const auto s = enumerate_conclusive_triples(big, opts);
  CHECK(s.sampled);
  CHECK(s.evaluated == 500);
  CHECK(s.coverage() == doctest::Approx(500.0 / 54740));
}

TEST_CASE("theory families and minimal logical information") {
  const auto r = fixtures::roman_matrix();
  // Cells VI, VII, VIII on ideal data: every condition realized exactly.
  const std::vector<CellVerdict> v{make_verdict(0, {1, -1, -1}), make_verdict(1, {-1, 1, -1}),
                                   make_verdict(2, {-1, -1, 1})};
  const auto m = build_logic_matrix(v, kEHEH);
  Eigen::MatrixXd act(3, 3);
  act << 0.9, -0.9, -0.9, -0.9, 0.9, -0.9, -0.9, -0.9, 0.9;
  const auto f = theory_families(m, act);
  CHECK(f.cells == std::vector<int>{0, 1, 2});
  CHECK(f.t0_size == 27.0);
  REQUIRE(f.t1_size);
  CHECK(f.t2.size() == 3);
  CHECK(f.t2_within_t1);
  CHECK(f.t2_contradictions == 0);
  CHECK(minimal_logical_information(f, 3) == 1.0);
  // Brute-force count of consistent vectors over {-1, 0, 1}^3.
  std::int64_t consistent = 0;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c) consistent += deduce(m, {0, 1, 2}, {a, b, c}).kind != DeductionKind::Contradiction;
  CHECK(*f.t1_size == consistent);

  // Shrinking T2 cannot lower the minimum.
  Eigen::MatrixXd mixed(3, 4);
  mixed << 0.9, -0.9, -0.9, 0.0, -0.9, 0.9, -0.9, 0.0, -0.9, -0.9, 0.9, 0.0;
  const auto wide = theory_families(m, mixed);
  const auto narrow = theory_families(m, mixed.leftCols(3));
  CHECK(minimal_logical_information(narrow, 3) >= minimal_logical_information(wide, 3));
  CHECK(minimal_logical_information(wide, 3) == 0.0);

  // A layer without any logical cell decides nothing.
  const auto blank = build_logic_matrix({make_verdict(0, {{}, {}, {}})}, kEHEH);
  const auto fb = theory_families(blank, Eigen::MatrixXd::Constant(1, 4, 0.9));
  CHECK(fb.cells.empty());
  CHECK(minimal_logical_information(fb, 3) == 0.0);

  TheoryFamilies empty;
  CHECK_THROWS_AS(minimal_logical_information(empty, 3), EmptyResultError);
  (void)r;
}

TEST_CASE("propositions and decisions") {
  CHECK(nontrivial_propositions(3).size() == 6);
  CHECK(nontrivial_propositions(6).size() == 62);
  CHECK(decides(bit(0), bit(0) | bit(1)));
  CHECK(decides(bit(2), bit(0) | bit(1)));
  CHECK_FALSE(decides(bit(0) | bit(2), bit(0) | bit(1)));
}

TEST_CASE("soundness on consistent and contradicting data") {
  const std::vector<CellVerdict> v{make_verdict(0, {1, -1, -1}), make_verdict(1, {-1, 1, -1})};
  const auto m = build_logic_matrix(v, kEHEH);
  Eigen::MatrixXd act(2, 3);
  act << 0.9, -0.9, -0.9, -0.9, 0.9, -0.9;
  CHECK(check_soundness(m, act, {0, 1, 2}).contradictions == 0);
  const auto bad = check_soundness(m, act, {1, 1, 2});
  CHECK(bad.contradictions == 1);
  CHECK(bad.offending_samples == std::vector<int>{0});
}

TEST_CASE("census") {
  const auto m = build_logic_matrix({make_verdict(0, {1, -1, -1}), make_verdict(1, {-1, -1, 1}),
                                     make_verdict(2, {1, 1, 1}), make_verdict(3, {1, {}, -1}),
                                     make_verdict(4, {{}, {}, {}}), make_verdict(5, {1, 0, -1})},
                                    kEHEH);
  const auto c = cell_census(m);
  CHECK(c.cells[0].kind == "E-type");
  CHECK(c.cells[1].kind == "EH-type");
  CHECK(c.cells[2].kind == "constant");
  CHECK(c.cells[3].kind == "partial");
  CHECK(c.cells[4].kind == "uninformative");
  CHECK(c.cells[5].kind == "mixed");
  CHECK(c.counts.at("H-type") == 0);
  CHECK(c.logical == 5);
  for (const auto& n : kEHEH.names) CHECK(c.counts.count(n + "-type") == 1);
}

TEST_CASE("harmonic fit on exact harmonics") {
  const int n = 64;
  Eigen::MatrixXd map(n, n), constant = Eigen::MatrixXd::Constant(n, n, 0.4), red(n, n), mix(n, n);
  Rng rng(2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double a = 2 * std::numbers::pi * i / n, b = 2 * std::numbers::pi * j / n;
      map(i, j) = std::cos(3 * (a - b));
      red(i, j) = std::sin(2 * a) + 0.1;
      mix(i, j) = rng.uniform(-1, 1);
    }
  }
  auto h = fit_harmonics(map, 6);
  CHECK(h.dominant_family == HarmonicFamily::Difference);
  CHECK(h.dominant_degree == 3);
  CHECK(h.dominant_fraction == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(h.fourier_cell);
  CHECK(h.total_energy == doctest::Approx(0.5).epsilon(1e-12));

  h = fit_harmonics(constant, 6);
  CHECK(h.constant == doctest::Approx(0.16).epsilon(1e-12));
  CHECK(h.dominant_family == HarmonicFamily::Constant);
  CHECK_FALSE(h.fourier_cell);

  h = fit_harmonics(red, 6);
  CHECK(h.dominant_family == HarmonicFamily::Red);
  CHECK(h.dominant_degree == 2);

  h = fit_harmonics(mix, 6);
  double sum = h.constant + h.other;
  for (int k = 0; k < 6; ++k) sum += h.red[k] + h.green[k] + h.difference[k] + h.sum[k];
  CHECK(std::abs(sum - h.total_energy) < 1e-9);
  CHECK(std::abs(h.total_energy - mix.squaredNorm() / (n * n)) < 1e-9);
  CHECK_FALSE(h.fourier_cell);

  CHECK_THROWS_AS(fit_harmonics(Eigen::MatrixXd::Zero(4, 5), 1), ShapeError);
  CHECK_THROWS_AS(fit_harmonics(map, 32), DomainError);
}

TEST_CASE("reflection split") {
  Eigen::MatrixXd m(3, 3);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const auto r = reflection_split(m);
  CHECK(r.symmetric + r.antisymmetric == doctest::Approx(r.total_energy));
  const auto sym = reflection_split(Eigen::MatrixXd::Constant(4, 4, 0.5));
  CHECK(sym.antisymmetric == 0.0);
}

TEST_CASE("raw activity grids") {
  NetworkConfig c;
  c.layer_sizes = {110, 6, 3};
  c.final_layer_mode = FinalLayerMode::LinearSoftmax;
  c.loss = LossKind::CrossEntropy;
  const auto net = Network::initialized(c, 4);
  bars::SensorBank bank;
  RawActivityOptions opts;
  opts.resolution = 20;
  const bars::Space circle{bars::SpaceKind::Circular, 18.0, 100};
  const auto raw = raw_activity(net, 1, circle, bank, opts);
  REQUIRE(raw.maps.size() == 6);
  CHECK(raw.red_centers[1] - raw.red_centers[0] == doctest::Approx(18.0 / 20));
  for (const auto& m : raw.maps) CHECK(m.cwiseAbs().maxCoeff() < 1.0);
  // Coincident supports are impossible with lengths 5 and 3, so every point is labeled.
  CHECK(raw.labels.minCoeff() >= 0);

  const bars::Space line{bars::SpaceKind::Linear, 18.0, 100};
  const auto lr = raw_activity(net, 1, line, bank, opts);
  CHECK(lr.red_centers.front() > 2.5);
  CHECK(lr.red_centers.back() < 15.5);
  CHECK(lr.red_centers.front() - 2.5 == doctest::Approx(15.5 - lr.red_centers.back()));
  CHECK_THROWS_AS(raw_activity(net, 2, line, bank, opts), DomainError);
}

TEST_CASE("region agreement") {
  Eigen::MatrixXi labels(2, 2);
  labels << 0, 1, 2, -1;
  Eigen::MatrixXd map(2, 2);
  map << 0.9, -0.9, 0.9, 0.0;
  CHECK(region_agreement(map, labels, 0, 1, -1) == doctest::Approx(2.0 / 3));
}
