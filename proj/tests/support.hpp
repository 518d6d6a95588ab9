#pragma once

// Shared fixtures for unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "logic_cells/logic_analyzer.hpp"
#include "logic_cells/mlp.hpp"
#include "logic_cells/rng.hpp"

namespace fixtures {

using logic_cells::logic::Verdict;

// Verdicts over (E, H, EH) that carry the implications of the hand-built
// motor cells: +1 => A means every other condition fires at -1, and so on.
inline const std::vector<std::vector<Verdict>>& roman_cells() {
  static const std::vector<std::vector<Verdict>> cells{
      {Verdict{}, 1, -1},  // I:    +1 => E|H,  -1 => E|EH
      {1, -1, Verdict{}},  // II:   +1 => E|EH, -1 => H|EH
      {1, Verdict{}, -1},  // III:  +1 => E|H,  -1 => H|EH
      {1, -1, -1},         // IV:   +1 => E,    -1 => H|EH
      {-1, -1, 1},         // V:    +1 => EH,   -1 => E|H
      {1, -1, -1},         // VI = IV
      {-1, 1, -1},         // VII:  +1 => H,    -1 => E|EH
      {-1, -1, 1},         // VIII = V
  };
  return cells;
}

inline logic_cells::logic::LogicMatrix roman_matrix() {
  std::vector<logic_cells::logic::CellVerdict> v;
  const auto& cells = roman_cells();
  for (int k = 0; k < static_cast<int>(cells.size()); ++k) v.push_back(logic_cells::logic::make_verdict(k, cells[k]));
  return logic_cells::logic::build_logic_matrix(v, {{"E", "H", "EH"}});
}

// Roman numeral -> matrix row.
inline int roman(int n) { return n - 1; }

// Expected deductions, rows in the order (1,1,1), (1,1,-1), ..., (-1,-1,-1).
// "_" is a contradiction. The published second table prints EH for (1,1,1);
// I at +1 excludes EH and V at +1 asserts it, so the entry is a contradiction.
struct TruthTable {
  std::string name;
  std::vector<int> cells;  // roman numbers
  std::vector<std::string> rows;
};

inline std::vector<TruthTable> published_tables() {
  return {
      {"I,II,III", {1, 2, 3}, {"E", "_", "H", "H", "E", "EH", "_", "EH"}},
      {"I,IV,V", {1, 4, 5}, {"_", "E", "_", "H", "_", "E", "EH", "_"}},
      {"I,II,V", {1, 2, 5}, {"_", "E", "_", "H", "EH", "E", "EH", "_"}},
      {"VI,VII,VIII", {6, 7, 8}, {"_", "_", "_", "E", "_", "H", "EH", "_"}},
  };
}

inline std::string deduction_label(const logic_cells::logic::Deduction& d) {
  static const char* names[] = {"E", "H", "EH"};
  switch (d.kind) {
    case logic_cells::logic::DeductionKind::Condition: return names[d.condition];
    case logic_cells::logic::DeductionKind::Contradiction: return "_";
    case logic_cells::logic::DeductionKind::Undecided: return "?";
  }
  return "?";
}

// Largest entrywise relative error of backward() against central differences.
// The denominator is floored at 1e-7 so entries that vanish analytically are
// compared in absolute terms.
inline double gradient_error(const logic_cells::Network& net, const Eigen::VectorXd& x, const Eigen::VectorXd& target,
                             double h = 1e-5) {
  using namespace logic_cells;
  const auto grads = backward(net, forward(net, x), target);
  double worst = 0.0;
  Network probe = net;
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    for (Eigen::Index i = 0; i < net.weights[k].size(); ++i) {
      double& w = probe.weights[k].data()[i];
      const double saved = w;
      w = saved + h;
      const double up = sample_loss(probe, forward(probe, x), target);
      w = saved - h;
      const double down = sample_loss(probe, forward(probe, x), target);
      w = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads[k].data()[i];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-7});
      worst = std::max(worst, std::abs(fd - an) / denom);
    }
  }
  return worst;
}

struct GradientCase {
  logic_cells::Network net;
  Eigen::VectorXd input;
  Eigen::VectorXd target;
};

// Small random nets over both final layer modes and losses.
inline GradientCase random_gradient_case(std::uint64_t seed) {
  using namespace logic_cells;
  Rng rng(seed);
  NetworkConfig c;
  const int depth = 2 + static_cast<int>(rng.below(3));
  for (int k = 0; k < depth; ++k) c.layer_sizes.push_back(1 + static_cast<int>(rng.below(5)));
  c.layer_sizes.back() = std::max(2, c.layer_sizes.back());
  c.activation_gain = rng.uniform(0.5, 2.0);
  const bool ce = rng.bernoulli(0.5);
  c.final_layer_mode = ce ? FinalLayerMode::LinearSoftmax : FinalLayerMode::TanhAsHidden;
  c.loss = ce ? LossKind::CrossEntropy : LossKind::MSE;
  GradientCase g{Network::initialized(c, seed), Eigen::VectorXd(c.input_size()), Eigen::VectorXd(c.output_size())};
  for (auto& w : g.net.weights) w *= 1.5;
  for (Eigen::Index i = 0; i < g.input.size(); ++i) g.input(i) = rng.uniform(-1.0, 1.0);
  if (ce) {
    g.target.setZero();
    g.target(static_cast<Eigen::Index>(rng.below(c.output_size()))) = 1.0;
  } else {
    for (Eigen::Index i = 0; i < g.target.size(); ++i) g.target(i) = rng.uniform(-1.0, 1.0);
  }
  return g;
}

}  // namespace fixtures
