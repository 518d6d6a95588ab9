#pragma once

// Output weights of cell groups compared with the logic the group carries.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "logic_cells/logic_analyzer.hpp"
#include "logic_cells/mlp.hpp"

namespace logic_cells::weights {

// Rows: output classes; one column per cell of the last hidden layer, in order.
Eigen::MatrixXd extract_weight_slice(const Network& net, const std::vector<int>& cells);

struct CoreMatrix {
  std::vector<int> cells;
  int score = 0;             // N of the group
  Eigen::MatrixXd signs;     // conditions x cells: realized sign row per condition
  Eigen::MatrixXd deduction; // conditions x conditions: row s = conditions left under s

  // The d x c factor of the composite W * A.
  Eigen::MatrixXd product_form() const { return signs.transpose(); }
};

// Throws DomainError when the group reconstructs fewer than `min_score`
// conditions; min_score < 0 means all of them.
CoreMatrix core_matrix(const logic::LogicMatrix& matrix, const std::vector<int>& cells, int min_score = -1);

// W (c x d) times A (d x c).
Eigen::MatrixXd composite(const Eigen::MatrixXd& w, const Eigen::MatrixXd& a);
Eigen::MatrixXd composite(const Eigen::MatrixXd& w, const CoreMatrix& core);

// ||diag M||_1 - ||M||_1 / c for square M.
double weighted_logical_score(const Eigen::MatrixXd& m);

double brut_weight_score(const Eigen::MatrixXd& w);

// Angle between `a` and the all-ones matrix of the same shape.
double logic_angle(const Eigen::MatrixXd& a);

struct ScoreRecord {
  std::vector<int> cells;
  int score = 0;
  double logic_angle = 0.0;
  double mu_w = 0.0;
  double brut = 0.0;
};

// One record per triple whose N is at least `min_score`, in enumeration order.
std::vector<ScoreRecord> score_triples(const Network& net, const logic::LogicMatrix& matrix,
                                       const logic::TripleEnumeration& triples, int min_score);

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least squares y = slope * x + intercept; empty when x is constant.
std::optional<LinearFit> least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct Bins {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<int> counts;
};

Bins histogram(const std::vector<double>& values, int bins);

struct PermutationNull {
  double mean_abs_r = 0.0;
  double p_value = 1.0;  // share of shuffles with r at least the observed one
  int permutations = 0;
};

PermutationNull permutation_null(const std::vector<double>& x, const std::vector<double>& y, int permutations,
                                 std::uint64_t seed);

struct CorrelationReport {
  int records = 0;
  std::optional<double> r_angle_mu;
  std::optional<double> r_angle_brut;
  std::optional<LinearFit> fit_mu;
  std::optional<LinearFit> fit_brut;
  Bins angle_bins;
  Bins score_bins;
  Bins mu_bins;
  Bins brut_bins;
};

// Throws DomainError for fewer than 3 records.
CorrelationReport correlate(const std::vector<ScoreRecord>& records, int bins = 20);

}  // namespace logic_cells::weights
