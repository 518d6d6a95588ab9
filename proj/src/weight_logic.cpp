#include "logic_cells/weight_logic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "logic_cells/error.hpp"
#include "logic_cells/rng.hpp"

namespace logic_cells::weights {

Eigen::MatrixXd extract_weight_slice(const Network& net, const std::vector<int>& cells) {
  const Eigen::MatrixXd& last = net.weights.back();
  Eigen::MatrixXd w(last.rows(), static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] < 0 || cells[i] >= last.cols()) throw DomainError("cell index out of range");
    w.col(static_cast<Eigen::Index>(i)) = last.col(cells[i]);
  }
  return w;
}

CoreMatrix core_matrix(const logic::LogicMatrix& matrix, const std::vector<int>& cells, int min_score) {
  const int c = matrix.num_conditions();
  if (min_score < 0) min_score = c;
  CoreMatrix core;
  core.cells = cells;
  core.score = logic::group_score(matrix, cells);
  if (core.score < min_score) throw DomainError("group reconstructs too few conditions for a core matrix");
  const int d = static_cast<int>(cells.size());
  core.signs.resize(c, d);
  core.deduction = Eigen::MatrixXd::Zero(c, c);
  for (int s = 0; s < c; ++s) {
    logic::Mask m = logic::full_mask(c);
    for (int i = 0; i < d; ++i) {
      const int sign = matrix.realized_sign(cells[i], s);
      core.signs(s, i) = sign;
      m &= matrix.allowed(cells[i], sign);
    }
    for (int t : logic::members(m)) core.deduction(s, t) = 1.0;
  }
  return core;
}

Eigen::MatrixXd composite(const Eigen::MatrixXd& w, const Eigen::MatrixXd& a) {
  if (w.cols() != a.rows()) throw ShapeError("composite: W columns must match A rows");
  return w * a;
}

Eigen::MatrixXd composite(const Eigen::MatrixXd& w, const CoreMatrix& core) { return composite(w, core.product_form()); }

double weighted_logical_score(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ShapeError("weighted logical score needs a square matrix");
  return m.diagonal().cwiseAbs().sum() - m.cwiseAbs().sum() / static_cast<double>(m.rows());
}

double brut_weight_score(const Eigen::MatrixXd& w) { return w.cwiseAbs().sum(); }

double logic_angle(const Eigen::MatrixXd& a) {
  const double norm = a.norm();
  if (norm == 0.0) throw DomainError("logic angle of a zero matrix");
  const double cosine = a.sum() / (norm * std::sqrt(static_cast<double>(a.size())));
  return std::acos(std::clamp(cosine, -1.0, 1.0));
}

std::vector<ScoreRecord> score_triples(const Network& net, const logic::LogicMatrix& matrix,
                                       const logic::TripleEnumeration& triples, int min_score) {
  if (net.weights.back().cols() != matrix.num_cells()) throw ShapeError("matrix does not describe the last hidden layer");
  if (net.weights.back().rows() != matrix.num_conditions()) throw ShapeError("one output per condition required");
  std::vector<ScoreRecord> out;
  for (const auto& t : triples.triples) {
    if (t.score < min_score) continue;
    const std::vector<int> cells(t.cells.begin(), t.cells.end());
    const CoreMatrix core = core_matrix(matrix, cells, min_score);
    const Eigen::MatrixXd w = extract_weight_slice(net, cells);
    ScoreRecord r;
    r.cells = cells;
    r.score = core.score;
    r.logic_angle = logic_angle(core.deduction);
    r.mu_w = weighted_logical_score(composite(w, core));
    r.brut = brut_weight_score(w);
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  // Relative test: values equal up to rounding count as constant.
  const double tiny = 1e-24 * n;
  if (sxx <= tiny * std::max(1.0, mx * mx) || syy <= tiny * std::max(1.0, my * my)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<LinearFit> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("least_squares: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx <= 1e-24 * n * std::max(1.0, mx * mx)) return std::nullopt;
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

Bins histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  Bins b;
  b.counts.assign(bins, 0);
  if (values.empty()) return b;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  b.lo = *lo;
  b.hi = *hi;
  const double width = b.hi - b.lo;
  for (double v : values) {
    const int i = width > 0.0 ? static_cast<int>((v - b.lo) / width * bins) : 0;
    b.counts[std::clamp(i, 0, bins - 1)] += 1;
  }
  return b;
}

PermutationNull permutation_null(const std::vector<double>& x, const std::vector<double>& y, int permutations,
                                 std::uint64_t seed) {
  PermutationNull out;
  const auto observed = pearson(x, y);
  if (!observed || permutations < 1) return out;
  Rng rng(seed);
  std::vector<double> shuffled = y;
  int at_least = 0;
  double sum_abs = 0.0;
  for (int p = 0; p < permutations; ++p) {
    rng.shuffle(std::span<double>(shuffled));
    const double r = pearson(x, shuffled).value_or(0.0);
    sum_abs += std::abs(r);
    at_least += r >= *observed;
  }
  out.permutations = permutations;
  out.mean_abs_r = sum_abs / permutations;
  out.p_value = static_cast<double>(at_least + 1) / (permutations + 1);
  return out;
}

CorrelationReport correlate(const std::vector<ScoreRecord>& records, int bins) {
  if (records.size() < 3) throw DomainError("correlation needs at least 3 records");
  std::vector<double> angle, score, mu, brut;
  for (const auto& r : records) {
    angle.push_back(r.logic_angle);
    score.push_back(r.score);
    mu.push_back(r.mu_w);
    brut.push_back(r.brut);
  }
  CorrelationReport rep;
  rep.records = static_cast<int>(records.size());
  rep.r_angle_mu = pearson(angle, mu);
  rep.r_angle_brut = pearson(angle, brut);
  rep.fit_mu = least_squares(angle, mu);
  rep.fit_brut = least_squares(angle, brut);
  rep.angle_bins = histogram(angle, bins);
  rep.score_bins = histogram(score, bins);
  rep.mu_bins = histogram(mu, bins);
  rep.brut_bins = histogram(brut, bins);
  return rep;
}

}  // namespace logic_cells::weights
