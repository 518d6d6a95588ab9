#include "logic_cells/logic_analyzer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "logic_cells/error.hpp"
#include "logic_cells/rng.hpp"

namespace logic_cells::logic {

Mask full_mask(int conditions) { return conditions >= 32 ? ~Mask{0} : (Mask{1} << conditions) - 1; }

int popcount(Mask m) { return std::popcount(m); }

std::vector<int> members(Mask m) {
  std::vector<int> out;
  for (int s = 0; m != 0; ++s, m >>= 1) {
    if (m & 1U) out.push_back(s);
  }
  return out;
}

void ConditionSet::validate() const {
  if (names.empty()) throw ConfigError("condition set is empty");
  if (size() > kMaxConditions) throw ConfigError("too many conditions");
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) throw ConfigError("duplicate condition names");
}

int ConditionSet::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (names[i] == name) return i;
  }
  throw DomainError("unknown condition '" + name + "'");
}

std::size_t ReceptiveField::total() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.size();
  return n;
}

Histogram ReceptiveField::histogram(int condition, int bins) const {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(bins, 0);
  for (double a : samples.at(condition)) {
    int b = static_cast<int>(std::floor((a - h.lo) / (h.hi - h.lo) * bins));
    h.counts[std::clamp(b, 0, bins - 1)] += 1;
  }
  return h;
}

std::vector<ReceptiveField> record_receptive_fields(const Eigen::MatrixXd& activity, const std::vector<int>& labels,
                                                    int layer, const ConditionSet& conditions) {
  conditions.validate();
  if (static_cast<std::size_t>(activity.cols()) != labels.size()) throw ShapeError("one label per sample required");
  std::vector<ReceptiveField> fields(activity.rows());
  for (Eigen::Index k = 0; k < activity.rows(); ++k) {
    fields[k].cell = static_cast<int>(k);
    fields[k].layer = layer;
    fields[k].samples.resize(conditions.size());
  }
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const int c = labels[j];
    if (c < 0 || c >= conditions.size()) throw DomainError("label outside the condition set");
    for (Eigen::Index k = 0; k < activity.rows(); ++k) fields[k].samples[c].push_back(activity(k, j));
  }
  return fields;
}

std::vector<ReceptiveField> record_receptive_fields(const Network& net, const Dataset& data, int layer,
                                                    const ConditionSet& conditions) {
  if (layer < 1 || layer > net.num_hidden_layers()) throw DomainError("receptive fields are recorded on hidden layers");
  return record_receptive_fields(layer_activity(net, data.inputs, layer), data.labels, layer, conditions);
}

int bucket_of(double activity, double threshold) {
  if (activity < -threshold) return -1;
  if (activity > threshold) return 1;
  return 0;
}

int CellVerdict::num_verdicts() const {
  return static_cast<int>(std::count_if(bucket.begin(), bucket.end(), [](const Verdict& v) { return v.has_value(); }));
}

CellVerdict quantize_cell(const ReceptiveField& field, const QuantizationOptions& options) {
  CellVerdict v;
  v.cell = field.cell;
  v.bucket.resize(field.samples.size());
  v.concentration.assign(field.samples.size(), 0.0);
  for (std::size_t c = 0; c < field.samples.size(); ++c) {
    const auto& s = field.samples[c];
    if (s.empty()) continue;
    std::array<int, 3> counts{};
    for (double a : s) counts[bucket_of(a, options.threshold) + 1] += 1;
    const auto best = std::max_element(counts.begin(), counts.end());
    const double fraction = static_cast<double>(*best) / s.size();
    v.concentration[c] = fraction;
    if (fraction >= options.concentration) v.bucket[c] = static_cast<int>(best - counts.begin()) - 1;
  }
  return v;
}

CellVerdict make_verdict(int cell, const std::vector<Verdict>& buckets) {
  CellVerdict v;
  v.cell = cell;
  v.bucket = buckets;
  for (const Verdict& b : buckets) {
    if (b && (*b < -1 || *b > 1)) throw DomainError("bucket outside {-1, 0, 1}");
    v.concentration.push_back(b ? 1.0 : 0.0);
  }
  return v;
}

LogicMatrix::LogicMatrix(ConditionSet conditions, std::vector<CellVerdict> cells, std::vector<bool> represented)
    : conditions_(std::move(conditions)), cells_(std::move(cells)), represented_(std::move(represented)) {
  conditions_.validate();
  const int c = conditions_.size();
  if (represented_.empty()) represented_.assign(c, true);
  if (static_cast<int>(represented_.size()) != c) throw ShapeError("one representation flag per condition");
  for (const CellVerdict& v : cells_) {
    if (static_cast<int>(v.bucket.size()) != c) throw ShapeError("verdict count differs from condition count");
    Mask plus = full_mask(c);
    Mask minus = full_mask(c);
    for (int s = 0; s < c; ++s) {
      if (!v.bucket[s]) continue;
      if (*v.bucket[s] == -1) plus &= ~(Mask{1} << s);
      if (*v.bucket[s] == 1) minus &= ~(Mask{1} << s);
    }
    plus_.push_back(plus);
    minus_.push_back(minus);
  }
}

Mask LogicMatrix::allowed(int k, int epsilon) const {
  if (epsilon > 0) return plus_.at(k);
  if (epsilon < 0) return minus_.at(k);
  return full_mask(num_conditions());
}

int LogicMatrix::realized_sign(int k, int condition) const {
  const Verdict& v = cells_.at(k).bucket.at(condition);
  return v ? *v : 0;
}

LogicMatrix build_logic_matrix(const std::vector<CellVerdict>& verdicts, const ConditionSet& conditions,
                               const std::vector<bool>& represented) {
  return LogicMatrix(conditions, verdicts, represented);
}

LogicalValue individual_logical_value(const LogicMatrix& matrix, int k) {
  const int c = matrix.num_conditions();
  LogicalValue out;
  out.generalized = c != 3;
  for (int eps : {1, -1}) {
    const int remaining = popcount(matrix.allowed(k, eps));
    if (out.generalized) {
      out.value += 0.25 * (c - remaining);
    } else if (remaining == 1) {
      out.value += 0.5;
    } else if (remaining == 2) {
      out.value += 0.25;
    }
  }
  return out;
}

Deduction deduction_of(Mask allowed) {
  Deduction d;
  d.allowed = allowed;
  if (allowed == 0) {
    d.kind = DeductionKind::Contradiction;
  } else if (popcount(allowed) == 1) {
    d.kind = DeductionKind::Condition;
    d.condition = std::countr_zero(allowed);
  } else {
    d.kind = DeductionKind::Undecided;
  }
  return d;
}

namespace {

void check_group(const LogicMatrix& matrix, const std::vector<int>& group) {
  if (group.empty()) throw DomainError("group is empty");
  for (int k : group) {
    if (k < 0 || k >= matrix.num_cells()) throw DomainError("group cell out of range");
  }
}

Mask group_mask(const LogicMatrix& matrix, const std::vector<int>& group, const std::vector<int>& signs) {
  Mask m = full_mask(matrix.num_conditions());
  for (std::size_t i = 0; i < group.size(); ++i) m &= matrix.allowed(group[i], signs[i]);
  return m;
}

}  // namespace

Deduction deduce(const LogicMatrix& matrix, const std::vector<int>& group, const std::vector<int>& signs) {
  check_group(matrix, group);
  if (signs.size() != group.size()) throw ShapeError("one sign per group cell");
  return deduction_of(group_mask(matrix, group, signs));
}

GroupReport classify_group(const LogicMatrix& matrix, const std::vector<int>& group) {
  check_group(matrix, group);
  if (group.size() > 20) throw DomainError("group too large for a full truth table");
  const int d = static_cast<int>(group.size());
  const int c = matrix.num_conditions();
  GroupReport r;
  r.cells = group;
  r.complete = true;
  for (std::uint32_t code = 0; code < (1U << d); ++code) {
    TruthRow row;
    for (int i = 0; i < d; ++i) row.signs.push_back(((code >> (d - 1 - i)) & 1U) ? -1 : 1);
    row.deduction = deduce(matrix, group, row.signs);
    if (row.deduction.kind == DeductionKind::Undecided) r.complete = false;
    r.table.push_back(std::move(row));
  }
  r.good_enough = true;
  for (int s = 0; s < c; ++s) {
    std::vector<int> signs;
    for (int k : group) signs.push_back(matrix.realized_sign(k, s));
    const Deduction ded = deduce(matrix, group, signs);
    const bool ok = ded.kind == DeductionKind::Condition && ded.condition == s;
    r.realized.push_back(signs);
    r.realized_deduction.push_back(ded);
    r.reconstructed.push_back(matrix.represented(s) && ok);
    if (!matrix.represented(s)) {
      r.skipped.push_back(s);
      continue;
    }
    if (ok) {
      r.score += 1;
    } else {
      r.good_enough = false;
    }
  }
  r.efficient = r.complete && r.good_enough;
  return r;
}

int group_score(const LogicMatrix& matrix, const std::vector<int>& group) {
  check_group(matrix, group);
  int n = 0;
  for (int s = 0; s < matrix.num_conditions(); ++s) {
    if (!matrix.represented(s)) continue;
    Mask m = full_mask(matrix.num_conditions());
    for (int k : group) m &= matrix.allowed(k, matrix.realized_sign(k, s));
    n += m == (Mask{1} << s);
  }
  return n;
}

TripleEnumeration enumerate_conclusive_triples(const LogicMatrix& matrix, const EnumerationOptions& options) {
  const int n = matrix.num_cells();
  const int c = matrix.num_conditions();
  // realized[k][s]: mask left by cell k under condition s.
  std::vector<std::vector<Mask>> realized(n, std::vector<Mask>(c));
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < c; ++s) realized[k][s] = matrix.allowed(k, matrix.realized_sign(k, s));
  }
  auto score = [&](int a, int b, int d) {
    int out = 0;
    for (int s = 0; s < c; ++s) {
      if (!matrix.represented(s)) continue;
      out += (realized[a][s] & realized[b][s] & realized[d][s]) == (Mask{1} << s);
    }
    return out;
  };

  TripleEnumeration e;
  e.total = n < 3 ? 0 : static_cast<std::int64_t>(n) * (n - 1) * (n - 2) / 6;
  if (e.total == 0) return e;
  if (n <= options.full_limit) {
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        for (int d = b + 1; d < n; ++d) e.triples.push_back({{a, b, d}, score(a, b, d)});
      }
    }
  } else {
    e.sampled = true;
    Rng rng(options.seed);
    std::set<std::array<int, 3>> seen;
    const std::int64_t wanted = std::min(options.samples, e.total);
    while (static_cast<std::int64_t>(seen.size()) < wanted) {
      std::array<int, 3> t{static_cast<int>(rng.below(n)), static_cast<int>(rng.below(n)),
                           static_cast<int>(rng.below(n))};
      std::sort(t.begin(), t.end());
      if (t[0] == t[1] || t[1] == t[2]) continue;
      if (seen.insert(t).second) e.triples.push_back({t, score(t[0], t[1], t[2])});
    }
  }
  e.evaluated = static_cast<std::int64_t>(e.triples.size());
  std::sort(e.triples.begin(), e.triples.end(), [](const TripleScore& x, const TripleScore& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.cells < y.cells;
  });
  for (const auto& t : e.triples) e.conclusive += t.score == c;
  return e;
}

std::vector<int> logical_cells(const LogicMatrix& matrix) {
  std::vector<int> out;
  for (int k = 0; k < matrix.num_cells(); ++k) {
    if (matrix.score(k, 1) > 0 || matrix.score(k, -1) > 0) out.push_back(k);
  }
  return out;
}

TheoryFamilies theory_families(const LogicMatrix& matrix, const Eigen::MatrixXd& activity,
                               const TheoryOptions& options) {
  if (activity.rows() != matrix.num_cells()) throw ShapeError("activity rows must match the matrix cells");
  TheoryFamilies f;
  f.cells = logical_cells(matrix);
  const int l = static_cast<int>(f.cells.size());
  f.t0_size = std::pow(3.0, l);

  std::map<std::vector<int>, int> observed;
  for (Eigen::Index j = 0; j < activity.cols(); ++j) {
    std::vector<int> signs(l);
    for (int i = 0; i < l; ++i) signs[i] = bucket_of(activity(f.cells[i], j), options.quantization.threshold);
    observed[signs] += 1;
  }
  for (const auto& [signs, count] : observed) {
    Theory t;
    t.signs = signs;
    t.deduction = l == 0 ? deduction_of(full_mask(matrix.num_conditions())) : deduce(matrix, f.cells, signs);
    t.count = count;
    if (t.deduction.kind == DeductionKind::Contradiction) {
      f.t2_contradictions += 1;
      f.t2_within_t1 = false;
    }
    f.t2.push_back(std::move(t));
  }

  if (l <= options.enumeration_limit) {
    // Depth-first over {-1, 0, +1}^L, pruning once the mask is empty.
    std::int64_t consistent = 0;
    const Mask full = full_mask(matrix.num_conditions());
    auto walk = [&](auto&& self, int i, Mask m) -> void {
      if (m == 0) return;
      if (i == l) {
        consistent += 1;
        return;
      }
      for (int eps : {-1, 0, 1}) self(self, i + 1, m & matrix.allowed(f.cells[i], eps));
    };
    walk(walk, 0, full);
    f.t1_size = consistent;
  }
  return f;
}

std::vector<Mask> nontrivial_propositions(int conditions) {
  if (conditions < 2 || conditions > kMaxConditions) throw DomainError("need between 2 and 16 conditions");
  std::vector<Mask> out;
  for (Mask s = 1; s < full_mask(conditions); ++s) out.push_back(s);
  return out;
}

bool decides(Mask allowed, Mask proposition) {
  return (allowed & ~proposition) == 0 || (allowed & proposition) == 0;
}

double minimal_logical_information(const TheoryFamilies& families, const std::vector<Mask>& targets) {
  if (families.t2.empty()) throw EmptyResultError("no realized theory");
  if (targets.empty()) throw DomainError("no target proposition");
  double best = 1.0;
  for (const Theory& t : families.t2) {
    int decided = 0;
    for (Mask s : targets) decided += decides(t.deduction.allowed, s);
    best = std::min(best, static_cast<double>(decided) / targets.size());
  }
  return best;
}

double minimal_logical_information(const TheoryFamilies& families, int conditions) {
  return minimal_logical_information(families, nontrivial_propositions(conditions));
}

SoundnessReport check_soundness(const LogicMatrix& matrix, const Eigen::MatrixXd& activity,
                                const std::vector<int>& labels, const QuantizationOptions& options) {
  if (activity.rows() != matrix.num_cells()) throw ShapeError("activity rows must match the matrix cells");
  if (static_cast<std::size_t>(activity.cols()) != labels.size()) throw ShapeError("one label per sample required");
  SoundnessReport r;
  r.samples = static_cast<int>(labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    Mask m = full_mask(matrix.num_conditions());
    for (int k = 0; k < matrix.num_cells(); ++k) m &= matrix.allowed(k, bucket_of(activity(k, j), options.threshold));
    if (((m >> labels[j]) & 1U) == 0) {
      r.contradictions += 1;
      r.offending_samples.push_back(static_cast<int>(j));
    }
  }
  return r;
}

Census cell_census(const LogicMatrix& matrix) {
  const auto& names = matrix.conditions().names;
  Census census;
  for (const auto& n : names) census.counts[n + "-type"] = 0;
  for (const char* k : {"mixed", "partial", "constant", "uninformative"}) census.counts[k] = 0;
  for (int k = 0; k < matrix.num_cells(); ++k) {
    const CellVerdict& v = matrix.cells()[k];
    const int present = v.num_verdicts();
    if (present >= 2) census.logical += 1;
    CellKind ck{v.cell, ""};
    if (present == 0) {
      ck.kind = "uninformative";
    } else if (present < matrix.num_conditions()) {
      ck.kind = "partial";
    } else {
      std::map<int, std::vector<int>> sides;
      for (int s = 0; s < matrix.num_conditions(); ++s) sides[*v.bucket[s]].push_back(s);
      ck.kind = "mixed";
      if (sides.size() == 1) {
        ck.kind = "constant";
      } else if (sides.size() == 2) {
        const auto& a = sides.begin()->second;
        const auto& b = sides.rbegin()->second;
        if (a.size() == 1 && b.size() != 1) ck.kind = names[a[0]] + "-type";
        if (b.size() == 1 && a.size() != 1) ck.kind = names[b[0]] + "-type";
      }
    }
    census.counts[ck.kind] += 1;
    census.cells.push_back(std::move(ck));
  }
  return census;
}

namespace {

std::vector<double> center_grid(const bars::Space& space, double length, int resolution) {
  std::vector<double> out(resolution);
  if (space.kind == bars::SpaceKind::Circular) {
    for (int i = 0; i < resolution; ++i) out[i] = i * space.diameter / resolution;
  } else {
    const double lo = length / 2.0;
    const double hi = space.diameter - length / 2.0;
    for (int i = 0; i < resolution; ++i) out[i] = lo + (i + 0.5) * (hi - lo) / resolution;
  }
  return out;
}

}  // namespace

RawActivity raw_activity(const Network& net, int layer, const bars::Space& space, const bars::SensorBank& bank,
                         const RawActivityOptions& options) {
  if (options.resolution < 1) throw DomainError("raw activity needs a positive resolution");
  if (layer < 1 || layer > net.num_hidden_layers()) throw DomainError("raw activity is defined on hidden layers");
  RawActivity out;
  const int res = options.resolution;
  out.red_centers = center_grid(space, options.red_length, res);
  out.green_centers = center_grid(space, options.green_length, res);
  out.labels.resize(res, res);
  Eigen::MatrixXd inputs(bank.input_size(), static_cast<Eigen::Index>(res) * res);
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      bars::Scene scene;
      scene.bars = {{bars::Color::R, out.red_centers[i], options.red_length},
                    {bars::Color::G, out.green_centers[j], options.green_length}};
      inputs.col(static_cast<Eigen::Index>(i) * res + j) = bars::render_input(scene, bank, space);
      const auto rel = bars::relate(scene.bars[0], scene.bars[1], space);
      out.labels(i, j) = rel == bars::Relation::Coincident ? -1 : bars::label_scene(scene, space, bars::Experiment::One);
    }
  }
  const Eigen::MatrixXd act = layer_activity(net, inputs, layer);
  out.maps.assign(act.rows(), Eigen::MatrixXd(res, res));
  for (Eigen::Index k = 0; k < act.rows(); ++k) {
    for (int i = 0; i < res; ++i) {
      for (int j = 0; j < res; ++j) out.maps[k](i, j) = act(k, static_cast<Eigen::Index>(i) * res + j);
    }
  }
  return out;
}

double region_agreement(const Eigen::MatrixXd& map, const Eigen::MatrixXi& labels, int condition, int inside,
                        int outside, double threshold) {
  if (map.rows() != labels.rows() || map.cols() != labels.cols()) throw ShapeError("map and label grid differ");
  int total = 0;
  int agree = 0;
  for (Eigen::Index i = 0; i < map.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.cols(); ++j) {
      if (labels(i, j) < 0) continue;
      total += 1;
      agree += bucket_of(map(i, j), threshold) == (labels(i, j) == condition ? inside : outside);
    }
  }
  if (total == 0) throw EmptyResultError("no labeled grid point");
  return static_cast<double>(agree) / total;
}

}  // namespace logic_cells::logic
