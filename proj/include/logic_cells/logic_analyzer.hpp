#pragma once

// Quantized receptive fields, logic matrices and propositional deduction over
// groups of hidden cells.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logic_cells/bars_task.hpp"
#include "logic_cells/mlp.hpp"

namespace logic_cells::logic {

// Bit s set: condition s is still possible.
using Mask = std::uint32_t;
inline constexpr int kMaxConditions = 16;

Mask full_mask(int conditions);
int popcount(Mask m);
std::vector<int> members(Mask m);

struct ConditionSet {
  std::vector<std::string> names;

  int size() const { return static_cast<int>(names.size()); }
  void validate() const;  // nonempty, distinct, at most kMaxConditions
  int index_of(const std::string& name) const;
};

struct Histogram {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<int> counts;
};

struct ReceptiveField {
  int cell = 0;
  int layer = 0;
  std::vector<std::vector<double>> samples;  // per condition, dataset order

  bool represented(int condition) const { return !samples.at(condition).empty(); }
  std::size_t total() const;
  Histogram histogram(int condition, int bins = 20) const;
};

// `activity` is cells x samples; labels index the condition set.
std::vector<ReceptiveField> record_receptive_fields(const Eigen::MatrixXd& activity, const std::vector<int>& labels,
                                                    int layer, const ConditionSet& conditions);
std::vector<ReceptiveField> record_receptive_fields(const Network& net, const Dataset& data, int layer,
                                                    const ConditionSet& conditions);

struct QuantizationOptions {
  double threshold = 1.0 / 3.0;
  double concentration = 0.8;
};

// -1 below -threshold, +1 above threshold, 0 in between.
int bucket_of(double activity, double threshold = 1.0 / 3.0);

using Verdict = std::optional<int>;  // bucket in {-1, 0, +1}

struct CellVerdict {
  int cell = 0;
  std::vector<Verdict> bucket;        // per condition
  std::vector<double> concentration;  // mass of the fullest bucket

  int num_verdicts() const;
};

// Unrepresented conditions get no verdict and concentration 0.
CellVerdict quantize_cell(const ReceptiveField& field, const QuantizationOptions& options = {});

// Fixture helper: verdicts given directly, concentration 1 where present.
CellVerdict make_verdict(int cell, const std::vector<Verdict>& buckets);

// Rows (cell, epsilon) for epsilon = +1, -1; entry 0 excludes the column.
class LogicMatrix {
 public:
  LogicMatrix() = default;
  LogicMatrix(ConditionSet conditions, std::vector<CellVerdict> cells, std::vector<bool> represented = {});

  const ConditionSet& conditions() const { return conditions_; }
  const std::vector<CellVerdict>& cells() const { return cells_; }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_conditions() const { return conditions_.size(); }
  bool represented(int condition) const { return represented_.at(condition); }

  // Non-excluded conditions when cell `k` fires in bucket `epsilon`;
  // epsilon 0 asserts nothing.
  Mask allowed(int k, int epsilon) const;
  int entry(int k, int epsilon, int condition) const { return (allowed(k, epsilon) >> condition) & 1U; }
  int score(int k, int epsilon) const { return num_conditions() - popcount(allowed(k, epsilon)); }

  // Sign of cell `k` under `condition`: its verdict bucket, 0 without one.
  int realized_sign(int k, int condition) const;

 private:
  ConditionSet conditions_;
  std::vector<CellVerdict> cells_;
  std::vector<bool> represented_;
  std::vector<Mask> plus_;
  std::vector<Mask> minus_;
};

LogicMatrix build_logic_matrix(const std::vector<CellVerdict>& verdicts, const ConditionSet& conditions,
                               const std::vector<bool>& represented = {});

struct LogicalValue {
  double value = 0.0;
  bool generalized = false;  // condition count other than 3: 1/4 per exclusion
};

// Three conditions: 1/2 per row pinning an atom, 1/4 per row pinning a union of two.
LogicalValue individual_logical_value(const LogicMatrix& matrix, int k);

enum class DeductionKind { Condition, Contradiction, Undecided };

struct Deduction {
  DeductionKind kind = DeductionKind::Undecided;
  Mask allowed = 0;
  int condition = -1;  // set for DeductionKind::Condition
};

Deduction deduction_of(Mask allowed);

// Intersection of the non-excluded sets of the rows selected by `signs`.
Deduction deduce(const LogicMatrix& matrix, const std::vector<int>& group, const std::vector<int>& signs);

struct TruthRow {
  std::vector<int> signs;
  Deduction deduction;
};

struct GroupReport {
  std::vector<int> cells;
  std::vector<TruthRow> table;              // every +-1 vector, (1,..,1) first
  std::vector<std::vector<int>> realized;   // per condition
  std::vector<Deduction> realized_deduction;
  std::vector<bool> reconstructed;          // realized vector deduces exactly that condition
  std::vector<int> skipped;                 // conditions without samples
  bool complete = false;
  bool good_enough = false;
  bool efficient = false;
  int score = 0;  // N
};

GroupReport classify_group(const LogicMatrix& matrix, const std::vector<int>& group);

// N of a group: number of represented conditions whose realized vector deduces them.
int group_score(const LogicMatrix& matrix, const std::vector<int>& group);

struct TripleScore {
  std::array<int, 3> cells{};
  int score = 0;
};

struct TripleEnumeration {
  std::vector<TripleScore> triples;  // sorted by score descending, then cells
  std::int64_t total = 0;            // C(n, 3)
  std::int64_t evaluated = 0;
  int conclusive = 0;                // score equal to the condition count
  bool sampled = false;

  double coverage() const { return total == 0 ? 0.0 : static_cast<double>(evaluated) / total; }
  double conclusive_fraction() const { return evaluated == 0 ? 0.0 : static_cast<double>(conclusive) / evaluated; }
};

struct EnumerationOptions {
  int full_limit = 60;             // cells; larger layers are sampled
  std::int64_t samples = 50000;    // triples drawn when sampling
  std::uint64_t seed = 1;
};

TripleEnumeration enumerate_conclusive_triples(const LogicMatrix& matrix, const EnumerationOptions& options = {});

// Cells whose rows exclude at least one condition.
std::vector<int> logical_cells(const LogicMatrix& matrix);

struct Theory {
  std::vector<int> signs;  // over the logical cells, entries in {-1, 0, +1}
  Deduction deduction;
  int count = 0;           // samples realizing it (T2)
};

struct TheoryFamilies {
  std::vector<int> cells;          // the logical cells
  double t0_size = 0.0;            // 3^L
  std::optional<std::int64_t> t1_size;  // set when enumerated
  std::vector<Theory> t2;          // observed, sorted by signs
  int t2_contradictions = 0;       // observed vectors deducing bottom
  bool t2_within_t1 = true;
};

struct TheoryOptions {
  int enumeration_limit = 12;  // enumerate T1 when the logical cell count is at most this
  QuantizationOptions quantization{};
};

// `activity` is the layer's cells x samples matrix.
TheoryFamilies theory_families(const LogicMatrix& matrix, const Eigen::MatrixXd& activity,
                               const TheoryOptions& options = {});

// Propositions as condition masks: every subset except empty and full.
std::vector<Mask> nontrivial_propositions(int conditions);

// U decides S when U is inside S or disjoint from it.
bool decides(Mask allowed, Mask proposition);

// Minimum over T2 of the fraction of `targets` decided. Throws EmptyResultError for empty T2.
double minimal_logical_information(const TheoryFamilies& families, const std::vector<Mask>& targets);
double minimal_logical_information(const TheoryFamilies& families, int conditions);

struct SoundnessReport {
  int samples = 0;
  int contradictions = 0;  // samples whose own label is excluded by the layer
  std::vector<int> offending_samples;
};

SoundnessReport check_soundness(const LogicMatrix& matrix, const Eigen::MatrixXd& activity,
                                const std::vector<int>& labels, const QuantizationOptions& options = {});

struct CellKind {
  int cell = 0;
  std::string kind;  // "<condition>-type", "mixed", "partial", "constant", "uninformative"
};

struct Census {
  std::vector<CellKind> cells;
  std::map<std::string, int> counts;  // every "<condition>-type" key present
  int logical = 0;                    // verdict for at least two conditions
};

// A cell with a verdict everywhere and two distinct buckets is named after the
// condition standing alone on one side.
Census cell_census(const LogicMatrix& matrix);

struct RawActivityOptions {
  int resolution = 100;
  double red_length = 5.0;
  double green_length = 3.0;
};

struct RawActivity {
  std::vector<double> red_centers;
  std::vector<double> green_centers;
  // maps[cell](i, j): activity with red at red_centers[i], green at green_centers[j]
  std::vector<Eigen::MatrixXd> maps;
  Eigen::MatrixXi labels;  // label_scene per grid point, -1 where red and green coincide
};

// Grid over the valid placements; symmetric under x -> D - x on the segment
// and uniform (periodic) on the circle. Experiment 1 labels.
RawActivity raw_activity(const Network& net, int layer, const bars::Space& space, const bars::SensorBank& bank,
                         const RawActivityOptions& options = {});

// Fraction of labeled grid points where the map's bucket equals `inside` on
// condition `condition` and `outside` elsewhere.
double region_agreement(const Eigen::MatrixXd& map, const Eigen::MatrixXi& labels, int condition, int inside,
                        int outside, double threshold = 1.0 / 3.0);

}  // namespace logic_cells::logic
