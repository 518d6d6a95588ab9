#pragma once

// Motor-equivalence task: a fixed Von Mises population codes a pointing
// direction theta under one of three actor conditions {E, H, EH}.

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logic_cells/mlp.hpp"

namespace logic_cells::motor {

enum class Condition { E = 0, H = 1, EH = 2 };
inline constexpr std::array<Condition, 3> kConditions{Condition::E, Condition::H, Condition::EH};
inline constexpr int kNumConditions = 3;

std::string to_string(Condition c);
Condition parse_condition(const std::string& text);
inline int index(Condition c) { return static_cast<int>(c); }

enum class CellFamily { Type1, Type2A, Type2B, Type2C };
std::string to_string(CellFamily f);

enum class TargetEncoding { SymmetricZ, AsymmetricZPrime };
std::string to_string(TargetEncoding mode);
TargetEncoding parse_target_encoding(const std::string& text);
int target_size(TargetEncoding mode);

struct MotorSample {
  Condition condition = Condition::E;
  double theta = 0.0;  // in (-pi, pi]
};

// Wraps into (-pi, pi].
double wrap_angle(double angle);

// Modified Bessel function of the first kind, order 0.
double bessel_i0(double x);

// exp(kappa cos(theta - mu)) / (2 pi I0(kappa)). Throws DomainError for kappa <= 0.
double von_mises(double theta, double mu, double kappa);

struct PopulationConfig {
  int n_cells = 55;
  int n_type1 = 17;
  int n_type2a = 13;
  int n_type2b = 13;
  int n_type2c = 12;
  double offset_sigma = 10.0 * 3.14159265358979323846 / 180.0;
  std::array<double, 3> kappa{1.0, 2.0, 1.5};  // E, H, EH

  void validate() const;
};

struct TuningPopulation {
  std::vector<double> centers;                    // equipartition of (-pi, pi]
  std::vector<std::array<double, 3>> preferred;   // [cell][condition]
  std::array<double, 3> kappa{};
  std::vector<CellFamily> family;

  int n_cells() const { return static_cast<int>(preferred.size()); }
  double preferred_angle(int cell, Condition c) const { return preferred.at(cell)[index(c)]; }
  double kappa_of(Condition c) const { return kappa[index(c)]; }
  std::vector<int> cells_of(CellFamily f) const;
  // Largest peak density over the conditions; the scale of simple propositions.
  double reference_peak() const;
};

// Type1 cells keep one preferred angle for all conditions; Type2 cells put H
// orthogonal to E and place EH near E (2A), near H (2B) or opposite E (2C).
// For each condition the preferred angles are a permutation of the centers.
TuningPopulation build_population(std::uint64_t seed, const PopulationConfig& config = {});

Eigen::VectorXd encode_input(const MotorSample& sample, const TuningPopulation& pop);

// SymmetricZ: (Re z_a, Im z_a, cos, sin) with E->1, H->omega, EH->omega^2.
// AsymmetricZPrime: (z', cos, sin) with z' = -1 (E), 0 (H), 1 (EH).
Eigen::VectorXd encode_target(const MotorSample& sample, TargetEncoding mode);

struct MotorDecision {
  Condition condition = Condition::E;
  double theta = 0.0;
};

// Nearest code point; ties resolved in the order E, H, EH.
MotorDecision decode_output(const Eigen::VectorXd& output, TargetEncoding mode);

// Linear voting: atan2(sum a*sin(mu), sum a*cos(mu)). Throws DomainError when
// the resultant vanishes.
double population_vector_decode(const Eigen::VectorXd& activity, const std::vector<double>& preferred);

// Voting restricted to the Type1 cells of `pop` (their angle is condition-free).
double population_vector_decode(const Eigen::VectorXd& activity, const TuningPopulation& pop);

struct ConditioningDecode {
  Condition condition = Condition::E;  // step-2 decision
  double theta = 0.0;                 // step-3 refined angle
  double coarse_theta = 0.0;          // step-1 Type1 estimate
  Condition check_condition = Condition::E;  // step-4 decision
  bool consistent = true;
  int dropped_cells = 0;             // cells skipped as ambiguous in step 2
};

// Four-step decoding of an input vector: Type1 voting for theta, majority of
// per-cell simple propositions (normalized activity above 1/2) for the
// condition, refinement of theta with the full population under that
// condition, then a consistency re-check. Cells with an observed or predicted
// normalized activity within `ambiguity_margin` of 1/2 are ignored.
ConditioningDecode logical_conditioning_decode(const Eigen::VectorXd& input, const TuningPopulation& pop,
                                               double ambiguity_margin = 0.05);

struct MotorDataset {
  Dataset data;  // labels = condition index
  std::vector<MotorSample> samples;
};

MotorSample make_sample(Condition c, double theta);
MotorDataset make_motor_dataset(const std::vector<MotorSample>& samples, const TuningPopulation& pop,
                                TargetEncoding mode);
// theta uniform on (-pi, pi], condition uniform over the three values.
MotorDataset generate_dataset(int n, std::uint64_t seed, TargetEncoding mode, const TuningPopulation& pop);
// Regular grid of `n_theta` angles under every condition.
MotorDataset grid_dataset(int n_theta, TargetEncoding mode, const TuningPopulation& pop);

// Fraction of samples whose decoded condition differs from the label.
double condition_error(const Network& net, const MotorDataset& data, TargetEncoding mode);

// CSV: condition, theta, x0..x54, t0..t{k-1}.
void write_dataset_csv(std::ostream& out, const MotorDataset& data);

}  // namespace logic_cells::motor
