#include "logic_cells/motor_task.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "logic_cells/error.hpp"
#include "logic_cells/rng.hpp"

namespace logic_cells::motor {

using std::numbers::pi;

std::string to_string(Condition c) {
  switch (c) {
    case Condition::E: return "E";
    case Condition::H: return "H";
    case Condition::EH: return "EH";
  }
  return "?";
}

Condition parse_condition(const std::string& text) {
  if (text == "E") return Condition::E;
  if (text == "H") return Condition::H;
  if (text == "EH") return Condition::EH;
  throw DomainError("unknown condition '" + text + "'");
}

std::string to_string(CellFamily f) {
  switch (f) {
    case CellFamily::Type1: return "1";
    case CellFamily::Type2A: return "2A";
    case CellFamily::Type2B: return "2B";
    case CellFamily::Type2C: return "2C";
  }
  return "?";
}

std::string to_string(TargetEncoding mode) { return mode == TargetEncoding::SymmetricZ ? "z" : "z_prime"; }

TargetEncoding parse_target_encoding(const std::string& text) {
  if (text == "z" || text == "symmetric") return TargetEncoding::SymmetricZ;
  if (text == "z_prime" || text == "asymmetric") return TargetEncoding::AsymmetricZPrime;
  throw ConfigError("unknown target encoding '" + text + "'");
}

int target_size(TargetEncoding mode) { return mode == TargetEncoding::SymmetricZ ? 4 : 3; }

double wrap_angle(double angle) {
  double a = std::fmod(angle, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  if (a > pi) a -= 2.0 * pi;
  return a;
}

double bessel_i0(double x) {
  const double ax = std::abs(x);
  if (ax < 30.0) {
    // Power series sum (x^2/4)^k / (k!)^2; terms are positive so it converges
    // to full relative precision.
    const double q = 0.25 * ax * ax;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return sum;
  }
  // Asymptotic expansion e^x / sqrt(2 pi x) * sum prod (2j-1)^2 / (j! (8x)^j).
  double term = 1.0;
  double sum = 1.0;
  for (int j = 1; j < 30; ++j) {
    const double next = term * (2.0 * j - 1.0) * (2.0 * j - 1.0) / (j * 8.0 * ax);
    if (next > term) break;
    term = next;
    sum += term;
    if (term < 1e-17) break;
  }
  return std::exp(ax) / std::sqrt(2.0 * pi * ax) * sum;
}

double von_mises(double theta, double mu, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("von_mises: kappa must be positive");
  return std::exp(kappa * std::cos(theta - mu)) / (2.0 * pi * bessel_i0(kappa));
}

void PopulationConfig::validate() const {
  if (n_cells < 1) throw ConfigError("population needs cells");
  if (n_type1 < 1 || n_type2a < 0 || n_type2b < 0 || n_type2c < 0 ||
      n_type1 + n_type2a + n_type2b + n_type2c != n_cells) {
    throw ConfigError("family counts must be non-negative, with at least one Type1 cell, and sum to n_cells");
  }
  for (double k : kappa) {
    if (!(k > 0.0)) throw ConfigError("concentrations must be positive");
  }
  if (!(offset_sigma >= 0.0)) throw ConfigError("offset sigma must be non-negative");
}

std::vector<int> TuningPopulation::cells_of(CellFamily f) const {
  std::vector<int> out;
  for (int i = 0; i < n_cells(); ++i) {
    if (family[i] == f) out.push_back(i);
  }
  return out;
}

double TuningPopulation::reference_peak() const {
  double peak = 0.0;
  for (double k : kappa) peak = std::max(peak, von_mises(0.0, 0.0, k));
  return peak;
}

namespace {

// Assigns the pool of centers to cells so that each cell's center is close to
// its desired angle: sort both on the circle and choose the cyclic rotation
// with least squared wrapped error.
std::vector<double> match_to_centers(const std::vector<double>& desired, std::vector<double> pool) {
  const std::size_t m = desired.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> wrapped(m);
  for (std::size_t i = 0; i < m; ++i) wrapped[i] = wrap_angle(desired[i]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return wrapped[a] < wrapped[b]; });
  std::sort(pool.begin(), pool.end());
  std::size_t best_shift = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t shift = 0; shift < m; ++shift) {
    double cost = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double d = wrap_angle(pool[(k + shift) % m] - wrapped[order[k]]);
      cost += d * d;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_shift = shift;
    }
  }
  std::vector<double> assigned(m);
  for (std::size_t k = 0; k < m; ++k) assigned[order[k]] = pool[(k + best_shift) % m];
  return assigned;
}

}  // namespace

TuningPopulation build_population(std::uint64_t seed, const PopulationConfig& config) {
  config.validate();
  const int n = config.n_cells;
  TuningPopulation pop;
  pop.kappa = config.kappa;
  pop.centers.resize(n);
  for (int i = 0; i < n; ++i) pop.centers[i] = -pi + (i + 0.5) * 2.0 * pi / n;

  // Type1 cells evenly spread; the rest cycle through 2A, 2B, 2C.
  pop.family.assign(n, CellFamily::Type2A);
  std::vector<bool> is_type1(n, false);
  for (int k = 0; k < config.n_type1; ++k) {
    is_type1[static_cast<int>(std::floor((k + 0.5) * n / config.n_type1))] = true;
  }
  std::array<int, 3> remaining{config.n_type2a, config.n_type2b, config.n_type2c};
  constexpr std::array<CellFamily, 3> kType2{CellFamily::Type2A, CellFamily::Type2B, CellFamily::Type2C};
  int cursor = 0;
  for (int i = 0; i < n; ++i) {
    if (is_type1[i]) {
      pop.family[i] = CellFamily::Type1;
      continue;
    }
    while (remaining[cursor % 3] == 0) ++cursor;
    pop.family[i] = kType2[cursor % 3];
    --remaining[cursor % 3];
    ++cursor;
  }

  pop.preferred.assign(n, {0.0, 0.0, 0.0});
  std::vector<int> type2;
  std::vector<double> pool;
  for (int i = 0; i < n; ++i) {
    const double mu_e = pop.centers[i];
    pop.preferred[i][index(Condition::E)] = mu_e;
    if (pop.family[i] == CellFamily::Type1) {
      pop.preferred[i][index(Condition::H)] = mu_e;
      pop.preferred[i][index(Condition::EH)] = mu_e;
    } else {
      type2.push_back(i);
      pool.push_back(mu_e);
    }
  }

  Rng rng(seed);
  const double sigma = config.offset_sigma;
  std::vector<double> want_h(type2.size());
  std::vector<double> want_eh(type2.size());
  for (std::size_t k = 0; k < type2.size(); ++k) {
    const double mu_e = pop.centers[type2[k]];
    want_h[k] = mu_e + pi / 2.0 + rng.normal(0.0, sigma);
    switch (pop.family[type2[k]]) {
      case CellFamily::Type2A: want_eh[k] = mu_e + rng.normal(0.0, sigma); break;
      case CellFamily::Type2B: want_eh[k] = want_h[k] + rng.normal(0.0, sigma); break;
      default: want_eh[k] = mu_e + pi + rng.normal(0.0, sigma); break;
    }
  }
  if (!type2.empty()) {
    const auto mu_h = match_to_centers(want_h, pool);
    const auto mu_eh = match_to_centers(want_eh, pool);
    for (std::size_t k = 0; k < type2.size(); ++k) {
      pop.preferred[type2[k]][index(Condition::H)] = mu_h[k];
      pop.preferred[type2[k]][index(Condition::EH)] = mu_eh[k];
    }
  }
  return pop;
}

Eigen::VectorXd encode_input(const MotorSample& sample, const TuningPopulation& pop) {
  const int a = index(sample.condition);
  Eigen::VectorXd x(pop.n_cells());
  for (int i = 0; i < pop.n_cells(); ++i) x[i] = von_mises(sample.theta, pop.preferred[i][a], pop.kappa[a]);
  return x;
}

namespace {

constexpr double kHalfSqrt3 = 0.86602540378443864676;

std::array<double, 2> root_of(Condition c) {
  switch (c) {
    case Condition::E: return {1.0, 0.0};
    case Condition::H: return {-0.5, kHalfSqrt3};
    case Condition::EH: return {-0.5, -kHalfSqrt3};
  }
  return {0.0, 0.0};
}

double z_prime_of(Condition c) {
  switch (c) {
    case Condition::E: return -1.0;
    case Condition::H: return 0.0;
    case Condition::EH: return 1.0;
  }
  return 0.0;
}

}  // namespace

Eigen::VectorXd encode_target(const MotorSample& sample, TargetEncoding mode) {
  if (mode == TargetEncoding::SymmetricZ) {
    const auto z = root_of(sample.condition);
    return Eigen::Vector4d(z[0], z[1], std::cos(sample.theta), std::sin(sample.theta));
  }
  return Eigen::Vector3d(z_prime_of(sample.condition), std::cos(sample.theta), std::sin(sample.theta));
}

MotorDecision decode_output(const Eigen::VectorXd& output, TargetEncoding mode) {
  if (output.size() != target_size(mode)) throw ShapeError("decode_output: wrong output length");
  if (!output.allFinite()) throw NumericalError("decode_output: non-finite output");
  MotorDecision decision;
  double best = std::numeric_limits<double>::infinity();
  for (Condition c : kConditions) {
    double d;
    if (mode == TargetEncoding::SymmetricZ) {
      const auto z = root_of(c);
      d = (output[0] - z[0]) * (output[0] - z[0]) + (output[1] - z[1]) * (output[1] - z[1]);
    } else {
      d = (output[0] - z_prime_of(c)) * (output[0] - z_prime_of(c));
    }
    if (d < best) {  // strict: earlier condition wins ties
      best = d;
      decision.condition = c;
    }
  }
  const int off = mode == TargetEncoding::SymmetricZ ? 2 : 1;
  decision.theta = wrap_angle(std::atan2(output[off + 1], output[off]));
  return decision;
}

double population_vector_decode(const Eigen::VectorXd& activity, const std::vector<double>& preferred) {
  if (static_cast<std::size_t>(activity.size()) != preferred.size()) {
    throw ShapeError("population_vector_decode: activity/angle length mismatch");
  }
  if (preferred.empty()) throw DomainError("population_vector_decode: no voters");
  double c = 0.0;
  double s = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < preferred.size(); ++i) {
    c += activity[i] * std::cos(preferred[i]);
    s += activity[i] * std::sin(preferred[i]);
    mass += std::abs(activity[i]);
  }
  if (mass == 0.0 || std::hypot(c, s) <= 1e-12 * mass) {
    throw DomainError("population_vector_decode: resultant vanishes, angle undefined");
  }
  return wrap_angle(std::atan2(s, c));
}

double population_vector_decode(const Eigen::VectorXd& activity, const TuningPopulation& pop) {
  if (activity.size() != pop.n_cells()) throw ShapeError("activity length does not match population");
  const auto voters = pop.cells_of(CellFamily::Type1);
  Eigen::VectorXd sub(voters.size());
  std::vector<double> angles(voters.size());
  for (std::size_t k = 0; k < voters.size(); ++k) {
    sub[k] = activity[voters[k]];
    angles[k] = pop.preferred[voters[k]][index(Condition::E)];
  }
  return population_vector_decode(sub, angles);
}

namespace {

struct Vote {
  Condition condition = Condition::E;
  int dropped = 0;
};

// Majority over simple propositions at angle theta: a cell votes for every
// condition under which its predicted state (normalized activity > 1/2)
// matches its observed state.
Vote vote_condition(const Eigen::VectorXd& input, const TuningPopulation& pop, double theta, double margin) {
  const double ref = pop.reference_peak();
  std::array<int, 3> votes{0, 0, 0};
  int dropped = 0;
  for (int i = 0; i < pop.n_cells(); ++i) {
    const double observed = input[i] / ref;
    std::array<double, 3> predicted{};
    bool ambiguous = std::abs(observed - 0.5) < margin;
    for (Condition c : kConditions) {
      predicted[index(c)] = von_mises(theta, pop.preferred[i][index(c)], pop.kappa_of(c)) / ref;
      ambiguous = ambiguous || std::abs(predicted[index(c)] - 0.5) < margin;
    }
    if (ambiguous) {
      ++dropped;
      continue;
    }
    const bool state = observed > 0.5;
    for (Condition c : kConditions) {
      if ((predicted[index(c)] > 0.5) == state) ++votes[index(c)];
    }
  }
  Vote v;
  v.dropped = dropped;
  int best = -1;
  for (Condition c : kConditions) {
    if (votes[index(c)] > best) {
      best = votes[index(c)];
      v.condition = c;
    }
  }
  return v;
}

}  // namespace

ConditioningDecode logical_conditioning_decode(const Eigen::VectorXd& input, const TuningPopulation& pop,
                                               double ambiguity_margin) {
  if (input.size() != pop.n_cells()) throw ShapeError("input length does not match population");
  ConditioningDecode out;
  out.coarse_theta = population_vector_decode(input, pop);
  const Vote first = vote_condition(input, pop, out.coarse_theta, ambiguity_margin);
  out.condition = first.condition;
  out.dropped_cells = first.dropped;

  std::vector<double> angles(pop.n_cells());
  for (int i = 0; i < pop.n_cells(); ++i) angles[i] = pop.preferred[i][index(out.condition)];
  out.theta = population_vector_decode(input, angles);

  out.check_condition = vote_condition(input, pop, out.theta, ambiguity_margin).condition;
  out.consistent = out.check_condition == out.condition;
  return out;
}

MotorSample make_sample(Condition c, double theta) { return {c, wrap_angle(theta)}; }

MotorDataset make_motor_dataset(const std::vector<MotorSample>& samples, const TuningPopulation& pop,
                                TargetEncoding mode) {
  MotorDataset out;
  const int n = static_cast<int>(samples.size());
  out.samples = samples;
  out.data.inputs.resize(pop.n_cells(), n);
  out.data.targets.resize(target_size(mode), n);
  out.data.labels.resize(n);
  for (int j = 0; j < n; ++j) {
    out.data.inputs.col(j) = encode_input(samples[j], pop);
    out.data.targets.col(j) = encode_target(samples[j], mode);
    out.data.labels[j] = index(samples[j].condition);
  }
  return out;
}

MotorDataset generate_dataset(int n, std::uint64_t seed, TargetEncoding mode, const TuningPopulation& pop) {
  if (n <= 0) throw DomainError("dataset size must be positive");
  Rng rng(seed);
  std::vector<MotorSample> samples(n);
  for (auto& s : samples) {
    s.condition = kConditions[rng.below(3)];
    s.theta = pi - 2.0 * pi * rng.uniform();  // (-pi, pi]
  }
  return make_motor_dataset(samples, pop, mode);
}

MotorDataset grid_dataset(int n_theta, TargetEncoding mode, const TuningPopulation& pop) {
  if (n_theta <= 0) throw DomainError("grid size must be positive");
  std::vector<MotorSample> samples;
  for (Condition c : kConditions) {
    for (int k = 0; k < n_theta; ++k) samples.push_back(make_sample(c, -pi + (k + 1) * 2.0 * pi / n_theta));
  }
  return make_motor_dataset(samples, pop, mode);
}

double condition_error(const Network& net, const MotorDataset& data, TargetEncoding mode) {
  const auto acts = forward_batch(net, data.data.inputs);
  const Eigen::MatrixXd& out = acts.layers.back();
  int wrong = 0;
  for (int j = 0; j < data.data.size(); ++j) {
    if (decode_output(out.col(j), mode).condition != data.samples[j].condition) ++wrong;
  }
  return static_cast<double>(wrong) / data.data.size();
}

void write_dataset_csv(std::ostream& out, const MotorDataset& data) {
  const auto& in = data.data.inputs;
  const auto& tg = data.data.targets;
  out << "condition,theta";
  for (Eigen::Index i = 0; i < in.rows(); ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < tg.rows(); ++i) out << ",t" << i;
  out << "\n";
  const auto old_precision = out.precision(17);
  for (int j = 0; j < data.data.size(); ++j) {
    out << to_string(data.samples[j].condition) << "," << data.samples[j].theta;
    for (Eigen::Index i = 0; i < in.rows(); ++i) out << "," << in(i, j);
    for (Eigen::Index i = 0; i < tg.rows(); ++i) out << "," << tg(i, j);
    out << "\n";
  }
  out.precision(old_precision);
}

}  // namespace logic_cells::motor
