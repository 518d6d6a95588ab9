#include "logic_cells/bars_task.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "logic_cells/error.hpp"
#include "logic_cells/rng.hpp"

namespace logic_cells::bars {

std::string to_string(SpaceKind kind) { return kind == SpaceKind::Linear ? "linear" : "circular"; }

SpaceKind parse_space_kind(const std::string& text) {
  if (text == "linear") return SpaceKind::Linear;
  if (text == "circular") return SpaceKind::Circular;
  throw ConfigError("unknown space kind '" + text + "'");
}

void Space::validate() const {
  if (!(diameter > 0.0)) throw ConfigError("space diameter must be positive");
  if (dots < 1 || dots < diameter) throw ConfigError("discretization must have at least `diameter` dots");
}

double Space::displacement(double from, double to) const {
  double d = to - from;
  if (kind == SpaceKind::Circular) {
    d = std::fmod(d, diameter);
    if (d < -diameter / 2.0) d += diameter;
    if (d >= diameter / 2.0) d -= diameter;
  }
  return d;
}

std::string to_string(Color c) {
  switch (c) {
    case Color::R: return "R";
    case Color::G: return "G";
    case Color::B: return "B";
  }
  return "?";
}

const Bar* Scene::find(Color c) const {
  for (const Bar& b : bars) {
    if (b.color == c) return &b;
  }
  return nullptr;
}

namespace {

constexpr double kPlacementSlack = 1e-9;
constexpr double kEdgeTolerance = 1e-7;  // in dots

void check_bar(const Bar& bar, const Space& space) {
  if (!(bar.length > 0.0) || !(bar.length < space.diameter)) {
    throw DomainError("bar length must be positive and shorter than the space");
  }
  if (space.kind == SpaceKind::Linear) {
    if (bar.center - bar.length / 2.0 < -kPlacementSlack || bar.center + bar.length / 2.0 > space.diameter + kPlacementSlack) {
      throw DomainError("bar leaves the segment");
    }
  }
}

int positive_mod(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

}  // namespace

DotInterval support(const Bar& bar, const Space& space) {
  check_bar(bar, space);
  const double h = space.spacing();
  // Dot j is covered iff lo <= (j + 1/2) h < hi, edges compared with a
  // tolerance of kEdgeTolerance dots so both oracles break ties alike.
  const double lo = bar.center - bar.length / 2.0;
  const double hi = bar.center + bar.length / 2.0;
  const int first = static_cast<int>(std::ceil(lo / h - 0.5 - kEdgeTolerance));
  const int end = static_cast<int>(std::ceil(hi / h - 0.5 - kEdgeTolerance));
  DotInterval out{first, end - first};
  if (space.kind == SpaceKind::Circular) {
    out.start = positive_mod(first, space.dots);
  } else {
    out.start = std::max(0, first);
    out.count = std::min(end, space.dots) - out.start;
  }
  return out;
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::Disjoint: return "D";
    case Relation::Overlap: return "IO";
    case Relation::RedInGreen: return "R<G";
    case Relation::GreenInRed: return "G<R";
    case Relation::Coincident: return "R=G";
  }
  return "?";
}

namespace {

// True when arc a lies inside arc b.
bool contains(const DotInterval& b, const DotInterval& a, const Space& space) {
  if (space.kind == SpaceKind::Linear) return b.start <= a.start && a.start + a.count <= b.start + b.count;
  const int offset = positive_mod(a.start - b.start, space.dots);
  return offset + a.count <= b.count;
}

bool intersects(const DotInterval& a, const DotInterval& b, const Space& space) {
  if (a.count == 0 || b.count == 0) return false;
  if (space.kind == SpaceKind::Linear) return std::max(a.start, b.start) < std::min(a.start + a.count, b.start + b.count);
  return positive_mod(b.start - a.start, space.dots) < a.count || positive_mod(a.start - b.start, space.dots) < b.count;
}

bool covers(const Bar& bar, const Space& space, int dot) {
  const double d = space.displacement(bar.center, space.dot_position(dot));
  const double tol = kEdgeTolerance * space.spacing();
  return d >= -bar.length / 2.0 - tol && d < bar.length / 2.0 - tol;
}

}  // namespace

Relation relate(const Bar& red, const Bar& green, const Space& space) {
  const DotInterval r = support(red, space);
  const DotInterval g = support(green, space);
  if (!intersects(r, g, space)) return Relation::Disjoint;
  const bool r_in_g = contains(g, r, space);
  const bool g_in_r = contains(r, g, space);
  if (r_in_g && g_in_r) return Relation::Coincident;
  if (r_in_g) return Relation::RedInGreen;
  if (g_in_r) return Relation::GreenInRed;
  return Relation::Overlap;
}

Relation relate_pointwise(const Bar& red, const Bar& green, const Space& space) {
  check_bar(red, space);
  check_bar(green, space);
  bool both = false;         // exists x: R(x) and G(x)
  bool green_only = false;   // exists x: G(x) and not R(x)
  bool red_only = false;     // exists x: R(x) and not G(x)
  for (int j = 0; j < space.dots; ++j) {
    const bool r = covers(red, space, j);
    const bool g = covers(green, space, j);
    both = both || (r && g);
    green_only = green_only || (g && !r);
    red_only = red_only || (r && !g);
  }
  if (!both) return Relation::Disjoint;  // forall x: not (R(x) and G(x))
  if (!green_only && !red_only) return Relation::Coincident;
  if (!green_only) return Relation::GreenInRed;  // forall x: G(x) => R(x)
  if (!red_only) return Relation::RedInGreen;
  return Relation::Overlap;
}

Experiment parse_experiment(const std::string& text) {
  if (text == "1") return Experiment::One;
  if (text == "2") return Experiment::Two;
  if (text == "3") return Experiment::Three;
  throw ConfigError("unknown experiment '" + text + "'");
}

std::vector<std::string> class_names(Experiment e) {
  switch (e) {
    case Experiment::One: return {"D", "IO", "II"};
    case Experiment::Two: return {"D", "IO", "II_R", "II_G"};
    case Experiment::Three: return {"D|notB", "IO|notB", "II|notB", "D|B", "IO|B", "II|B"};
  }
  return {};
}

int num_classes(Experiment e) { return static_cast<int>(class_names(e).size()); }

namespace {

int label_from_relation(Relation rel, const Scene& scene, Experiment e) {
  if (rel == Relation::Coincident) throw DomainError("red and green bars coincide");
  int base = 0;
  if (e == Experiment::Two) {
    switch (rel) {
      case Relation::Disjoint: return 0;
      case Relation::Overlap: return 1;
      case Relation::RedInGreen: return 2;
      default: return 3;
    }
  }
  switch (rel) {
    case Relation::Disjoint: base = 0; break;
    case Relation::Overlap: base = 1; break;
    default: base = 2; break;
  }
  if (e == Experiment::Three && scene.has(Color::B)) base += 3;
  return base;
}

const Bar& required(const Scene& scene, Color c) {
  const Bar* b = scene.find(c);
  if (b == nullptr) throw DomainError("scene lacks a " + to_string(c) + " bar");
  return *b;
}

}  // namespace

int label_scene(const Scene& scene, const Space& space, Experiment e) {
  return label_from_relation(relate(required(scene, Color::R), required(scene, Color::G), space), scene, e);
}

int label_scene_pointwise(const Scene& scene, const Space& space, Experiment e) {
  return label_from_relation(relate_pointwise(required(scene, Color::R), required(scene, Color::G), space), scene, e);
}

std::string to_string(SensorProfile p) { return p == SensorProfile::Gaussian ? "gaussian" : "dog"; }

SensorProfile parse_sensor_profile(const std::string& text) {
  if (text == "gaussian") return SensorProfile::Gaussian;
  if (text == "dog") return SensorProfile::DifferenceOfGaussians;
  throw ConfigError("unknown sensor profile '" + text + "'");
}

namespace {

double gaussian(double u, double width) {
  return std::exp(-0.5 * u * u / (width * width)) / (width * std::sqrt(2.0 * std::numbers::pi));
}

double kernel(double u, const SensorBank& bank, const Space& space) {
  auto eval = [&](double w) {
    if (space.kind == SpaceKind::Linear) return gaussian(u, w);
    // Wrapped Gaussian; images beyond +-3 turns are below double precision
    // for the widths used here.
    double s = 0.0;
    for (int m = -3; m <= 3; ++m) s += gaussian(u + m * space.diameter, w);
    return s;
  };
  if (bank.profile == SensorProfile::Gaussian) return eval(bank.width);
  return eval(bank.width) - eval(2.0 * bank.width);
}

}  // namespace

Eigen::VectorXd render_input(const Scene& scene, const SensorBank& bank, const Space& space) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(bank.input_size());
  const double h = space.spacing();
  for (const Bar& bar : scene.bars) {
    const int block = static_cast<int>(bar.color);
    if (block >= bank.colors) throw DomainError("scene has a color the sensor bank does not detect");
    const DotInterval sup = support(bar, space);
    for (int k = 0; k < bank.per_color; ++k) {
      const double s = bank.sensor_center(k, space);
      double r = 0.0;
      for (int i = 0; i < sup.count; ++i) {
        const int dot = space.kind == SpaceKind::Circular ? (sup.start + i) % space.dots : sup.start + i;
        r += h * kernel(space.dot_position(dot) - s, bank, space);
      }
      x[block * bank.per_color + k] = r;
    }
  }
  return x;
}

void BarsSpec::validate() const {
  space.validate();
  if (red_lengths.empty() || green_lengths.empty()) throw ConfigError("length lists must be nonempty");
  auto check_length = [&](double l) {
    if (!(l > 0.0) || !(l < space.diameter)) {
      throw ConfigError("impossible bar length " + std::to_string(l) + " for a space of " +
                        std::to_string(space.diameter));
    }
  };
  for (double l : red_lengths) check_length(l);
  for (double l : green_lengths) check_length(l);
  if (experiment == Experiment::Three) {
    check_length(blue_length);
    if (!(blue_probability >= 0.0 && blue_probability <= 1.0)) throw ConfigError("blue probability out of range");
    if (bank.colors < 3) throw ConfigError("experiment 3 needs a 3-color sensor bank");
  }
  if (count < 1) throw ConfigError("scene count must be positive");
  if (bank.per_color < 1 || !(bank.width > 0.0)) throw ConfigError("invalid sensor bank");
}

BarsSpec default_spec(Experiment e, SpaceKind kind) {
  BarsSpec spec;
  spec.experiment = e;
  spec.space.kind = kind;
  switch (e) {
    case Experiment::One:
      spec.space.diameter = 18.0;
      spec.red_lengths = {5.0};
      spec.green_lengths = {3.0};
      break;
    case Experiment::Two:
      spec.space.diameter = 23.0;
      spec.red_lengths = {2.0, 4.0, 6.0, 8.0};
      spec.green_lengths = {2.0, 4.0, 6.0, 8.0};
      break;
    case Experiment::Three:
      spec.space.diameter = 23.0;
      spec.red_lengths = {6.0};
      spec.green_lengths = {5.0};
      spec.blue_length = 3.0;
      spec.bank.colors = 3;
      break;
  }
  return spec;
}

namespace {

Bar place_bar(Color color, double length, const Space& space, Rng& rng) {
  // Dot-snapped centers (j + 1/2) h; on the segment only those keeping the
  // bar inside.
  std::vector<int> valid;
  for (int j = 0; j < space.dots; ++j) {
    const double c = space.dot_position(j);
    if (space.kind == SpaceKind::Circular ||
        (c - length / 2.0 >= -kPlacementSlack && c + length / 2.0 <= space.diameter + kPlacementSlack)) {
      valid.push_back(j);
    }
  }
  if (valid.empty()) throw ConfigError("no valid placement for a bar of length " + std::to_string(length));
  return Bar{color, space.dot_position(valid[rng.below(valid.size())]), length};
}

Scene draw_scene(const BarsSpec& spec, Rng& rng) {
  Scene s;
  const double lr = spec.red_lengths[rng.below(spec.red_lengths.size())];
  const double lg = spec.green_lengths[rng.below(spec.green_lengths.size())];
  s.bars.push_back(place_bar(Color::R, lr, spec.space, rng));
  s.bars.push_back(place_bar(Color::G, lg, spec.space, rng));
  if (spec.experiment == Experiment::Three && rng.bernoulli(spec.blue_probability)) {
    s.bars.push_back(place_bar(Color::B, spec.blue_length, spec.space, rng));
  }
  return s;
}

}  // namespace

std::vector<Scene> sample_scenes(const BarsSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int classes = num_classes(spec.experiment);
  std::vector<Scene> scenes;
  scenes.reserve(spec.count);
  constexpr int kMaxAttempts = 100000;
  while (static_cast<int>(scenes.size()) < spec.count) {
    const int wanted = spec.balanced ? static_cast<int>(scenes.size()) % classes : -1;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      Scene s = draw_scene(spec, rng);
      if (relate(*s.find(Color::R), *s.find(Color::G), spec.space) == Relation::Coincident) continue;
      if (wanted >= 0 && label_scene(s, spec.space, spec.experiment) != wanted) continue;
      scenes.push_back(std::move(s));
      placed = true;
    }
    if (!placed) throw ConfigError("could not sample a scene for class " + std::to_string(wanted));
  }
  return scenes;
}

BarsDataset make_bars_dataset(const std::vector<Scene>& scenes, const BarsSpec& spec) {
  BarsDataset out;
  out.experiment = spec.experiment;
  out.space = spec.space;
  out.bank = spec.bank;
  out.scenes = scenes;
  const int n = static_cast<int>(scenes.size());
  const int classes = num_classes(spec.experiment);
  out.data.inputs.resize(spec.bank.input_size(), n);
  out.data.targets = Eigen::MatrixXd::Zero(classes, n);
  out.data.labels.resize(n);
  for (int j = 0; j < n; ++j) {
    out.data.inputs.col(j) = render_input(scenes[j], spec.bank, spec.space);
    const int label = label_scene(scenes[j], spec.space, spec.experiment);
    out.data.labels[j] = label;
    out.data.targets(label, j) = 1.0;
  }
  return out;
}

BarsDataset generate_dataset(const BarsSpec& spec) { return make_bars_dataset(sample_scenes(spec), spec); }

std::vector<Scene> mirror_colors(const std::vector<Scene>& scenes) {
  std::vector<Scene> out = scenes;
  for (Scene& s : out) {
    for (Bar& b : s.bars) {
      if (b.color == Color::R) {
        b.color = Color::G;
      } else if (b.color == Color::G) {
        b.color = Color::R;
      }
    }
    std::stable_sort(s.bars.begin(), s.bars.end(),
                     [](const Bar& a, const Bar& b) { return static_cast<int>(a.color) < static_cast<int>(b.color); });
  }
  return out;
}

GeneralizationSets generalization_sets(const BarsSpec& base) {
  if (base.experiment != Experiment::One) throw ConfigError("generalization sets are defined for experiment 1");
  BarsSpec longer = base;
  longer.red_lengths = {6.0};
  longer.green_lengths = {4.0};
  const auto base_scenes = sample_scenes(base);
  const auto longer_scenes = sample_scenes(longer);
  GeneralizationSets sets;
  sets.longer = make_bars_dataset(longer_scenes, longer);
  sets.swapped = make_bars_dataset(mirror_colors(base_scenes), base);
  sets.longer_swapped = make_bars_dataset(mirror_colors(longer_scenes), longer);
  return sets;
}

std::vector<int> predict_classes(const Network& net, const Eigen::MatrixXd& inputs) {
  const auto acts = forward_batch(net, inputs);
  const Eigen::MatrixXd& out = acts.layers.back();
  std::vector<int> pred(out.cols());
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    Eigen::Index best = 0;
    out.col(j).maxCoeff(&best);
    pred[j] = static_cast<int>(best);
  }
  return pred;
}

double classification_error(const Network& net, const BarsDataset& data) {
  const auto pred = predict_classes(net, data.data.inputs);
  int wrong = 0;
  for (std::size_t j = 0; j < pred.size(); ++j) wrong += pred[j] != data.data.labels[j];
  return pred.empty() ? 0.0 : static_cast<double>(wrong) / pred.size();
}

void write_dataset_csv(std::ostream& out, const BarsDataset& data) {
  const auto names = class_names(data.experiment);
  out << "r_center,r_length,g_center,g_length,b_center,b_length,label";
  for (Eigen::Index i = 0; i < data.data.inputs.rows(); ++i) out << ",x" << i;
  out << "\n";
  const auto old_precision = out.precision(17);
  for (std::size_t j = 0; j < data.scenes.size(); ++j) {
    for (Color c : {Color::R, Color::G, Color::B}) {
      const Bar* b = data.scenes[j].find(c);
      if (b != nullptr) {
        out << b->center << "," << b->length << ",";
      } else {
        out << ",,";
      }
    }
    out << names[data.data.labels[j]];
    for (Eigen::Index i = 0; i < data.data.inputs.rows(); ++i) out << "," << data.data.inputs(i, j);
    out << "\n";
  }
  out.precision(old_precision);
}

}  // namespace logic_cells::bars
