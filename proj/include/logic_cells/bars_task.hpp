#pragma once

// Colored bars on a discretized one-dimensional space (segment or circle)
// with exact topology labels and a Gaussian sensor-bank input layer.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logic_cells/mlp.hpp"

namespace logic_cells::bars {

enum class SpaceKind { Linear, Circular };
std::string to_string(SpaceKind kind);
SpaceKind parse_space_kind(const std::string& text);

struct Space {
  SpaceKind kind = SpaceKind::Linear;
  double diameter = 18.0;  // length units
  int dots = 100;

  void validate() const;
  double spacing() const { return diameter / dots; }
  double dot_position(int j) const { return (j + 0.5) * spacing(); }
  // Signed displacement from `from` to `to`, wrapped on the circle.
  double displacement(double from, double to) const;
};

enum class Color { R = 0, G = 1, B = 2 };
std::string to_string(Color c);

struct Bar {
  Color color = Color::R;
  double center = 0.0;
  double length = 1.0;
};

struct Scene {
  std::vector<Bar> bars;

  const Bar* find(Color c) const;
  bool has(Color c) const { return find(c) != nullptr; }
};

// Covered dots: bar [center - len/2, center + len/2) contains the dots whose
// positions fall inside it; on the circle `start` is reduced mod `dots`.
struct DotInterval {
  int start = 0;
  int count = 0;
};

// Throws DomainError for bars leaving the segment or longer than the space.
DotInterval support(const Bar& bar, const Space& space);

enum class Relation { Disjoint, Overlap, RedInGreen, GreenInRed, Coincident };
std::string to_string(Relation r);

// Interval arithmetic on dot intervals (arcs on the circle).
Relation relate(const Bar& red, const Bar& green, const Space& space);

// Pointwise evaluation of the quantified predicates over every dot; the
// independent oracle for `relate`.
Relation relate_pointwise(const Bar& red, const Bar& green, const Space& space);

enum class Experiment { One = 1, Two = 2, Three = 3 };
Experiment parse_experiment(const std::string& text);

// Condition names in canonical column order.
//   One: D, IO, II   (II = strict inclusion of one bar in the other)
//   Two: D, IO, II_R, II_G
//   Three: the One classes conditioned by the blue bar, notB first.
std::vector<std::string> class_names(Experiment e);
int num_classes(Experiment e);

// Throws DomainError when red and green cover the same dots.
int label_scene(const Scene& scene, const Space& space, Experiment e);
// Same label computed through relate_pointwise.
int label_scene_pointwise(const Scene& scene, const Space& space, Experiment e);

enum class SensorProfile { Gaussian, DifferenceOfGaussians };
std::string to_string(SensorProfile p);
SensorProfile parse_sensor_profile(const std::string& text);

struct SensorBank {
  int per_color = 55;
  int colors = 2;  // 3 when a blue block is present
  SensorProfile profile = SensorProfile::Gaussian;
  double width = 1.5;  // DoG: width minus 2*width kernel

  double sensor_center(int k, const Space& space) const { return (k + 0.5) * space.diameter / per_color; }
  int input_size() const { return per_color * colors; }
};

// Sensor k of color c: sum over covered dots of spacing * kernel(dot - center_k),
// with unit-integral kernels (wrapped on the circle). Absent colors give zeros.
Eigen::VectorXd render_input(const Scene& scene, const SensorBank& bank, const Space& space);

struct BarsSpec {
  Experiment experiment = Experiment::One;
  Space space{};
  std::vector<double> red_lengths{5.0};
  std::vector<double> green_lengths{3.0};
  double blue_length = 3.0;
  double blue_probability = 0.5;  // experiment Three only
  int count = 1000;
  std::uint64_t seed = 1;
  bool balanced = false;
  SensorBank bank{};

  void validate() const;
};

// Defaults: One -> segment of 18, red 5 / green 3; Two -> 23, both in {2,4,6,8};
// Three -> 23, red 6 / green 5 / blue 3 in half of the scenes.
BarsSpec default_spec(Experiment e, SpaceKind kind = SpaceKind::Linear);

struct BarsDataset {
  Dataset data;  // targets one-hot, labels = class index
  std::vector<Scene> scenes;
  Experiment experiment = Experiment::One;
  Space space{};
  SensorBank bank{};
};

// Centers are drawn uniformly among valid dot-snapped placements; scenes with
// coincident red and green supports are redrawn.
std::vector<Scene> sample_scenes(const BarsSpec& spec);
BarsDataset make_bars_dataset(const std::vector<Scene>& scenes, const BarsSpec& spec);
BarsDataset generate_dataset(const BarsSpec& spec);

// Swaps red and green in every scene.
std::vector<Scene> mirror_colors(const std::vector<Scene>& scenes);

struct GeneralizationSets {
  BarsDataset longer;          // lengths 6 / 4, same colors
  BarsDataset swapped;         // base scenes with colors exchanged
  BarsDataset longer_swapped;  // lengths 6 / 4 then colors exchanged
};

GeneralizationSets generalization_sets(const BarsSpec& base);

double classification_error(const Network& net, const BarsDataset& data);
std::vector<int> predict_classes(const Network& net, const Eigen::MatrixXd& inputs);

// CSV: r_center,r_length,g_center,g_length,b_center,b_length,label,x0..
void write_dataset_csv(std::ostream& out, const BarsDataset& data);

}  // namespace logic_cells::bars
