#pragma once

// Harmonic content of raw activity maps: 2-D Fourier energies on the torus,
// reflection symmetry on the segment.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace logic_cells::logic {

enum class HarmonicFamily { Constant, Red, Green, Difference, Sum, Other };
std::string to_string(HarmonicFamily f);

struct HarmonicReport {
  int max_degree = 0;
  double total_energy = 0.0;  // mean of squares over the grid
  double constant = 0.0;
  // Index k-1 holds degree k: frequencies (k,0), (0,k), (k,-k), (k,k) and their negatives.
  std::vector<double> red;
  std::vector<double> green;
  std::vector<double> difference;  // in theta_R - theta_G
  std::vector<double> sum;
  double other = 0.0;  // everything else, including higher degrees

  HarmonicFamily dominant_family = HarmonicFamily::Constant;
  int dominant_degree = 0;
  double dominant_fraction = 0.0;  // share of the non-constant energy
  bool fourier_cell = false;
};

// `map` is sampled on a uniform n x n grid of the torus (rows: red center).
// Energies add up to total_energy.
HarmonicReport fit_harmonics(const Eigen::MatrixXd& map, int max_degree, double fourier_threshold = 0.6);

struct ReflectionReport {
  double total_energy = 0.0;
  double symmetric = 0.0;
  double antisymmetric = 0.0;
};

// Split under (x_R, x_G) -> (D - x_R, D - x_G), i.e. reversal of both grid axes.
ReflectionReport reflection_split(const Eigen::MatrixXd& map);

}  // namespace logic_cells::logic
