#include "logic_cells/harmonics.hpp"

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <numbers>

#include "logic_cells/error.hpp"

namespace logic_cells::logic {

std::string to_string(HarmonicFamily f) {
  switch (f) {
    case HarmonicFamily::Constant: return "constant";
    case HarmonicFamily::Red: return "red";
    case HarmonicFamily::Green: return "green";
    case HarmonicFamily::Difference: return "difference";
    case HarmonicFamily::Sum: return "sum";
    case HarmonicFamily::Other: return "other";
  }
  return "?";
}

namespace {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

ComplexMatrix dft_matrix(int n) {
  ComplexMatrix f(n, n);
  for (int p = 0; p < n; ++p) {
    for (int i = 0; i < n; ++i) {
      // Reduce the product first so large grids keep full phase accuracy.
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(p) * i) % n) / n;
      f(p, i) = std::polar(1.0, phase);
    }
  }
  return f;
}

// Signed frequency in [-n/2, n/2).
int signed_frequency(int p, int n) { return p < (n + 1) / 2 ? p : p - n; }

}  // namespace

HarmonicReport fit_harmonics(const Eigen::MatrixXd& map, int max_degree, double fourier_threshold) {
  const int n = static_cast<int>(map.rows());
  if (n < 2 || map.cols() != n) throw ShapeError("harmonic fit needs a square grid");
  if (max_degree < 1 || 2 * max_degree >= n) throw DomainError("max degree must be in [1, n/2)");
  const ComplexMatrix f = dft_matrix(n);
  const ComplexMatrix spectrum = f * map.cast<Complex>() * f.transpose();

  HarmonicReport r;
  r.max_degree = max_degree;
  r.red.assign(max_degree, 0.0);
  r.green.assign(max_degree, 0.0);
  r.difference.assign(max_degree, 0.0);
  r.sum.assign(max_degree, 0.0);
  const double norm = static_cast<double>(n) * n * n * n;  // Parseval on the mean of squares
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      const double e = std::norm(spectrum(p, q)) / norm;
      r.total_energy += e;
      const int a = signed_frequency(p, n);
      const int b = signed_frequency(q, n);
      const int ka = std::abs(a);
      const int kb = std::abs(b);
      if (a == 0 && b == 0) {
        r.constant += e;
      } else if (b == 0 && ka <= max_degree) {
        r.red[ka - 1] += e;
      } else if (a == 0 && kb <= max_degree) {
        r.green[kb - 1] += e;
      } else if (a == -b && ka <= max_degree) {
        r.difference[ka - 1] += e;
      } else if (a == b && ka <= max_degree) {
        r.sum[ka - 1] += e;
      } else {
        r.other += e;
      }
    }
  }

  const double ac = r.total_energy - r.constant;
  if (ac > 1e-12 * std::max(r.total_energy, 1e-300)) {
    auto consider = [&](HarmonicFamily fam, int degree, double e) {
      if (e > r.dominant_fraction * ac) {
        r.dominant_family = fam;
        r.dominant_degree = degree;
        r.dominant_fraction = e / ac;
      }
    };
    for (int k = 1; k <= max_degree; ++k) {
      consider(HarmonicFamily::Red, k, r.red[k - 1]);
      consider(HarmonicFamily::Green, k, r.green[k - 1]);
      consider(HarmonicFamily::Difference, k, r.difference[k - 1]);
      consider(HarmonicFamily::Sum, k, r.sum[k - 1]);
    }
    r.fourier_cell = r.dominant_fraction >= fourier_threshold;
  }
  return r;
}

ReflectionReport reflection_split(const Eigen::MatrixXd& map) {
  if (map.size() == 0) throw ShapeError("empty map");
  const Eigen::MatrixXd flipped = map.reverse();
  const Eigen::MatrixXd sym = 0.5 * (map + flipped);
  const Eigen::MatrixXd anti = 0.5 * (map - flipped);
  const double n = static_cast<double>(map.size());
  return {map.squaredNorm() / n, sym.squaredNorm() / n, anti.squaredNorm() / n};
}

}  // namespace logic_cells::logic
