#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kw/lattice.hpp"

namespace kw {

/// Lattice Green's function Phi_0 of -Delta u = delta_0, u(0) = 0:
/// exact values on the square |x|_inf <= exact_radius, log asymptote with a
/// measured additive constant beyond the crossover.
class GreensTable {
 public:
  int exact_radius() const { return exact_radius_; }
  int crossover_radius() const { return crossover_radius_; }
  double fitted_constant() const { return fitted_constant_; }
  double max_residual_times_r() const { return max_residual_times_r_; }
  double seam_error() const { return seam_error_; }
  int quadrature_points() const { return quadrature_points_; }

  /// gamma_0 = (gamma_E + ln(2)/2)/pi, the paper's candidate constant.
  static double gamma0();
  /// (2 gamma_E + 3 ln 2)/(4 pi), the classical potential-kernel constant.
  static double classical_constant();

  bool has_exact(Point p) const { return norm_inf(p) <= exact_radius_; }

  double exact_value(Point p) const {
    int m = std::abs(p.x1), n = std::abs(p.x2);
    if (m < n) std::swap(m, n);
    return octant_[std::size_t(m) * (m + 1) / 2 + n];
  }

  /// Exact table value inside the crossover, -(1/2pi) ln|x| - fitted_constant
  /// beyond it.
  double eval(Point p) const {
    if (norm_inf(p) <= crossover_radius_) return exact_value(p);
    return -std::log(norm(p)) / (2.0 * M_PI) - fitted_constant_;
  }

  std::string fingerprint() const;

  friend GreensTable build_greens_table(int exact_radius, int quadrature_points);
  friend GreensTable load_greens_table(const std::string& csv_path, const std::string& meta_path);

 private:
  int exact_radius_ = 0;
  int crossover_radius_ = 0;
  int quadrature_points_ = 0;
  double fitted_constant_ = 0.0;
  double max_residual_times_r_ = 0.0;
  double seam_error_ = 0.0;
  // Values on the fundamental octant 0 <= n <= m <= exact_radius, row-major
  // triangular layout; dihedral symmetry is exact by construction.
  std::vector<double> octant_;

  void finalize();  // asymptotic fit + crossover selection
};

/// Builds the table from the Fourier representation of Phi_0 (the angular
/// integral is carried out analytically, leaving a smooth 1-D integrand) and
/// cross-checks the result against the stencil recurrence seeded by
/// Phi_0(0)=0, Phi_0(1,0)=-1/4 inside radius 8.  Throws on disagreement.
GreensTable build_greens_table(int exact_radius, int quadrature_points = 2048);

struct AsymptoticFit {
  double constant = 0.0;            // mean of -Phi_0 - ln|x|/(2pi) on the fit annulus
  double max_residual_times_r = 0.0;
  double c1_two_sided = 0.0;        // smallest c1 for |Phi_0 + ln(1+|x|)/(2pi)| <= c1
};

/// Re-measures the additive constant on the annulus [R/2, R] and the
/// O(1/|x|) residual.  Requires exact_radius >= 64.
AsymptoticFit asymptotic_fit(const GreensTable& table);

/// Smallest c1 >= 1 for which both two-sided displays
///   |Phi_0(x) + ln(1+|x|)/(2pi)| <= c1   and
///   -c1 ln(1+|x|) <= Phi_0(x) <= -(1/c1) ln(1+|x|)
/// hold at every stored x != 0.
double estimate_c1(const GreensTable& table);

void save_greens_table(const GreensTable& table, const std::string& csv_path,
                       const std::string& meta_path);
GreensTable load_greens_table(const std::string& csv_path, const std::string& meta_path);

/// Disk cache keyed by (exact_radius, quadrature_points); builds on miss.
GreensTable cached_greens_table(int exact_radius, int quadrature_points,
                                const std::string& cache_dir);

}  // namespace kw
