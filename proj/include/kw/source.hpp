#pragma once

#include "kw/analysis.hpp"
#include "kw/fixed_point.hpp"
#include "kw/greens.hpp"
#include "kw/report.hpp"

namespace kw {

/// -Delta u = e^{kappa u} + beta delta_0, solved through u = v + c_v/kappa
/// + alpha Phi_0 and the normalized map T_0.
struct SourceProblem {
  double kappa = 0.0;  // > 0
  double alpha = 0.0;  // sigma = alpha kappa / 2pi > 2
  double beta = 0.0;   // 0 <= beta < alpha
  int domain_radius = 256;

  double sigma() const;
  void validate() const;  // throws invalid_argument on a bad combination
};

/// K_alpha(x) = exp(alpha kappa Phi_0(x)) on the box; decays like
/// |x|^{-sigma} with prefactor exp(-alpha kappa fitted_constant).
GridFunction source_weight(const GreensTable& table, DomainPtr domain,
                           double alpha, double kappa);

/// Total mass of K_alpha over Z^2: box sum plus the power-law tail.
double source_weight_mass(const GreensTable& table, const GridFunction& K,
                          double alpha, double kappa);

/// c_v = ln(g_mass / sum K e^{kappa v}); tail_mass is added to the
/// denominator, and the warning flag trips when it exceeds 1% of the head.
double normalization_constant(const GridFunction& K, double g_mass,
                              const GridFunction& v, double kappa,
                              double tail_mass = 0.0,
                              bool* accuracy_warning = nullptr);

SolveReport solve_source(const SourceProblem& p, const GreensTable& table,
                         const IterationOptions& opts = {});

/// h_0(sigma) = C2^sigma (sigma-2) exp(2 pi c1 sigma
///              + 24 pi c0^sigma sigma (sigma-2)^{-4 - 1/(sigma+1)}).
double threshold_h0(double sigma, const ThresholdConstants& constants);
double log_threshold_h0(double sigma, const ThresholdConstants& constants);

}  // namespace kw
