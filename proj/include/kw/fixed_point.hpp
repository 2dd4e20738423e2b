#pragma once

#include "kw/greens.hpp"
#include "kw/report.hpp"

namespace kw {

/// Shared machinery of the two substitution solvers.  Both cases reduce to
/// the fixed point of
///   T(v) = sign * Phi_0 * (K e^{kappa v + c_v} - g_mass delta_0),
/// with K = e^{alpha kappa Phi_0}, sign = +1 (source) or -1 (absorption),
/// and c_v chosen so the bracket has zero total mass.
struct FixedPointProblem {
  const GreensTable* table = nullptr;
  DomainPtr domain;
  double kappa = 0.0;
  double alpha = 0.0;   // sigma = alpha kappa / 2pi must exceed 2
  double g_mass = 0.0;  // alpha - beta (source) or beta - alpha (absorption)
  int sign = +1;
};

struct FixedPointState {
  GridFunction v;
  double c_v = 0.0;
  long iterations = 0;
  double final_update_norm = 0.0;
  double tail_fraction = 0.0;
  bool accuracy_warning = false;
};

/// Runs damped Picard with Anderson acceleration as a stagnation fallback.
/// Throws NonconvergenceError (with the update-norm history) on failure.
FixedPointState solve_fixed_point(const FixedPointProblem& p, const IterationOptions& opts);

/// One application of T; exposed for the gauge-invariance and first-iterate
/// checks.  c_v_out receives the normalization constant used.
GridFunction apply_fixed_point_map(const FixedPointProblem& p, const GridFunction& v,
                                   double* c_v_out = nullptr);

/// Annulus sums of r^{-s} (and r^{-s} ln r) over R < |y| <= 4R plus the
/// continuum remainder beyond 4R; the tail workhorse of both solvers.
struct TailSums {
  double z0 = 0.0;
  double z_log = 0.0;
};
TailSums power_tail_sums(int radius, double s);

/// Shared post-processing: assembles u = v + c_v/kappa + alpha Phi_0, fits
/// the log asymptote, tail-corrects the energy, and evaluates the pointwise
/// equation defect -Delta u - sign e^{kappa u} - beta delta_0.
SolveReport assemble_report(const FixedPointProblem& p, const FixedPointState& state,
                            double beta);

}  // namespace kw
