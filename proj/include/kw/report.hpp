#pragma once

#include <stdexcept>
#include <vector>

#include "kw/lattice.hpp"

namespace kw {

struct IterationOptions {
  double tol = 1e-8;          // update norm in the weighted sup norm
  long max_iterations = 600;
  double damping = 0.5;       // Picard relaxation, halved on oscillation
  int patience = 12;          // growth steps tolerated before giving up
  int anderson_depth = 3;     // 0 disables the acceleration fallback
  double initial_perturbation = 0.0;  // for uniqueness re-runs
};

struct SolveReport {
  GridFunction solution;
  double kappa = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  int radius = 0;
  long iterations = 0;
  double final_update_norm = 0.0;
  double total_energy = 0.0;       // sum e^{kappa u}, tail-corrected
  double fitted_slope = 0.0;
  double fitted_constant_d = 0.0;
  double identity_residual = 0.0;  // |total_energy - target mass|
  double equation_residual = 0.0;  // sup of the pointwise equation defect
  double tail_fraction = 0.0;      // tail mass / head mass in the last c_v
  bool accuracy_warning = false;
};

class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), update_norms(std::move(history)) {}
  std::vector<double> update_norms;
};

}  // namespace kw
