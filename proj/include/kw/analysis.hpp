#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kw/lattice.hpp"

namespace kw {

enum class FitModel { log, log_double_log };

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_sup = 0.0;
  double oscillation = 0.0;  // max - min of the de-trended values
  double r_in = 0.0;
  double r_out = 0.0;
  FitModel model = FitModel::log;
};

/// Least squares of u against ln|x| over the annulus r_in <= |x| <= r_out.
/// Needs at least 100 lattice points in the annulus.
FitResult fit_log_asymptote(const GridFunction& u, double r_in, double r_out);

/// Constrained double-log fit: both slopes pinned to -2/kappa, only the
/// constant free, i.e. d = mean of u + (2/kappa)(ln|x| + ln ln|x|).
FitResult fit_double_log_constant(const GridFunction& u, double kappa,
                                  double r_in, double r_out);

struct ThresholdConstants {
  double c0 = 1.0;
  double c1 = 1.0;
  double C2 = 1.0;
};

struct ThresholdScanRow {
  double sigma = 0.0;
  double log_h0 = 0.0;
  double h0 = 0.0;
  bool kappa_star_flag = false;  // marks the grid argmin
};

struct ThresholdScan {
  std::vector<ThresholdScanRow> rows;
  double kappa_star = 0.0;  // 1 / min h0 over the grid
  double a0 = 0.0;          // argmin
  std::vector<std::pair<double, double>> kappa_bar;  // (epsilon, value)
  bool kappa_bar_below_star = false;  // the ordering actually observed
};

/// Tabulates h0 over the sigma grid with the supplied measured constants,
/// locates the interior minimum, and evaluates the windowed thresholds for
/// epsilon in {0.1, 0.5, 0.9}.
ThresholdScan admissible_region_scan(const ThresholdConstants& constants,
                                     const std::vector<double>& sigma_grid);

void write_threshold_csv(const ThresholdScan& scan, const std::string& path);

}  // namespace kw
