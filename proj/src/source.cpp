#include "kw/source.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kw {

double SourceProblem::sigma() const { return alpha * kappa / (2.0 * std::numbers::pi); }

void SourceProblem::validate() const {
  if (kappa <= 0.0) throw std::invalid_argument("SourceProblem: kappa must be > 0");
  if (sigma() <= 2.0) throw std::invalid_argument("SourceProblem: needs alpha kappa/2pi > 2");
  if (beta < 0.0 || beta >= alpha)
    throw std::invalid_argument("SourceProblem: needs 0 <= beta < alpha");
  if (domain_radius < 8) throw std::invalid_argument("SourceProblem: radius too small");
}

GridFunction source_weight(const GreensTable& table, DomainPtr domain,
                           double alpha, double kappa) {
  if (alpha * kappa / (2.0 * std::numbers::pi) <= 2.0)
    throw std::invalid_argument("source_weight: needs alpha kappa/2pi > 2");
  GridFunction K(domain);
  auto fill = [&](const std::vector<Point>& pts) {
    for (Point x : pts) K.set(x, std::exp(alpha * kappa * table.eval(x)));
  };
  fill(domain->interior());
  fill(domain->boundary());
  return K;
}

double source_weight_mass(const GreensTable& table, const GridFunction& K,
                          double alpha, double kappa) {
  double sigma = alpha * kappa / (2.0 * std::numbers::pi);
  double prefactor = std::exp(-alpha * kappa * table.fitted_constant());
  return lattice_sum(K) + prefactor * power_tail_sums(K.domain().radius(), sigma).z0;
}

double normalization_constant(const GridFunction& K, double g_mass,
                              const GridFunction& v, double kappa,
                              double tail_mass, bool* accuracy_warning) {
  if (g_mass <= 0.0) throw std::invalid_argument("normalization_constant: g_mass must be > 0");
  GridFunction h(K.domain_ptr());
  auto fill = [&](const std::vector<Point>& pts) {
    for (Point x : pts) h.set(x, K.raw(x) * std::exp(kappa * v.raw(x)));
  };
  fill(K.domain().interior());
  fill(K.domain().boundary());
  double head = lattice_sum(h);
  if (accuracy_warning) *accuracy_warning = tail_mass > 0.01 * head;
  double total = head + tail_mass;
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::invalid_argument("normalization_constant: weighted mass not positive finite");
  return std::log(g_mass / total);
}

SolveReport solve_source(const SourceProblem& p, const GreensTable& table,
                         const IterationOptions& opts) {
  p.validate();
  FixedPointProblem fp;
  fp.table = &table;
  fp.domain = make_domain(p.domain_radius);
  fp.kappa = p.kappa;
  fp.alpha = p.alpha;
  fp.g_mass = p.alpha - p.beta;
  fp.sign = +1;
  FixedPointState st = solve_fixed_point(fp, opts);
  return assemble_report(fp, st, p.beta);
}

double log_threshold_h0(double sigma, const ThresholdConstants& constants) {
  if (sigma <= 2.0) throw std::invalid_argument("threshold_h0: sigma must be > 2");
  // Computed in log space: the exponential term overflows long before the
  // formula is meaningless.
  return sigma * std::log(constants.C2) + std::log(sigma - 2.0) +
         2.0 * std::numbers::pi * constants.c1 * sigma +
         24.0 * std::numbers::pi * std::pow(constants.c0, sigma) * sigma *
             std::pow(sigma - 2.0, -4.0 - 1.0 / (sigma + 1.0));
}

double threshold_h0(double sigma, const ThresholdConstants& constants) {
  return std::exp(log_threshold_h0(sigma, constants));
}

}  // namespace kw
