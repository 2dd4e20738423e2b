#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kw/absorption.hpp"
#include "kw/analysis.hpp"
#include "kw/convolution.hpp"
#include "kw/dirichlet.hpp"
#include "kw/greens.hpp"
#include "kw/io.hpp"
#include "kw/source.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgs = 2;
constexpr int kExitNonconvergence = 3;
constexpr int kExitConsistency = 4;

std::string cache_dir() {
  if (const char* env = std::getenv("KW_CACHE_DIR")) return env;
  return "kw_cache";
}

struct CommonOpts {
  std::string out_dir = "out";
  int table_radius = 128;
  int quad = 2048;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--out", c.out_dir, "Output directory for reports");
  cmd->add_option("--table-radius", c.table_radius, "Exact radius of the Green's table");
  cmd->add_option("--quad", c.quad, "Quadrature points for the table build");
}

kw::GreensTable table_for(const CommonOpts& c) {
  return kw::cached_greens_table(c.table_radius, c.quad, cache_dir());
}

void emit(const json& j, const CommonOpts& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  kw::write_json(j, c.out_dir + "/" + name);
}

struct IterFlags {
  double tol = 1e-8;
  long max_iter = 600;
  double damping = 0.5;
  int patience = 12;
};

void add_iter(CLI::App* cmd, IterFlags& f) {
  cmd->add_option("--tol", f.tol, "Fixed-point update tolerance");
  cmd->add_option("--max-iter", f.max_iter, "Iteration cap");
  cmd->add_option("--damping", f.damping, "Picard relaxation factor");
  cmd->add_option("--patience", f.patience, "Divergence patience");
}

kw::IterationOptions to_options(const IterFlags& f) {
  kw::IterationOptions o;
  o.tol = f.tol;
  o.max_iterations = f.max_iter;
  o.damping = f.damping;
  o.patience = f.patience;
  return o;
}

json config_json(const CommonOpts& c, const IterFlags& it) {
  return json{{"table_radius", c.table_radius}, {"quad", c.quad},
              {"tol", it.tol},                  {"max_iter", it.max_iter},
              {"damping", it.damping},          {"patience", it.patience}};
}

// alpha from either --alpha or --sigma (sigma = alpha kappa / 2pi).
double resolve_alpha(double alpha, double sigma, double kappa) {
  if (alpha > 0.0 && sigma > 0.0)
    throw CLI::ValidationError("give either --alpha or --sigma, not both");
  if (sigma > 0.0) return 2.0 * std::numbers::pi * sigma / kappa;
  if (alpha > 0.0) return alpha;
  throw CLI::ValidationError("one of --alpha or --sigma is required");
}

int run_greens_check(const CommonOpts& c) {
  kw::GreensTable t = table_for(c);
  bool ok = true;
  auto expect = [&](const char* what, double got, double want, double tol) {
    bool pass = std::abs(got - want) <= tol;
    std::cout << (pass ? "ok   " : "FAIL ") << what << " got " << got
              << " want " << want << "\n";
    ok = ok && pass;
  };
  expect("phi0(0,0)", t.eval({0, 0}), 0.0, 0.0);
  expect("phi0(1,0)", t.eval({1, 0}), -0.25, 0.0);
  expect("phi0(1,1)", t.eval({1, 1}), -1.0 / std::numbers::pi, 1e-6);
  expect("phi0(2,0)", t.eval({2, 0}), -1.0 + 2.0 / std::numbers::pi, 1e-6);
  double worst = 0.0;
  for (int x1 = -(t.exact_radius() - 1); x1 < t.exact_radius(); ++x1)
    for (int x2 = -(t.exact_radius() - 1); x2 < t.exact_radius(); ++x2) {
      double lap = -4.0 * t.exact_value({x1, x2});
      lap += t.exact_value({x1 + 1, x2});
      lap += t.exact_value({x1 - 1, x2});
      lap += t.exact_value({x1, x2 + 1});
      lap += t.exact_value({x1, x2 - 1});
      double want = (x1 == 0 && x2 == 0) ? -1.0 : 0.0;
      worst = std::max(worst, std::abs(lap - want));
    }
  expect("defining equation residual", worst, 0.0, 1e-10);
  std::cout << "fitted constant " << t.fitted_constant() << " (candidates "
            << kw::GreensTable::gamma0() / 2.0 << ", "
            << kw::GreensTable::classical_constant() << "), crossover "
            << t.crossover_radius() << ", seam " << t.seam_error() << "\n";
  emit(json{{"version", kw::kVersion},
            {"fingerprint", t.fingerprint()},
            {"fitted_constant", t.fitted_constant()},
            {"gamma0_half", kw::GreensTable::gamma0() / 2.0},
            {"classical_constant", kw::GreensTable::classical_constant()},
            {"crossover_radius", t.crossover_radius()},
            {"seam_error", t.seam_error()},
            {"pass", ok}},
       c, "greens_check.json");
  return ok ? kExitOk : kExitConsistency;
}

void write_solution(const kw::SolveReport& rep, const CommonOpts& c, const std::string& stem) {
  fs::create_directories(c.out_dir);
  kw::save_grid_function(rep.solution, c.out_dir + "/" + stem + ".csv",
                         c.out_dir + "/" + stem + ".meta.json");
}

int run_verify_decay(const CommonOpts& c, int count, unsigned seed) {
  kw::GreensTable t = table_for(c);
  auto domain = kw::make_domain(200);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  bool ok = true;
  json runs = json::array();
  for (int k = 0; k < count; ++k) {
    double m = std::vector<double>{3.0, 4.0, 6.0}[std::size_t(k % 3)];
    kw::GridFunction f(domain);
    kw::CompensatedSum mass;
    for (int x1 = -5; x1 <= 5; ++x1)
      for (int x2 = -5; x2 <= 5; ++x2) {
        double v = unif(rng);
        f.set({x1, x2}, v);
        mass.add(v);
      }
    f.set({0, 0}, f.raw({0, 0}) - mass.value());
    kw::DecayReport rep = kw::mean_zero_decay_check(t, f, m);
    // Bounded envelope ratio, and no growth from mid radii to the edge.
    double inner = 0.0, outer = 0.0;
    kw::GridFunction g = kw::convolve(t, f);
    for (kw::Point p : domain->interior()) {
      double r = kw::norm(p);
      double ratio = std::abs(g.raw(p)) / kw::decay_envelope(p, m);
      if (r >= 50.0 && r < 125.0) inner = std::max(inner, ratio);
      if (r >= 125.0 && r <= 200.0) outer = std::max(outer, ratio);
    }
    bool pass = std::isfinite(rep.observed_ratio_sup) && outer <= inner * 1.05;
    ok = ok && pass;
    json jr = kw::decay_report_json(rep);
    jr["ratio_50_125"] = inner;
    jr["ratio_125_200"] = outer;
    jr["pass"] = pass;
    runs.push_back(jr);
  }
  emit(json{{"version", kw::kVersion}, {"runs", runs}, {"pass", ok}}, c, "verify_decay.json");
  std::cout << (ok ? "decay checks passed\n" : "decay checks FAILED\n");
  return ok ? kExitOk : kExitConsistency;
}

int run_verify_maxprinciple(const CommonOpts& c, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_int_distribution<int> radius_pick(4, 12);
  bool ok = true;
  for (int k = 0; k < count; ++k) {
    auto d = kw::make_domain(radius_pick(rng));
    kw::DirichletProblem p(d);
    kw::GridFunction coeff(d);
    for (kw::Point x : d->interior()) {
      p.rhs.set(x, std::abs(unif(rng)));  // nonnegative rhs
      coeff.set(x, std::abs(unif(rng)));
    }
    for (kw::Point q : d->boundary()) p.boundary.set(q, std::abs(unif(rng)));
    p.coeff = &coeff;
    kw::GridFunction u = kw::solve_dirichlet(p);
    if (!kw::maximum_principle_check(u, coeff, *d, 1e-9)) ok = false;
  }
  std::cout << (ok ? "maximum principle holds\n" : "maximum principle FAILED\n");
  emit(json{{"version", kw::kVersion}, {"instances", count}, {"pass", ok}}, c,
       "verify_maxprinciple.json");
  return ok ? kExitOk : kExitConsistency;
}

int run_verify_barrier(const CommonOpts& c) {
  kw::BarrierScan scan = kw::find_m0();
  bool ok = scan.m0 >= 10 && scan.m0 <= 100;
  std::cout << "m0 = " << scan.m0 << ", d0 = " << scan.d0 << "\n";
  emit(json{{"version", kw::kVersion}, {"m0", scan.m0}, {"d0", scan.d0}, {"pass", ok}},
       c, "verify_barrier.json");
  return ok ? kExitOk : kExitConsistency;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice solver for -Delta u = eps e^{ku} + beta delta_0 on Z^2"};
  app.require_subcommand(1);
  app.set_config("--config");

  CommonOpts common;
  IterFlags iter;

  // greens build | check
  auto* greens = app.add_subcommand("greens", "Green's table construction and checks");
  greens->require_subcommand(1);
  auto* gbuild = greens->add_subcommand("build", "Build (and cache) a table");
  auto* gcheck = greens->add_subcommand("check", "Build and verify table invariants");
  int gradius = 128;
  gbuild->add_option("--radius", gradius, "Exact radius");
  gcheck->add_option("--radius", gradius, "Exact radius");
  add_common(gbuild, common);
  add_common(gcheck, common);

  // solve source | absorption | extremal
  auto* solve = app.add_subcommand("solve", "Run a solver");
  solve->require_subcommand(1);
  double kappa = 0.0, alpha = 0.0, sigma = 0.0, beta = 0.0;
  int radius = 256;
  auto add_params = [&](CLI::App* cmd, bool want_alpha) {
    cmd->add_option("--kappa", kappa, "Nonlinearity strength")->required();
    cmd->add_option("--beta", beta, "Dirac mass at the origin")->required();
    if (want_alpha) {
      cmd->add_option("--alpha", alpha, "Total mass parameter");
      cmd->add_option("--sigma", sigma, "alpha kappa / 2pi (alternative to --alpha)");
    }
    cmd->add_option("--radius", radius, "Truncation radius");
    add_common(cmd, common);
    add_iter(cmd, iter);
  };
  auto* ssource = solve->add_subcommand("source", "-Delta u = e^{ku} + beta delta_0");
  auto* sabs = solve->add_subcommand("absorption", "-Delta u + e^{ku} = beta delta_0");
  auto* sext = solve->add_subcommand("extremal", "Extremal absorption solution");
  add_params(ssource, true);
  add_params(sabs, true);
  add_params(sext, false);

  // sweep alpha|beta|kappa
  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps");
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::string sweep_case = "source";
  sweep->add_option("param", sweep_param, "alpha, beta, or kappa")->required();
  sweep->add_option("--values", sweep_values, "Swept values")->required()->delimiter(',');
  sweep->add_option("--case", sweep_case, "source or absorption");
  sweep->add_option("--kappa", kappa, "Base kappa");
  sweep->add_option("--alpha", alpha, "Base alpha");
  sweep->add_option("--beta", beta, "Base beta");
  sweep->add_option("--radius", radius, "Truncation radius");
  int sweep_jobs = 1;
  sweep->add_option("--jobs", sweep_jobs, "Accepted for compatibility; runs are sequential");
  add_common(sweep, common);
  add_iter(sweep, iter);

  // verify decay|maxprinciple|layers|barrier
  auto* verify = app.add_subcommand("verify", "Verification suites");
  verify->require_subcommand(1);
  auto* vdecay = verify->add_subcommand("decay", "Mean-zero decay estimate");
  auto* vmax = verify->add_subcommand("maxprinciple", "Maximum principle suite");
  auto* vlayers = verify->add_subcommand("layers", "Absorption layer structure");
  auto* vbarrier = verify->add_subcommand("barrier", "Barrier inequality");
  int count = 20;
  unsigned seed = 20240817;
  vdecay->add_option("--count", count, "Number of random inputs");
  vdecay->add_option("--seed", seed, "RNG seed");
  add_common(vdecay, common);
  vmax->add_option("--count", count, "Number of instances");
  vmax->add_option("--seed", seed, "RNG seed");
  add_common(vmax, common);
  std::vector<double> layer_alphas;
  vlayers->add_option("--kappa", kappa, "kappa")->required();
  vlayers->add_option("--beta", beta, "beta")->required();
  vlayers->add_option("--alphas", layer_alphas, "Increasing alphas")->required()->delimiter(',');
  vlayers->add_option("--radius", radius, "Truncation radius");
  add_common(vlayers, common);
  add_iter(vlayers, iter);
  add_common(vbarrier, common);

  // scan thresholds
  auto* scan = app.add_subcommand("scan", "Threshold scans");
  auto* sthresh = scan->add_subcommand("thresholds", "h0 over a sigma grid");
  double c0 = 1.0, c1 = 1.0, C2 = 1.0, sig_lo = 2.05, sig_hi = 20.0, sig_step = 0.05;
  sthresh->add_option("--c0", c0, "Measured c0");
  sthresh->add_option("--c1", c1, "Measured c1");
  sthresh->add_option("--C2", C2, "Measured C2");
  sthresh->add_option("--sigma-min", sig_lo, "Grid start (> 2)");
  sthresh->add_option("--sigma-max", sig_hi, "Grid end");
  sthresh->add_option("--sigma-step", sig_step, "Grid step");
  add_common(sthresh, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gbuild->parsed()) {
      kw::GreensTable t = kw::cached_greens_table(gradius, common.quad, cache_dir());
      std::cout << t.fingerprint() << "\n";
      return kExitOk;
    }
    if (gcheck->parsed()) {
      common.table_radius = gradius;
      return run_greens_check(common);
    }

    if (ssource->parsed()) {
      kw::SourceProblem p;
      p.kappa = kappa;
      p.alpha = resolve_alpha(alpha, sigma, kappa);
      p.beta = beta;
      p.domain_radius = radius;
      kw::GreensTable t = table_for(common);
      kw::SolveReport rep = kw::solve_source(p, t, to_options(iter));
      emit(kw::solve_report_json(rep, config_json(common, iter), t.fingerprint()),
           common, "solve_source.json");
      write_solution(rep, common, "solution_source");
      std::cout << "energy " << rep.total_energy << " target " << p.alpha - p.beta
                << " slope " << rep.fitted_slope << "\n";
      return kExitOk;
    }
    if (sabs->parsed()) {
      kw::AbsorptionProblem p;
      p.kappa = kappa;
      p.alpha = resolve_alpha(alpha, sigma, kappa);
      p.beta = beta;
      p.domain_radius = radius;
      kw::GreensTable t = table_for(common);
      kw::SolveReport rep = kw::solve_absorption(p, t, to_options(iter));
      emit(kw::solve_report_json(rep, config_json(common, iter), t.fingerprint()),
           common, "solve_absorption.json");
      write_solution(rep, common, "solution_absorption");
      std::cout << "energy " << rep.total_energy << " target " << p.beta - p.alpha
                << " slope " << rep.fitted_slope << "\n";
      return kExitOk;
    }
    if (sext->parsed()) {
      kw::GreensTable t = table_for(common);
      kw::ExtremalReport rep = kw::solve_extremal(kappa, beta, radius, t, to_options(iter));
      json j = kw::solve_report_json(rep.base, config_json(common, iter), t.fingerprint());
      j["d1"] = rep.d1;
      j["d2"] = rep.d2;
      j["m0"] = rep.m0;
      j["n0"] = rep.n0;
      j["double_log_oscillation"] = rep.double_log_oscillation;
      emit(j, common, "solve_extremal.json");
      write_solution(rep.base, common, "solution_extremal");
      fs::create_directories(common.out_dir);
      std::ofstream gaps(common.out_dir + "/extremal_gaps.csv");
      gaps << "n,gap\n";
      for (std::size_t i = 0; i < rep.iterate_gaps.size(); ++i)
        gaps << i + 1 << ',' << rep.iterate_gaps[i] << '\n';
      std::cout << "energy " << rep.base.total_energy << " target "
                << beta - 4.0 * std::numbers::pi / kappa << "\n";
      return kExitOk;
    }

    if (sweep->parsed()) {
      kw::GreensTable t = table_for(common);
      json runs = json::array();
      for (double v : sweep_values) {
        double ka = kappa, al = alpha, be = beta;
        if (sweep_param == "alpha")
          al = v;
        else if (sweep_param == "beta")
          be = v;
        else if (sweep_param == "kappa")
          ka = v;
        else
          throw CLI::ValidationError("sweep param must be alpha, beta, or kappa");
        auto run_one = [&]() {
          if (sweep_case == "source") {
            kw::SourceProblem p;
            p.kappa = ka;
            p.alpha = al;
            p.beta = be;
            p.domain_radius = radius;
            return kw::solve_source(p, t, to_options(iter));
          }
          kw::AbsorptionProblem p;
          p.kappa = ka;
          p.alpha = al;
          p.beta = be;
          p.domain_radius = radius;
          return kw::solve_absorption(p, t, to_options(iter));
        };
        runs.push_back(kw::solve_report_json(run_one(), config_json(common, iter), t.fingerprint()));
      }
      emit(json{{"param", sweep_param}, {"runs", runs}}, common, "sweep.json");
      return kExitOk;
    }

    if (vdecay->parsed()) return run_verify_decay(common, count, seed);
    if (vmax->parsed()) return run_verify_maxprinciple(common, count, seed);
    if (vbarrier->parsed()) return run_verify_barrier(common);
    if (vlayers->parsed()) {
      kw::GreensTable t = table_for(common);
      std::vector<kw::SolveReport> reports;
      for (double a : layer_alphas) {
        kw::AbsorptionProblem p;
        p.kappa = kappa;
        p.beta = beta;
        p.alpha = a;
        p.domain_radius = radius;
        reports.push_back(kw::solve_absorption(p, t, to_options(iter)));
      }
      bool ok = kw::layer_structure_check(reports, iter.tol);
      json runs = json::array();
      for (const auto& r : reports)
        runs.push_back(kw::solve_report_json(r, config_json(common, iter), t.fingerprint()));
      emit(json{{"runs", runs}, {"pass", ok}}, common, "verify_layers.json");
      std::cout << (ok ? "layer structure holds\n" : "layer structure FAILED\n");
      return ok ? kExitOk : kExitConsistency;
    }

    if (sthresh->parsed()) {
      std::vector<double> grid;
      for (double s = sig_lo; s <= sig_hi + 1e-12; s += sig_step) grid.push_back(s);
      kw::ThresholdScan sc =
          kw::admissible_region_scan({c0, c1, C2}, grid);
      fs::create_directories(common.out_dir);
      kw::write_threshold_csv(sc, common.out_dir + "/thresholds.csv");
      json kb = json::array();
      for (auto [eps, v] : sc.kappa_bar) kb.push_back({{"epsilon", eps}, {"value", v}});
      emit(json{{"kappa_star", sc.kappa_star},
                {"a0", sc.a0},
                {"kappa_bar", kb},
                {"kappa_bar_below_star", sc.kappa_bar_below_star}},
           common, "scan_thresholds.json");
      std::cout << "kappa* " << sc.kappa_star << " at sigma " << sc.a0 << "\n";
      return kExitOk;
    }
  } catch (const kw::NonconvergenceError& e) {
    std::cerr << "nonconvergence: " << e.what() << "\n";
    return kExitNonconvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return kExitArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConsistency;
  }
  return kExitArgs;
}
