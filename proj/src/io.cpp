#include "kw/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace kw {

using nlohmann::json;

void save_grid_function(const GridFunction& f, const std::string& csv_path,
                        const std::string& meta_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("save_grid_function: cannot open " + csv_path);
  csv << "x1,x2,value\n";
  csv.precision(17);
  for (Point p : f.domain().interior())
    csv << p.x1 << ',' << p.x2 << ',' << f.raw(p) << '\n';
  for (Point p : f.domain().boundary())
    csv << p.x1 << ',' << p.x2 << ',' << f.raw(p) << '\n';

  json meta{
      {"radius", f.domain().radius()},
      {"norm_kind", f.domain().norm_kind() == NormKind::euclidean_ball ? "euclidean" : "taxicab"},
      {"tail", nullptr},
      {"tail_kappa", f.tail_kappa},
  };
  if (f.tail) {
    meta["tail"] = json{
        {"kind", f.tail->kind == TailModel::Kind::log ? "log" : "log_double_log"},
        {"slope_a", f.tail->slope_a},
        {"constant_d", f.tail->constant_d},
    };
  }
  std::ofstream mf(meta_path);
  if (!mf) throw std::runtime_error("save_grid_function: cannot open " + meta_path);
  mf << meta.dump(2) << '\n';
}

GridFunction load_grid_function(const std::string& csv_path, const std::string& meta_path) {
  json meta;
  {
    std::ifstream mf(meta_path);
    if (!mf) throw std::runtime_error("load_grid_function: cannot open " + meta_path);
    mf >> meta;
  }
  NormKind kind = meta.at("norm_kind").get<std::string>() == "taxicab"
                      ? NormKind::taxicab_ball
                      : NormKind::euclidean_ball;
  GridFunction f(make_domain(meta.at("radius").get<int>(), kind));
  if (!meta.at("tail").is_null()) {
    TailModel t;
    t.kind = meta["tail"].at("kind").get<std::string>() == "log_double_log"
                 ? TailModel::Kind::log_double_log
                 : TailModel::Kind::log;
    t.slope_a = meta["tail"].at("slope_a").get<double>();
    t.constant_d = meta["tail"].at("constant_d").get<double>();
    f.tail = t;
    f.tail_kappa = meta.value("tail_kappa", 0.0);
  }
  std::ifstream csv(csv_path);
  if (!csv) throw std::runtime_error("load_grid_function: cannot open " + csv_path);
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    int x1, x2;
    double v;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &x1, &x2, &v) != 3)
      throw std::runtime_error("load_grid_function: bad row: " + line);
    f.set({x1, x2}, v);
  }
  return f;
}

json solve_report_json(const SolveReport& rep, const json& config,
                       const std::string& table_fingerprint) {
  return json{
      {"version", kVersion},
      {"config", config},
      {"table_fingerprint", table_fingerprint},
      {"kappa", rep.kappa},
      {"alpha", rep.alpha},
      {"beta", rep.beta},
      {"radius", rep.radius},
      {"iterations", rep.iterations},
      {"final_update_norm", rep.final_update_norm},
      {"total_energy", rep.total_energy},
      {"fitted_slope", rep.fitted_slope},
      {"fitted_constant_d", rep.fitted_constant_d},
      {"identity_residual", rep.identity_residual},
      {"equation_residual", rep.equation_residual},
      {"tail_fraction", rep.tail_fraction},
      {"accuracy_warning", rep.accuracy_warning},
  };
}

json decay_report_json(const DecayReport& rep) {
  return json{
      {"m", rep.m},
      {"observed_ratio_sup", rep.observed_ratio_sup},
      {"bound_constant", rep.bound_constant},
      {"witness", {rep.witness.x1, rep.witness.x2}},
  };
}

json fit_result_json(const FitResult& fit) {
  return json{
      {"model", fit.model == FitModel::log ? "log" : "log_double_log"},
      {"slope", fit.slope},
      {"intercept", fit.intercept},
      {"residual_sup", fit.residual_sup},
      {"oscillation", fit.oscillation},
      {"annulus", {fit.r_in, fit.r_out}},
  };
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json: cannot open " + path);
  out << j.dump(2) << '\n';
}

}  // namespace kw
