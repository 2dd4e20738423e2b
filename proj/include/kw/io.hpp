#pragma once

#include <string>

#include <json.hpp>

#include "kw/analysis.hpp"
#include "kw/convolution.hpp"
#include "kw/report.hpp"

namespace kw {

inline constexpr const char* kVersion = "0.1.0";

/// Solution dump: CSV rows x1,x2,value over stored points, JSON sidecar
/// with the domain shape and tail model.
void save_grid_function(const GridFunction& f, const std::string& csv_path,
                        const std::string& meta_path);
GridFunction load_grid_function(const std::string& csv_path, const std::string& meta_path);

nlohmann::json solve_report_json(const SolveReport& rep, const nlohmann::json& config,
                                 const std::string& table_fingerprint);
nlohmann::json decay_report_json(const DecayReport& rep);
nlohmann::json fit_result_json(const FitResult& fit);

void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace kw
