#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "spme/det_solver.hpp"
#include "spme/grid.hpp"
#include "spme/noise.hpp"
#include "spme/sde_solver.hpp"

namespace spme {

struct ErgodicsReport;

// Shortest round-trip decimal representation.
std::string format_double(double v);

// Fields: {"n_interior": n, "values": [...]} and CSV rows "x,value".
nlohmann::json to_json(const Field& u);
Field field_from_json(const nlohmann::json& j);
std::string field_to_csv(const Field& u);

// {"K": int, "decay": real, "c": [...], "profiles": "constant+cosine"}
nlohmann::json to_json(const NoiseModel& model);
NoiseModel noise_model_from_json(const Grid& grid, const nlohmann::json& j);

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);
nlohmann::json to_json(const SolverConfig& cfg);
/// Fields missing from j keep their value in `base`.
SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base = {});

/// Header "t,l2,linf,hm1,excess_sq,clipdist".
std::string summaries_to_csv(const std::vector<StepSummary>& summaries);
/// Rows "t,node,value" of the cumulative path W^B(t_n).
std::string noise_path_to_csv(const NoisePath& path);

nlohmann::json to_json(const ErgodicsReport& report);
/// {"beta", "accepted", "distances", "slope_estimate"} for the top level plus per-level detail.
nlohmann::json to_json(const TubeClosenessReport& report);
nlohmann::json to_json(const ComparisonReport& report);

}  // namespace spme
