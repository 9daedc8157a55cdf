#include "spme/io.hpp"

#include <charconv>
#include <sstream>

#include "spme/ergodics.hpp"
#include "spme/errors.hpp"

namespace spme {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::json to_json(const Field& u) {
    return {{"n_interior", u.size()}, {"values", std::vector<double>(u.values().begin(), u.values().end())}};
}

Field field_from_json(const nlohmann::json& j) {
    const auto n = j.at("n_interior").get<std::size_t>();
    return Field(Grid(n), j.at("values").get<std::vector<double>>());
}

std::string field_to_csv(const Field& u) {
    std::string out = "x,value\n";
    for (std::size_t i = 0; i < u.size(); ++i) {
        out += format_double(u.grid().node(i));
        out += ',';
        out += format_double(u[i]);
        out += '\n';
    }
    return out;
}

nlohmann::json to_json(const NoiseModel& model) {
    return {{"K", model.truncation()},
            {"decay", model.decay()},
            {"c", std::vector<double>(model.forcing_coeffs().begin(), model.forcing_coeffs().end())},
            {"profiles", model.profile_family()}};
}

NoiseModel noise_model_from_json(const Grid& grid, const nlohmann::json& j) {
    const std::string profiles = j.value("profiles", std::string("constant+cosine"));
    if (profiles != "constant+cosine") throw ConfigError("unsupported noise profile family '" + profiles + "'");
    const auto c = j.value("c", std::vector<double>{2.0});
    if (c.size() != 1) throw ConfigError("the constant+cosine family takes exactly one forcing coefficient");
    return default_model(grid, j.value("K", std::size_t{4}), j.value("decay", 1.0), c.front());
}

std::string scheme_name(Scheme s) { return s == Scheme::Implicit ? "implicit" : "explicit"; }

Scheme parse_scheme(const std::string& name) {
    if (name == "implicit") return Scheme::Implicit;
    if (name == "explicit") return Scheme::Explicit;
    throw ConfigError("unknown scheme '" + name + "' (expected implicit or explicit)");
}

nlohmann::json to_json(const SolverConfig& cfg) {
    return {{"epsilon", cfg.epsilon},
            {"dt", cfg.dt},
            {"T", cfg.T},
            {"scheme", scheme_name(cfg.scheme)},
            {"newton_tol", cfg.newton_tol},
            {"newton_max_iter", cfg.newton_max_iter},
            {"save_every", cfg.save_every},
            {"seed", cfg.seed}};
}

SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base) {
    base.epsilon = j.value("epsilon", base.epsilon);
    base.dt = j.value("dt", base.dt);
    base.T = j.value("T", base.T);
    if (j.contains("scheme")) base.scheme = parse_scheme(j.at("scheme").get<std::string>());
    base.newton_tol = j.value("newton_tol", base.newton_tol);
    base.newton_max_iter = j.value("newton_max_iter", base.newton_max_iter);
    base.save_every = j.value("save_every", base.save_every);
    base.seed = j.value("seed", base.seed);
    return base;
}

std::string summaries_to_csv(const std::vector<StepSummary>& summaries) {
    std::string out = "t,l2,linf,hm1,excess_sq,clipdist\n";
    for (const auto& s : summaries) {
        for (double v : {s.t, s.l2, s.linf, s.hm1, s.excess_sq}) {
            out += format_double(v);
            out += ',';
        }
        out += format_double(s.clipdist);
        out += '\n';
    }
    return out;
}

std::string noise_path_to_csv(const NoisePath& path) {
    std::string out = "t,node,value\n";
    for (std::size_t n = 0; n < path.cumulative.size(); ++n) {
        const Field& w = path.cumulative[n];
        for (std::size_t i = 0; i < w.size(); ++i) {
            out += format_double(path.times[n]);
            out += ',';
            out += std::to_string(i + 1);
            out += ',';
            out += format_double(w[i]);
            out += '\n';
        }
    }
    return out;
}

nlohmann::json to_json(const ErgodicsReport& report) {
    return {{"suite", report.suite},       {"estimate", report.estimate},
            {"ci_low", report.ci_low},     {"ci_high", report.ci_high},
            {"n_paths", report.n_paths},   {"n_timepoints", report.n_timepoints},
            {"passed", report.passed},     {"details", report.details},
            {"config", report.config}};
}

nlohmann::json to_json(const TubeClosenessReport& report) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : report.levels) {
        levels.push_back({{"beta", l.beta},
                          {"attempts", l.attempts},
                          {"accepted", l.accepted},
                          {"distances", l.distances},
                          {"mean_distance", l.mean_distance}});
    }
    const TubeLevel top = report.levels.empty() ? TubeLevel{} : report.levels.front();
    return {{"beta", top.beta},
            {"accepted", top.accepted},
            {"distances", top.distances},
            {"slope_estimate", report.slope_estimate},
            {"conclusive", report.conclusive},
            {"levels", levels}};
}

nlohmann::json to_json(const ComparisonReport& report) {
    nlohmann::json j = {{"passed", report.passed}, {"checked_times", report.checked_times}};
    if (report.first_violation) {
        j["first_violation"] = {{"t", report.first_violation->t},
                                {"node", report.first_violation->node},
                                {"gap", report.first_violation->gap}};
    } else {
        j["first_violation"] = nullptr;
    }
    return j;
}

}  // namespace spme
