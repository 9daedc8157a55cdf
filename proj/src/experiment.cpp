#include "spme/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "spme/det_solver.hpp"
#include "spme/ergodics.hpp"
#include "spme/errors.hpp"
#include "spme/io.hpp"
#include "spme/monotone.hpp"

namespace spme {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json default_parameters(const std::string& subcommand) {
    if (subcommand == "simulate") return {{"x0", 0.0}, {"clip_radius", 4.0}, {"export_noise_path", false}};
    if (subcommand == "deterministic") return {{"x0", 4.0}, {"T", nullptr}};
    if (subcommand == "fixed-point") return json::object();
    if (subcommand == "contraction") return {{"n_pairs", 20}, {"n_paths", 50}, {"amplitude", 4.0}};
    if (subcommand == "occupation")
        return {{"x0", 0.0}, {"R", 4.0}, {"delta", 0.1}, {"T", 5.0}, {"n_paths", 50}};
    if (subcommand == "accessibility")
        return {{"x0", 3.0}, {"R", 4.0}, {"delta", 0.1}, {"S", "pilot"}, {"pilot_T_max", 50.0}, {"n_paths", 200}};
    if (subcommand == "lower-bound")
        return {{"x0", 3.0}, {"delta", 0.1}, {"T_list", {5.0, 10.0, 20.0}}, {"n_paths", 50}};
    if (subcommand == "e-property")
        return {{"n_pairs", 10}, {"amplitude", 3.0}, {"t_list", {0.1, 0.5, 1.0, 2.0}}, {"n_paths", 50}};
    if (subcommand == "invariant")
        return {{"x_list", {-3.0, 0.0, 3.0}}, {"T_long", 100.0}, {"burn_in", 20.0}, {"n_batches", 30},
                {"common_noise", true}};
    if (subcommand == "tube")
        return {{"S", 0.5}, {"beta_list", {1.0, 2.0, 4.0}}, {"n_samples", 10000}, {"closeness", false},
                {"x0", 0.0}, {"R", 4.0}, {"closeness_beta", 1.0}, {"closeness_S", 0.05},
                {"accept_target", 20}, {"budget", 20000}};
    return json::object();
}

template <typename T>
T param(const json& params, const char* key) {
    try {
        return params.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment.parameters.") + key + ": " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

struct Artifacts {
    fs::path dir;
    std::vector<std::string> names;

    void write(const std::string& name, const std::string& content) {
        write_file(dir / name, content);
        names.push_back(name);
    }
};

std::vector<std::pair<Field, Field>> random_pairs(const ExperimentConfig& cfg, std::size_t count, double amplitude) {
    std::vector<std::pair<Field, Field>> pairs;
    for (std::size_t p = 0; p < count; ++p) {
        pairs.emplace_back(random_field(cfg.grid, amplitude, cfg.seed, 2 * p),
                           random_field(cfg.grid, amplitude, cfg.seed, 2 * p + 1));
    }
    return pairs;
}

std::string distance_series_csv(const DetTrajectory& traj) {
    std::string out = "t,hm1_to_fixed_point,l2,linf\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out += format_double(traj.times[k]) + ',';
        out += (traj.distance_to_equilibrium.empty() ? std::string("nan")
                                                      : format_double(traj.distance_to_equilibrium[k])) + ',';
        out += format_double(norm_l2(traj.snapshots[k])) + ',';
        out += format_double(norm_linf(traj.snapshots[k])) + '\n';
    }
    return out;
}

// Runs the subcommand; returns the result object for report.json and whether
// the suite's own assertion passed.
std::pair<json, bool> execute(const std::string& sub, const ExperimentConfig& cfg, std::size_t workers,
                              Artifacts& artifacts) {
    const json& p = cfg.parameters;
    if (sub == "validate") {
        return {{{"valid", true},
                 {"min_forcing", cfg.noise.min_forcing()},
                 {"noise_trace", cfg.noise.trace()},
                 {"orthogonality_defect", cfg.noise.orthogonality_defect()},
                 {"explicit_dt_limit", cfg.solver.explicit_dt_limit(cfg.grid)}},
                true};
    }
    if (sub == "simulate") {
        const Field x0 = initial_field(p.at("x0"), cfg);
        const Trajectory traj = simulate(x0, cfg.noise, cfg.solver, param<double>(p, "clip_radius"));
        artifacts.write("series.csv", summaries_to_csv(traj.summaries));
        artifacts.write("field_initial.csv", field_to_csv(traj.snapshots.front()));
        artifacts.write("field_final.csv", field_to_csv(traj.snapshots.back()));
        if (p.value("export_noise_path", false)) {
            artifacts.write("noise_path.csv",
                            noise_path_to_csv(sample_path(cfg.noise, cfg.solver.dt, cfg.solver.n_steps(), cfg.seed)));
        }
        const StepSummary& last = traj.summaries.back();
        return {{{"steps", traj.summaries.size() - 1},
                 {"final", {{"t", last.t}, {"l2", last.l2}, {"linf", last.linf}, {"hm1", last.hm1},
                            {"excess_sq", last.excess_sq}, {"clipdist", last.clipdist}}},
                 {"final_field", to_json(traj.snapshots.back())}},
                true};
    }
    if (sub == "deterministic") {
        const Field x0 = initial_field(p.at("x0"), cfg);
        const double T = p.contains("T") && !p.at("T").is_null() ? param<double>(p, "T") : cfg.solver.T;
        const DetTrajectory traj = det_solve(x0, cfg.noise.forcing(), cfg.solver, T);
        artifacts.write("series.csv", distance_series_csv(traj));
        artifacts.write("field_final.csv", field_to_csv(traj.snapshots.back()));
        return {{{"T", T},
                 {"terminal_distance_to_fixed_point", traj.distance_to_equilibrium.back()},
                 {"final_field", to_json(traj.snapshots.back())}},
                true};
    }
    if (sub == "fixed-point") {
        const Field& g = cfg.noise.forcing();
        const Field v = inverse_laplacian(g);
        const Field u_inf = fixed_point(g);
        artifacts.write("field_u_inf.csv", field_to_csv(u_inf));
        artifacts.write("field_potential.csv", field_to_csv(v));
        const double residual = norm_linf(laplacian_apply(v) + g);
        return {{{"min_forcing", cfg.noise.min_forcing()},
                 {"max_u_inf", norm_linf(u_inf)},
                 {"poisson_residual_linf", residual},
                 {"u_inf", to_json(u_inf)}},
                true};
    }
    if (sub == "contraction") {
        const auto pairs = random_pairs(cfg, param<std::size_t>(p, "n_pairs"), param<double>(p, "amplitude"));
        const ErgodicsReport r =
            contraction_suite(pairs, cfg.noise, cfg.solver, param<std::size_t>(p, "n_paths"), workers);
        return {to_json(r), r.passed};
    }
    if (sub == "occupation") {
        OccupationSpec spec{param<double>(p, "R"), param<double>(p, "delta"), param<double>(p, "T")};
        const ErgodicsReport r = occupation_average(initial_field(p.at("x0"), cfg), spec, cfg.noise, cfg.solver,
                                                    param<std::size_t>(p, "n_paths"), workers);
        return {to_json(r), r.passed};
    }
    if (sub == "accessibility") {
        const double R = param<double>(p, "R");
        const double delta = param<double>(p, "delta");
        double S = 0.0;
        if (p.at("S").is_string()) {
            if (p.at("S").get<std::string>() != "pilot") throw ConfigError("experiment.parameters.S must be a number or \"pilot\"");
            const auto pilot = pilot_horizon(cfg.noise, cfg.solver, R, delta, param<double>(p, "pilot_T_max"));
            if (!pilot) throw NumericalError("pilot run did not settle within pilot_T_max");
            S = *pilot;
        } else {
            S = param<double>(p, "S");
        }
        ErgodicsReport r = accessibility(initial_field(p.at("x0"), cfg), cfg.noise, cfg.solver, S, delta, R,
                                         param<std::size_t>(p, "n_paths"), workers);
        return {to_json(r), r.passed};
    }
    if (sub == "lower-bound") {
        const ErgodicsReport r =
            lower_bound(initial_field(p.at("x0"), cfg), cfg.noise, cfg.solver, param<double>(p, "delta"),
                        param<std::vector<double>>(p, "T_list"), param<std::size_t>(p, "n_paths"), workers);
        return {to_json(r), r.passed};
    }
    if (sub == "e-property") {
        const auto pairs = random_pairs(cfg, param<std::size_t>(p, "n_pairs"), param<double>(p, "amplitude"));
        const std::vector<LipschitzFunctional> fs{capped_distance_functional(Field::zeros(cfg.grid))};
        const ErgodicsReport r = e_property_probe(pairs, fs, cfg.noise, cfg.solver, param<std::vector<double>>(p, "t_list"),
                                                  param<std::size_t>(p, "n_paths"), workers);
        return {to_json(r), r.passed};
    }
    if (sub == "invariant") {
        std::vector<Field> xs;
        for (const auto& spec : p.at("x_list")) xs.push_back(initial_field(spec, cfg));
        const ErgodicsReport r = empirical_invariant(xs, cfg.noise, cfg.solver, param<double>(p, "T_long"),
                                                     param<double>(p, "burn_in"), param<std::size_t>(p, "n_batches"),
                                                     param<bool>(p, "common_noise"), workers);
        return {to_json(r), r.passed};
    }
    if (sub == "tube") {
        const double S = param<double>(p, "S");
        auto betas = param<std::vector<double>>(p, "beta_list");
        std::sort(betas.begin(), betas.end());
        const auto n_samples = param<std::size_t>(p, "n_samples");
        json estimates = json::array();
        bool positive = true, monotone = true;
        double previous = -1.0;
        std::string csv = "beta,estimate,ci_low,ci_high\n";
        for (double beta : betas) {
            const ProportionEstimate e = tube_probability(cfg.noise, S, beta, cfg.solver.dt, n_samples, cfg.seed, workers);
            estimates.push_back({{"beta", beta}, {"estimate", e.estimate}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}, {"n", e.n}});
            csv += format_double(beta) + ',' + format_double(e.estimate) + ',' + format_double(e.ci_low) + ',' +
                   format_double(e.ci_high) + '\n';
            positive = positive && (beta <= 0.0 || e.ci_low > 0.0);
            monotone = monotone && e.estimate >= previous;
            previous = e.estimate;
        }
        artifacts.write("series.csv", csv);
        json result = {{"S", S}, {"probabilities", estimates}, {"positive", positive}, {"monotone_in_beta", monotone}};
        if (param<bool>(p, "closeness")) {
            const TubeClosenessReport tc = tube_closeness(
                initial_field(p.at("x0"), cfg), cfg.noise, cfg.solver, param<double>(p, "closeness_S"),
                param<double>(p, "closeness_beta"), param<double>(p, "R"), param<std::size_t>(p, "accept_target"),
                param<std::size_t>(p, "budget"), workers);
            result["closeness"] = to_json(tc);
        }
        return {result, positive && monotone};
    }
    throw ConfigError("unknown subcommand '" + sub + "'");
}

json merge(json base, const json& patch) {
    if (!patch.is_object() || !base.is_object()) return patch;
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
            base[it.key()] = merge(base[it.key()], it.value());
        } else {
            base[it.key()] = it.value();
        }
    }
    return base;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"simulate",      "deterministic", "fixed-point", "contraction",
                                                   "occupation",    "accessibility", "lower-bound", "e-property",
                                                   "invariant",     "tube",          "validate"};
    return names;
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json default_config() {
    return {{"grid", {{"n_interior", 63}}},
            {"noise", {{"K", 4}, {"decay", 1.0}, {"c", {2.0}}, {"profiles", "constant+cosine"}}},
            {"solver",
             {{"epsilon", 0.05},
              {"dt", 1e-3},
              {"T", 1.0},
              {"scheme", "implicit"},
              {"newton_tol", 1e-10},
              {"newton_max_iter", 50},
              {"save_every", 1}}},
            {"experiment", {{"name", "default"}, {"parameters", json::object()}}},
            {"seed", 1},
            {"output_dir", "out"}};
}

void apply_override(json& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

ExperimentConfig resolve_config(const json& raw) {
    if (!raw.is_object()) throw ConfigError("configuration must be a JSON object");
    json resolved = merge(default_config(), raw);
    try {
        const Grid grid(resolved.at("grid").at("n_interior").get<std::size_t>());
        const auto seed = resolved.at("seed").get<std::uint64_t>();
        SolverConfig solver = solver_config_from_json(resolved.at("solver"));
        solver.seed = seed;
        solver.validate(grid);
        NoiseModel noise = noise_model_from_json(grid, resolved.at("noise"));
        const json& exp = resolved.at("experiment");
        return ExperimentConfig{resolved,
                                grid,
                                std::move(noise),
                                solver,
                                exp.value("name", std::string("default")),
                                exp.value("parameters", json::object()),
                                seed,
                                resolved.at("output_dir").get<std::string>()};
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
}

Field initial_field(const json& spec, const ExperimentConfig& cfg) {
    try {
        if (spec.is_number()) return Field::constant(cfg.grid, spec.get<double>());
        const std::string type = spec.at("type").get<std::string>();
        if (type == "constant") return Field::constant(cfg.grid, spec.at("value").get<double>());
        if (type == "random") {
            return random_field(cfg.grid, spec.at("amplitude").get<double>(), spec.value("seed", cfg.seed),
                                spec.value("stream", std::uint64_t{0}));
        }
        if (type == "fixed_point") return fixed_point(cfg.noise.forcing());
        if (type == "values") return Field(cfg.grid, spec.at("values").get<std::vector<double>>());
        throw ConfigError("unknown initial condition type '" + type + "'");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed initial condition: ") + e.what());
    }
}

int run(const RunOptions& options, std::ostream& log) {
    const auto& subs = subcommands();
    if (std::find(subs.begin(), subs.end(), options.subcommand) == subs.end()) {
        log << "error: unknown subcommand '" << options.subcommand << "'\n";
        return kExitUsage;
    }
    const auto started = std::chrono::steady_clock::now();
    try {
        json raw = json::object();
        if (options.config_path) {
            std::ifstream in(*options.config_path);
            if (!in) throw ConfigError("cannot read config file " + *options.config_path);
            raw = json::parse(in, nullptr, false);
            if (raw.is_discarded()) throw ConfigError("config file " + *options.config_path + " is not valid JSON");
        }
        // Subcommand defaults sit underneath whatever the file provides.
        json layered = {{"experiment", {{"name", options.subcommand}, {"parameters", default_parameters(options.subcommand)}}}};
        layered = merge(layered, raw);
        for (const auto& o : options.overrides) apply_override(layered, o);
        if (options.output_dir) layered["output_dir"] = *options.output_dir;

        const ExperimentConfig cfg = resolve_config(layered);
        if (options.workers == 0) throw ConfigError("--workers must be at least 1");

        Artifacts artifacts{fs::path(cfg.output_dir), {}};
        fs::create_directories(artifacts.dir);
        // The destination directory is not part of the experiment's identity, so
        // reruns into different directories hash and report identically.
        json identity = cfg.resolved;
        identity.erase("output_dir");
        const std::string config_hash = fnv1a_hex(identity.dump());

        auto [result, passed] = execute(options.subcommand, cfg, options.workers, artifacts);

        const json report = {{"subcommand", options.subcommand},
                             {"config_hash", config_hash},
                             {"config", identity},
                             {"passed", passed},
                             {"result", result}};
        artifacts.write("report.json", report.dump(2) + "\n");

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const json manifest = {{"subcommand", options.subcommand},
                               {"config_hash", config_hash},
                               {"seed", cfg.seed},
                               {"version", kVersion},
                               {"workers", options.workers},
                               {"wall_time_s", wall},
                               {"artifacts", artifacts.names},
                               {"output_dir", cfg.output_dir},
                               {"config", identity}};
        write_file(artifacts.dir / "manifest.json", manifest.dump(2) + "\n");

        log << options.subcommand << ": " << (passed ? "ok" : "assertion failed") << " (" << artifacts.dir.string()
            << ")\n";
        return passed ? kExitOk : kExitAssertion;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        log << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const json::exception& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace spme
