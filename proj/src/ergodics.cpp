#include "spme/ergodics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spme/det_solver.hpp"
#include "spme/errors.hpp"
#include "spme/io.hpp"
#include "spme/parallel.hpp"
#include "spme/rng.hpp"

namespace spme {

namespace {

constexpr double kContractionSlack = 1e-8;

void fill_interval(ErgodicsReport& r, const ProportionEstimate& p) {
    r.estimate = p.estimate;
    r.ci_low = p.ci_low;
    r.ci_high = p.ci_high;
}

double proportion_se(double p, std::size_t n) {
    return n == 0 ? 0.0 : std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

}  // namespace

void OccupationSpec::validate() const {
    if (!(R > 3.0)) throw ConfigError("occupation radius R must exceed 3");
    if (!(delta > 0.0)) throw ConfigError("occupation width delta must be positive");
    if (!(T > 1.0)) throw ConfigError("occupation horizon T must exceed 1");
}

Field random_field(const Grid& grid, double amplitude, std::uint64_t seed, std::uint64_t stream) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = amplitude * (2.0 * rng::uniform(seed, stream, i) - 1.0);
    return Field(grid, std::move(v));
}

ErgodicsReport contraction_suite(const std::vector<std::pair<Field, Field>>& pairs, const NoiseModel& model,
                                 const SolverConfig& cfg, std::size_t n_paths, std::size_t workers) {
    cfg.validate(model.grid());
    const std::size_t n_steps = cfg.n_steps();

    struct CellResult {
        int terminal_ok = 0;
        std::size_t monotone_steps = 0;
        double worst_step_increase = 0.0;
        double terminal_ratio = 0.0;
    };
    const std::size_t n_cells = pairs.size() * n_paths;
    const auto cells = parallel_map(n_cells, workers, [&](std::size_t idx) {
        const auto& [x0, y0] = pairs[idx / n_paths];
        const std::uint64_t seed = rng::sample_seed(cfg.seed, idx % n_paths);
        PathIntegrator a(x0, model, cfg, seed);
        PathIntegrator b(y0, model, cfg, seed);
        const double d0 = norm_hminus1(x0 - y0);
        double prev = d0;
        CellResult res;
        for (std::size_t n = 0; n < n_steps; ++n) {
            const Field dW = a.next_increment();
            a.advance_with(dW);
            b.advance_with(dW);
            const double d = norm_hminus1(a.state() - b.state());
            if (d <= prev + kContractionSlack) ++res.monotone_steps;
            res.worst_step_increase = std::max(res.worst_step_increase, d - prev);
            prev = d;
        }
        res.terminal_ok = prev <= d0 + kContractionSlack ? 1 : 0;
        res.terminal_ratio = d0 > 0.0 ? prev / d0 : 0.0;
        return res;
    });

    std::size_t ok = 0, monotone = 0;
    double worst_increase = 0.0, worst_ratio = 0.0;
    for (const auto& c : cells) {
        ok += static_cast<std::size_t>(c.terminal_ok);
        monotone += c.monotone_steps;
        worst_increase = std::max(worst_increase, c.worst_step_increase);
        worst_ratio = std::max(worst_ratio, c.terminal_ratio);
    }
    const std::size_t total_steps = n_cells * n_steps;
    const double monotone_fraction =
        total_steps == 0 ? 1.0 : static_cast<double>(monotone) / static_cast<double>(total_steps);

    ErgodicsReport r;
    r.suite = "contraction";
    fill_interval(r, wilson_from_counts(ok, n_cells));
    r.n_paths = n_cells;
    r.n_timepoints = n_steps;
    r.passed = ok == n_cells && monotone_fraction >= 0.99;
    r.details = {{"terminal_contractions", ok},
                 {"cases", n_cells},
                 {"pairs", pairs.size()},
                 {"paths_per_pair", n_paths},
                 {"step_monotone_fraction", monotone_fraction},
                 {"max_step_increase", worst_increase},
                 {"max_terminal_ratio", worst_ratio},
                 {"slack", kContractionSlack}};
    r.config = {{"solver", to_json(cfg)}, {"noise", to_json(model)}};
    return r;
}

ErgodicsReport occupation_average(const Field& x0, const OccupationSpec& spec, const NoiseModel& model,
                                  const SolverConfig& cfg, std::size_t n_paths, std::size_t workers) {
    spec.validate();
    SolverConfig run_cfg = cfg;
    run_cfg.T = spec.T;
    run_cfg.validate(model.grid());
    const std::size_t n_steps = run_cfg.n_steps();

    struct PathResult {
        double fraction = 0.0;
        double excess_mean = 0.0;
        std::size_t points = 0;
    };
    const auto paths = parallel_map(n_paths, workers, [&](std::size_t j) {
        PathIntegrator path(x0, model, run_cfg, rng::sample_seed(run_cfg.seed, j));
        std::size_t inside = 0, points = 0;
        std::vector<double> excess;
        for (std::size_t n = 0; n < n_steps; ++n) {
            if (n % run_cfg.save_every == 0) {
                const Field& X = path.state();
                ++points;
                if (clip_distance(X, spec.R) < spec.delta) ++inside;
                const double e = std::max(0.0, norm_linf(X) - 1.0);
                excess.push_back(e * e);
            }
            path.advance();
        }
        PathResult res;
        res.points = points;
        res.fraction = points ? static_cast<double>(inside) / static_cast<double>(points) : 0.0;
        res.excess_mean = points ? pairwise_sum(excess) / static_cast<double>(points) : 0.0;
        return res;
    });

    std::vector<double> fractions, excess;
    for (const auto& p : paths) {
        fractions.push_back(p.fraction);
        excess.push_back(p.excess_mean);
    }
    const MeanEstimate frac = mean_with_error(fractions);
    const MeanEstimate exc = mean_with_error(excess);

    ErgodicsReport r;
    r.suite = "occupation";
    fill_interval(r, wilson_interval(frac.mean, n_paths));
    r.n_paths = n_paths;
    r.n_timepoints = paths.empty() ? 0 : paths.front().points;
    r.passed = r.ci_low > 0.0;
    r.details = {{"fraction_std_error", frac.std_error},
                 {"excess_sq_time_mean", exc.mean},
                 {"excess_sq_time_mean_std_error", exc.std_error}};
    r.config = {{"R", spec.R}, {"delta", spec.delta}, {"T", spec.T},
                {"solver", to_json(run_cfg)}, {"noise", to_json(model)}, {"x0", to_json(x0)}};
    return r;
}

std::optional<double> pilot_horizon(const NoiseModel& model, const SolverConfig& cfg, double R, double delta,
                                    double T_max) {
    return settling_time(model.forcing(), cfg, R, delta / 8.0, T_max);
}

ErgodicsReport accessibility(const Field& x0, const NoiseModel& model, const SolverConfig& cfg, double S,
                             double delta, double R, std::size_t n_paths, std::size_t workers) {
    if (!(delta > 0.0)) throw ConfigError("accessibility needs delta > 0");
    if (!(clip_distance(x0, R) < delta)) {
        throw ConfigError("accessibility requires clip_distance(x0, R) < delta");
    }
    model.require_nondegenerate();
    SolverConfig run_cfg = cfg;
    run_cfg.T = S;
    run_cfg.validate(model.grid());
    const std::size_t n_steps = steps_for(S, run_cfg.dt);
    const Field target = fixed_point(model.forcing());

    const auto distances = parallel_map(n_paths, workers, [&](std::size_t j) {
        PathIntegrator path(x0, model, run_cfg, rng::sample_seed(run_cfg.seed, j));
        for (std::size_t n = 0; n < n_steps; ++n) path.advance();
        return norm_hminus1(path.state() - target);
    });
    std::size_t hits = 0;
    for (double d : distances) hits += d < 2.0 * delta ? 1 : 0;

    ErgodicsReport r;
    r.suite = "accessibility";
    fill_interval(r, wilson_from_counts(hits, n_paths));
    r.n_paths = n_paths;
    r.n_timepoints = 1;
    r.passed = r.ci_low > 0.0;
    const MeanEstimate md = mean_with_error(distances);
    r.details = {{"hits", hits}, {"mean_distance", md.mean}, {"mean_distance_std_error", md.std_error},
                 {"radius", 2.0 * delta}};
    r.config = {{"S", S}, {"delta", delta}, {"R", R},
                {"solver", to_json(run_cfg)}, {"noise", to_json(model)}, {"x0", to_json(x0)}};
    return r;
}

ErgodicsReport lower_bound(const Field& x0, const NoiseModel& model, const SolverConfig& cfg, double delta,
                           const std::vector<double>& T_list, std::size_t n_paths, std::size_t workers) {
    if (T_list.empty()) throw ConfigError("lower bound needs at least one horizon");
    if (!(delta > 0.0)) throw ConfigError("lower bound needs delta > 0");
    model.require_nondegenerate();
    std::vector<double> horizons = T_list;
    std::sort(horizons.begin(), horizons.end());
    if (!(horizons.front() > 0.0)) throw ConfigError("lower bound horizons must be positive");
    SolverConfig run_cfg = cfg;
    run_cfg.T = horizons.back();
    run_cfg.validate(model.grid());
    const Field target = fixed_point(model.forcing());

    std::vector<std::size_t> horizon_steps;
    for (double T : horizons) horizon_steps.push_back(steps_for(T, run_cfg.dt));
    const std::size_t n_steps = horizon_steps.back();

    // Per path: fraction of saved left-endpoint times inside the ball, per horizon.
    const auto paths = parallel_map(n_paths, workers, [&](std::size_t j) {
        PathIntegrator path(x0, model, run_cfg, rng::sample_seed(run_cfg.seed, j));
        std::vector<double> fractions(horizon_steps.size(), 0.0);
        std::size_t inside = 0, points = 0, next = 0;
        for (std::size_t n = 0; n <= n_steps; ++n) {
            while (next < horizon_steps.size() && horizon_steps[next] == n) {
                fractions[next] = points ? static_cast<double>(inside) / static_cast<double>(points) : 0.0;
                ++next;
            }
            if (n == n_steps) break;
            if (n % run_cfg.save_every == 0) {
                ++points;
                if (norm_hminus1(path.state() - target) < 2.0 * delta) ++inside;
            }
            path.advance();
        }
        return fractions;
    });

    nlohmann::json per_T = nlohmann::json::array();
    std::vector<ProportionEstimate> estimates;
    for (std::size_t k = 0; k < horizons.size(); ++k) {
        std::vector<double> f;
        for (const auto& p : paths) f.push_back(p[k]);
        const MeanEstimate m = mean_with_error(f);
        const ProportionEstimate est = wilson_interval(m.mean, n_paths);
        estimates.push_back(est);
        per_T.push_back({{"T", horizons[k]}, {"estimate", est.estimate}, {"ci_low", est.ci_low},
                         {"ci_high", est.ci_high}, {"std_error", m.std_error}});
    }
    double best = 0.0;
    for (const auto& e : estimates) best = std::max(best, e.estimate);
    const auto& last = estimates.back();
    const bool not_vanishing = last.estimate >= 0.5 * best;

    ErgodicsReport r;
    r.suite = "lower-bound";
    fill_interval(r, last);
    r.n_paths = n_paths;
    r.n_timepoints = (n_steps + run_cfg.save_every - 1) / run_cfg.save_every;
    r.passed = last.ci_low > 0.0 && not_vanishing;
    r.details = {{"per_T", per_T}, {"radius", 2.0 * delta}, {"not_trending_to_zero", not_vanishing}};
    r.config = {{"delta", delta}, {"T_list", horizons},
                {"solver", to_json(run_cfg)}, {"noise", to_json(model)}, {"x0", to_json(x0)}};
    return r;
}

nlohmann::json product_chain_check(double lower_bound_estimate, std::size_t lower_bound_paths, double gamma,
                                   std::size_t gamma_paths, double occupation, std::size_t occupation_paths) {
    const double se_lb = proportion_se(lower_bound_estimate, lower_bound_paths);
    const double se_gamma = proportion_se(gamma, gamma_paths);
    const double se_occ = proportion_se(occupation, occupation_paths);
    const double combined =
        std::sqrt(se_lb * se_lb + occupation * occupation * se_gamma * se_gamma + gamma * gamma * se_occ * se_occ);
    const double rhs = gamma * occupation;
    return {{"lower_bound", lower_bound_estimate},
            {"gamma", gamma},
            {"occupation", occupation},
            {"gamma_times_occupation", rhs},
            {"mc_error", 3.0 * combined},
            {"holds", lower_bound_estimate >= rhs - 3.0 * combined}};
}

LipschitzFunctional capped_distance_functional(const Field& anchor) {
    return {"min(1,||u-a||_-1)", 1.0,
            [anchor](const Field& u) { return std::min(1.0, norm_hminus1(u - anchor)); }};
}

ErgodicsReport e_property_probe(const std::vector<std::pair<Field, Field>>& pairs,
                                const std::vector<LipschitzFunctional>& functionals, const NoiseModel& model,
                                const SolverConfig& cfg, const std::vector<double>& t_list, std::size_t n_paths,
                                std::size_t workers) {
    if (t_list.empty()) throw ConfigError("e-property probe needs at least one time");
    cfg.validate(model.grid());
    std::vector<std::size_t> probe_steps;
    for (double t : t_list) probe_steps.push_back(steps_for(t, cfg.dt));
    const std::size_t n_steps = *std::max_element(probe_steps.begin(), probe_steps.end());
    const std::size_t n_f = functionals.size();
    const std::size_t n_t = t_list.size();

    // Per (pair, path): differences f(X^x_t) - f(X^y_t) laid out [functional][time].
    const auto diffs = parallel_map(pairs.size() * n_paths, workers, [&](std::size_t idx) {
        const auto& [x0, y0] = pairs[idx / n_paths];
        const std::uint64_t seed = rng::sample_seed(cfg.seed, idx % n_paths);
        PathIntegrator a(x0, model, cfg, seed);
        PathIntegrator b(y0, model, cfg, seed);
        std::vector<double> out(n_f * n_t, 0.0);
        for (std::size_t n = 0; n <= n_steps; ++n) {
            for (std::size_t k = 0; k < n_t; ++k) {
                if (probe_steps[k] != n) continue;
                for (std::size_t f = 0; f < n_f; ++f) {
                    out[f * n_t + k] = functionals[f].eval(a.state()) - functionals[f].eval(b.state());
                }
            }
            if (n == n_steps) break;
            const Field dW = a.next_increment();
            a.advance_with(dW);
            b.advance_with(dW);
        }
        return out;
    });

    nlohmann::json cells = nlohmann::json::array();
    std::size_t holding = 0, total = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double initial = norm_hminus1(pairs[p].first - pairs[p].second);
        for (std::size_t f = 0; f < n_f; ++f) {
            for (std::size_t k = 0; k < n_t; ++k) {
                std::vector<double> samples(n_paths);
                for (std::size_t j = 0; j < n_paths; ++j) samples[j] = diffs[p * n_paths + j][f * n_t + k];
                const MeanEstimate m = mean_with_error(samples);
                const double bound = functionals[f].lipschitz * initial;
                const bool holds = std::abs(m.mean) <= bound + 3.0 * m.std_error;
                holding += holds ? 1 : 0;
                ++total;
                cells.push_back({{"pair", p}, {"functional", functionals[f].name}, {"t", t_list[k]},
                                 {"gap", std::abs(m.mean)}, {"std_error", m.std_error},
                                 {"lipschitz_bound", bound}, {"holds", holds}});
            }
        }
    }

    ErgodicsReport r;
    r.suite = "e-property";
    fill_interval(r, wilson_from_counts(holding, total));
    r.n_paths = n_paths;
    r.n_timepoints = n_t;
    r.passed = holding == total;
    r.details = {{"cells", cells}, {"cells_holding", holding}, {"cells_total", total}};
    r.config = {{"t_list", t_list}, {"pairs", pairs.size()},
                {"solver", to_json(cfg)}, {"noise", to_json(model)}};
    return r;
}

Field first_eigenmode(const Grid& grid) {
    return Field::from_function(grid, [](double x) { return std::sin(std::numbers::pi * (x + 1.0) / 2.0); });
}

ErgodicsReport empirical_invariant(const std::vector<Field>& x_list, const NoiseModel& model,
                                   const SolverConfig& cfg, double T_long, double burn_in, std::size_t n_batches,
                                   bool common_noise, std::size_t workers) {
    if (x_list.empty()) throw ConfigError("invariant probe needs at least one initial condition");
    if (!(burn_in >= 0.0 && T_long > burn_in)) throw ConfigError("invariant probe needs T_long > burn_in >= 0");
    SolverConfig run_cfg = cfg;
    run_cfg.T = T_long;
    run_cfg.validate(model.grid());
    const std::size_t n_steps = run_cfg.n_steps();
    const std::size_t burn_steps = steps_for(burn_in, run_cfg.dt);
    const Field e1 = first_eigenmode(model.grid());

    static const std::vector<std::string> names = {"l2", "hm1", "linf", "varphi", "mode1"};
    const std::size_t n_fun = names.size();

    // Per IC: one batch-means estimate per functional.
    const auto per_ic = parallel_map(x_list.size(), workers, [&](std::size_t i) {
        const std::uint64_t seed = common_noise ? run_cfg.seed : rng::sample_seed(run_cfg.seed, i);
        PathIntegrator path(x_list[i], model, run_cfg, seed);
        std::vector<std::vector<double>> series(n_fun);
        for (std::size_t n = 0; n < n_steps; ++n) {
            if (n >= burn_steps && n % run_cfg.save_every == 0) {
                const Field& X = path.state();
                series[0].push_back(norm_l2(X));
                series[1].push_back(norm_hminus1(X));
                series[2].push_back(norm_linf(X));
                series[3].push_back(varphi_functional(X));
                series[4].push_back(inner_l2(X, e1));
            }
            path.advance();
        }
        std::vector<MeanEstimate> out;
        for (const auto& s : series) out.push_back(batch_means(s, n_batches));
        return out;
    });

    double worst = 0.0;
    nlohmann::json functionals = nlohmann::json::object();
    for (std::size_t f = 0; f < n_fun; ++f) {
        nlohmann::json means = nlohmann::json::array();
        nlohmann::json errors = nlohmann::json::array();
        double fun_worst = 0.0;
        for (std::size_t a = 0; a < x_list.size(); ++a) {
            means.push_back(per_ic[a][f].mean);
            errors.push_back(per_ic[a][f].std_error);
            for (std::size_t b = a + 1; b < x_list.size(); ++b) {
                const double diff = std::abs(per_ic[a][f].mean - per_ic[b][f].mean);
                const double se = std::hypot(per_ic[a][f].std_error, per_ic[b][f].std_error);
                const double ratio = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
                fun_worst = std::max(fun_worst, ratio);
            }
        }
        worst = std::max(worst, fun_worst);
        functionals[names[f]] = {{"means", means}, {"std_errors", errors}, {"max_discrepancy_in_se", fun_worst}};
    }

    ErgodicsReport r;
    r.suite = "invariant";
    r.estimate = worst;
    r.ci_low = worst;
    r.ci_high = worst;
    r.n_paths = x_list.size();
    r.n_timepoints = per_ic.empty() ? 0 : (n_steps - burn_steps);
    r.passed = worst <= 3.0;
    r.details = {{"functionals", functionals}, {"threshold_in_se", 3.0}, {"n_batches", n_batches},
                 {"common_noise", common_noise}};
    nlohmann::json ics = nlohmann::json::array();
    for (const auto& x : x_list) ics.push_back(to_json(x));
    r.config = {{"T_long", T_long}, {"burn_in", burn_in}, {"x_list", ics},
                {"solver", to_json(run_cfg)}, {"noise", to_json(model)}};
    return r;
}

}  // namespace spme
