#include "spme/det_solver.hpp"

#include <algorithm>
#include <cmath>

#include "spme/errors.hpp"
#include "spme/parallel.hpp"
#include "spme/rng.hpp"

namespace spme {

Field det_step(const Field& u, const Field& g, const SolverConfig& cfg) {
    require_same_grid(u, g);
    const Field forcing = g * cfg.dt;
    if (cfg.scheme == Scheme::Implicit) return solve_implicit(u + forcing, u, cfg);
    return step_explicit(u, forcing, cfg);
}

Field fixed_point(const Field& g) {
    for (double v : g.values()) {
        if (!(v > 1.0)) {
            throw NonDegeneracyViolation("fixed point requires g > 1 at every node (non-degeneracy condition)");
        }
    }
    const std::vector<double> v = inverse_laplacian(g.grid(), g.values());
    std::vector<double> u(v.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::max(v[i], 1.0);
    return Field(g.grid(), std::move(u));
}

DetTrajectory det_solve(const Field& x0, const Field& g, const SolverConfig& cfg, double T) {
    require_same_grid(x0, g);
    cfg.validate(x0.grid());
    const std::size_t n_steps = steps_for(T, cfg.dt);
    std::optional<Field> target;
    if (std::all_of(g.values().begin(), g.values().end(), [](double v) { return v > 1.0; })) {
        target = fixed_point(g);
    }

    DetTrajectory out;
    auto record = [&](double t, const Field& u) {
        out.times.push_back(t);
        out.snapshots.push_back(u);
        if (target) out.distance_to_equilibrium.push_back(norm_hminus1(u - *target));
    };
    Field u = x0;
    record(0.0, u);
    for (std::size_t n = 1; n <= n_steps; ++n) {
        u = det_step(u, g, cfg);
        if (n % cfg.save_every == 0) record(static_cast<double>(n) * cfg.dt, u);
    }
    return out;
}

std::optional<double> settling_time(const Field& g, const SolverConfig& cfg, double R, double tolerance,
                                    double T_max) {
    const Field target = fixed_point(g);
    cfg.validate(g.grid());
    Field upper = Field::constant(g.grid(), R);
    Field lower = Field::constant(g.grid(), -R);
    const std::size_t n_steps = steps_for(T_max, cfg.dt);
    for (std::size_t n = 0; n <= n_steps; ++n) {
        if (n % cfg.save_every == 0) {
            const double d = std::max(norm_hminus1(upper - target), norm_hminus1(lower - target));
            if (d <= tolerance) return static_cast<double>(n) * cfg.dt;
        }
        if (n == n_steps) break;
        upper = det_step(upper, g, cfg);
        lower = det_step(lower, g, cfg);
    }
    return std::nullopt;
}

ComparisonReport comparison_check(const Field& x0, const Field& y0, const DetStepFn& step_fn, double dt,
                                  std::size_t n_steps, std::size_t save_every, double slack) {
    require_same_grid(x0, y0);
    if (!field_leq(x0, y0)) throw ConfigError("comparison check requires x0 <= y0 nodewise");
    ComparisonReport report;
    Field lo = x0;
    Field hi = y0;
    auto check = [&](double t) {
        ++report.checked_times;
        for (std::size_t i = 0; i < lo.size(); ++i) {
            const double gap = lo[i] - hi[i];
            if (gap > slack || !std::isfinite(gap)) {
                report.passed = false;
                report.first_violation = OrderViolation{t, i, gap};
                return false;
            }
        }
        return true;
    };
    if (!check(0.0)) return report;
    for (std::size_t n = 1; n <= n_steps; ++n) {
        lo = step_fn(lo);
        hi = step_fn(hi);
        if (n % save_every == 0 && !check(static_cast<double>(n) * dt)) return report;
    }
    return report;
}

ComparisonReport comparison_check(const Field& x0, const Field& y0, const Field& g, const SolverConfig& cfg,
                                  double T, double slack) {
    cfg.validate(x0.grid());
    return comparison_check(
        x0, y0, [&](const Field& u) { return det_step(u, g, cfg); }, cfg.dt, steps_for(T, cfg.dt), cfg.save_every,
        slack);
}

TubeClosenessReport tube_closeness(const Field& x0, const NoiseModel& model, const SolverConfig& cfg, double S,
                                   double beta, double R, std::size_t accept_target, std::size_t budget,
                                   std::size_t workers) {
    if (norm_linf(x0) > R) throw ConfigError("tube closeness requires ||x0||_inf <= R");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("tube closeness requires 0 < beta <= 1");
    cfg.validate(x0.grid());
    model.require_nondegenerate();

    const std::vector<double> sups = parallel_map(
        budget, workers, [&](std::size_t i) { return tube_sup(model, S, cfg.dt, rng::sample_seed(cfg.seed, i)); });

    const std::size_t n_steps = steps_for(S, cfg.dt);
    Field u = x0;
    for (std::size_t n = 0; n < n_steps; ++n) u = det_step(u, model.forcing(), cfg);
    const Field det_terminal = u;

    TubeClosenessReport report;
    report.conclusive = true;
    for (double level : {beta, beta / 2.0, beta / 4.0}) {
        TubeLevel tl;
        tl.beta = level;
        std::vector<std::uint64_t> seeds;
        for (std::size_t i = 0; i < budget && seeds.size() < accept_target; ++i) {
            ++tl.attempts;
            if (sups[i] <= level) seeds.push_back(rng::sample_seed(cfg.seed, i));
        }
        tl.accepted = seeds.size();
        tl.distances = parallel_map(seeds.size(), workers, [&](std::size_t j) {
            PathIntegrator path(x0, model, cfg, seeds[j]);
            for (std::size_t n = 0; n < n_steps; ++n) path.advance();
            return norm_hminus1(path.state() - det_terminal);
        });
        if (!tl.distances.empty()) {
            tl.mean_distance = mean_with_error(tl.distances).mean;
        } else {
            report.conclusive = false;
        }
        report.levels.push_back(std::move(tl));
    }

    // Least-squares slope of log(mean distance) on log(beta).
    std::vector<double> xs, ys;
    for (const auto& tl : report.levels) {
        if (tl.accepted > 0 && tl.mean_distance > 0.0) {
            xs.push_back(std::log(tl.beta));
            ys.push_back(std::log(tl.mean_distance));
        }
    }
    if (xs.size() >= 2) {
        const double mx = mean_with_error(xs).mean;
        const double my = mean_with_error(ys).mean;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        report.slope_estimate = sxy / sxx;
    }
    return report;
}

}  // namespace spme
