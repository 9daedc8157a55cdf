#include "spme/sde_solver.hpp"

#include <algorithm>
#include <cmath>

#include "spme/errors.hpp"
#include "spme/tridiagonal.hpp"

namespace spme {

namespace {

constexpr int kMaxHalvings = 40;

// Residual F = y - dt Delta_h A(y) - rhs into `residual`; returns h * sum F^2.
double residual_into(const Grid& grid, const YosidaParams& p, double dt, std::span<const double> y,
                     std::span<const double> rhs, std::vector<double>& flux, std::vector<double>& residual) {
    const std::size_t n = y.size();
    const double c = dt / (grid.h() * grid.h());
    for (std::size_t i = 0; i < n; ++i) flux[i] = regularised_flux(p, y[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? flux[i - 1] : 0.0;
        const double right = i + 1 < n ? flux[i + 1] : 0.0;
        residual[i] = y[i] - c * (left - 2.0 * flux[i] + right) - rhs[i];
        s += residual[i] * residual[i];
    }
    return grid.h() * s;
}

// Convex energy whose minimiser is the implicit step:
// E(y) = 1/2 <y - rhs, y - rhs>_{-1} + dt h sum (eps y^2 / 2 + psi^eps(y)).
// Its gradient in the H^{-1} metric is the residual, so Newton directions descend.
double step_energy(const Grid& grid, const YosidaParams& p, double dt, std::span<const double> y,
                   std::span<const double> rhs, std::vector<double>& work) {
    for (std::size_t i = 0; i < y.size(); ++i) work[i] = y[i] - rhs[i];
    const std::vector<double> inv = inverse_laplacian(grid, work);
    double quad = 0.0, pot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        quad += work[i] * inv[i];
        pot += 0.5 * p.epsilon() * y[i] * y[i] + yosida_potential(p, y[i]);
    }
    return grid.h() * (0.5 * quad + dt * pot);
}

// Newton runs in z = y + A(y). Both y(z) and A(y(z)) are piecewise affine with
// slopes in (0, 1] and O(1)-wide pieces, so crossing the steep band 1 < |y| < 1 + eps
// no longer needs dozens of damped steps. The linearised update in y is the usual
// semismooth Newton direction: J_z = (I - dt Delta_h diag(A')) diag(y').
double y_from_z(const YosidaParams& p, double z) {
    const double e = p.epsilon();
    const double az = std::abs(z);
    const double z1 = 1.0 + e;
    const double z2 = z1 + e * (1.0 + e) + 1.0;
    double y;
    if (az <= z1) {
        y = az / (1.0 + e);
    } else if (az <= z2) {
        y = 1.0 + (az - z1) / (1.0 + e + 1.0 / e);
    } else {
        y = 1.0 + e + (az - z2) / (1.0 + e + 1.0 / (1.0 + e));
    }
    return std::copysign(y, z);
}

std::vector<double> newton_solve(const Grid& grid, std::span<const double> rhs, std::span<const double> guess,
                                 const SolverConfig& cfg) {
    constexpr double kArmijo = 1e-4;
    const YosidaParams p = cfg.yosida();
    const std::size_t n = rhs.size();
    const double c = cfg.dt / (grid.h() * grid.h());
    const double tol_sq = cfg.newton_tol * cfg.newton_tol;

    std::vector<double> y(guess.begin(), guess.end());
    std::vector<double> z(n), flux(n), residual(n), yprime(n), work(n);
    std::vector<double> lower(n), diag(n), upper(n), neg_residual(n);
    std::vector<double> z_trial(n), trial(n), trial_flux(n), trial_residual(n);

    double res_sq = residual_into(grid, p, cfg.dt, y, rhs, flux, residual);
    double energy = step_energy(grid, p, cfg.dt, y, rhs, work);
    for (std::size_t i = 0; i < n; ++i) z[i] = y[i] + flux[i];

    int it = 0;
    for (; it < cfg.newton_max_iter; ++it) {
        if (res_sq <= tol_sq) return y;

        for (std::size_t i = 0; i < n; ++i) yprime[i] = 1.0 / (1.0 + regularised_flux_slope(p, y[i]));
        for (std::size_t i = 0; i < n; ++i) {
            diag[i] = yprime[i] + 2.0 * c * (1.0 - yprime[i]);  // dA/dz = A' y' = 1 - y'
            lower[i] = i > 0 ? -c * (1.0 - yprime[i - 1]) : 0.0;
            upper[i] = i + 1 < n ? -c * (1.0 - yprime[i + 1]) : 0.0;
            neg_residual[i] = -residual[i];
        }
        const std::vector<double> direction = solve_tridiagonal(lower, diag, upper, neg_residual);

        // Slope of the energy along the path, <F, y' dz>_{-1}; negative for a Newton direction.
        const std::vector<double> inv_res = inverse_laplacian(grid, residual);
        double slope_e = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope_e += yprime[i] * direction[i] * inv_res[i];
        slope_e *= grid.h();
        const double roundoff = 1e-13 * std::max(1.0, std::abs(energy));

        bool accepted = false;
        for (int pass = 0; pass < 2 && !accepted; ++pass) {
            double lambda = 1.0;
            for (int halving = 0; halving <= kMaxHalvings; ++halving, lambda *= 0.5) {
                for (std::size_t i = 0; i < n; ++i) {
                    z_trial[i] = z[i] + lambda * direction[i];
                    trial[i] = y_from_z(p, z_trial[i]);
                }
                const double trial_sq = residual_into(grid, p, cfg.dt, trial, rhs, trial_flux, trial_residual);
                const double trial_e = step_energy(grid, p, cfg.dt, trial, rhs, work);
                // Armijo on the energy first; once energy differences are at rounding
                // level, or if Armijo fails outright, settle for residual decrease.
                const bool armijo = trial_e <= energy + kArmijo * lambda * slope_e;
                const bool flat = std::abs(trial_e - energy) <= roundoff && trial_sq < res_sq;
                if (pass == 0 ? (armijo || flat) : trial_sq < res_sq) {
                    z.swap(z_trial);
                    y.swap(trial);
                    flux.swap(trial_flux);
                    residual.swap(trial_residual);
                    res_sq = trial_sq;
                    energy = trial_e;
                    accepted = true;
                    break;
                }
            }
        }
        if (!accepted) break;
    }
    if (res_sq <= tol_sq) return y;
    throw SolverDivergence(it, std::sqrt(res_sq));
}

}  // namespace

std::size_t SolverConfig::n_steps() const { return steps_for(T, dt); }

double SolverConfig::explicit_dt_limit(const Grid& grid) const {
    return grid.h() * grid.h() / (2.0 * (epsilon + 1.0 / epsilon));
}

void SolverConfig::validate(const Grid& grid) const {
    (void)yosida();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver.dt must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("solver.T must be positive");
    if (!(newton_tol > 0.0)) throw ConfigError("solver.newton_tol must be positive");
    if (newton_max_iter < 1) throw ConfigError("solver.newton_max_iter must be positive");
    if (save_every < 1) throw ConfigError("solver.save_every must be positive");
    if (scheme == Scheme::Explicit && dt > explicit_dt_limit(grid)) {
        throw ConfigError("explicit scheme unstable: dt = " + std::to_string(dt) + " exceeds h^2/(2(eps+1/eps)) = " +
                          std::to_string(explicit_dt_limit(grid)));
    }
}

double implicit_residual(const Field& Y, const Field& rhs, const SolverConfig& cfg) {
    require_same_grid(Y, rhs);
    std::vector<double> flux(Y.size()), residual(Y.size());
    return std::sqrt(residual_into(Y.grid(), cfg.yosida(), cfg.dt, Y.values(), rhs.values(), flux, residual));
}

Field solve_implicit(const Field& rhs, const SolverConfig& cfg) {
    return Field(rhs.grid(), newton_solve(rhs.grid(), rhs.values(), rhs.values(), cfg));
}

Field solve_implicit(const Field& rhs, const Field& guess, const SolverConfig& cfg) {
    require_same_grid(rhs, guess);
    return Field(rhs.grid(), newton_solve(rhs.grid(), rhs.values(), guess.values(), cfg));
}

Field step_implicit(const Field& X, const Field& dW, const SolverConfig& cfg) {
    return solve_implicit(X + dW, X, cfg);
}

Field explicit_update(const Field& X, const Field& dW, const SolverConfig& cfg) {
    require_same_grid(X, dW);
    const YosidaParams p = cfg.yosida();
    std::vector<double> flux(X.size());
    for (std::size_t i = 0; i < flux.size(); ++i) flux[i] = regularised_flux(p, X[i]);
    const std::vector<double> lap = laplacian_apply(X.grid(), flux);
    std::vector<double> out(X.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = X[i] + cfg.dt * lap[i] + dW[i];
    return Field(X.grid(), std::move(out));
}

Field step_explicit(const Field& X, const Field& dW, const SolverConfig& cfg) {
    if (cfg.dt > cfg.explicit_dt_limit(X.grid())) {
        throw ConfigError("explicit scheme unstable: dt exceeds h^2/(2(eps+1/eps))");
    }
    return explicit_update(X, dW, cfg);
}

Field step(const Field& X, const Field& dW, const SolverConfig& cfg) {
    return cfg.scheme == Scheme::Implicit ? step_implicit(X, dW, cfg) : step_explicit(X, dW, cfg);
}

StepSummary summarize(const Field& X, double t, double clip_radius) {
    StepSummary s;
    s.t = t;
    s.l2 = norm_l2(X);
    s.linf = norm_linf(X);
    s.hm1 = norm_hminus1(X);
    const double excess = std::max(0.0, s.linf - 1.0);
    s.excess_sq = excess * excess;
    s.clipdist = clip_distance(X, clip_radius);
    return s;
}

PathIntegrator::PathIntegrator(Field x0, const NoiseModel& model, const SolverConfig& cfg, std::uint64_t seed)
    : state_(std::move(x0)), model_(&model), cfg_(cfg), seed_(seed) {
    require_same_grid(state_, model.forcing());
    cfg_.validate(state_.grid());
}

Field PathIntegrator::next_increment() const { return noise_increment(*model_, cfg_.dt, seed_, step_); }

void PathIntegrator::advance() { advance_with(next_increment()); }

void PathIntegrator::advance_with(const Field& dW) {
    state_ = step(state_, dW, cfg_);
    ++step_;
}

Trajectory simulate(const Field& x0, const NoiseModel& model, const SolverConfig& cfg, double clip_radius) {
    PathIntegrator path(x0, model, cfg, cfg.seed);
    const std::size_t n_steps = cfg.n_steps();
    Trajectory traj;
    traj.clip_radius = clip_radius;
    traj.summaries.reserve(n_steps + 1);
    traj.summaries.push_back(summarize(x0, 0.0, clip_radius));
    traj.times.push_back(0.0);
    traj.snapshots.push_back(x0);
    for (std::size_t n = 1; n <= n_steps; ++n) {
        path.advance();
        traj.summaries.push_back(summarize(path.state(), path.time(), clip_radius));
        if (n % cfg.save_every == 0) {
            traj.times.push_back(path.time());
            traj.snapshots.push_back(path.state());
        }
    }
    return traj;
}

CoupledTrajectory simulate_coupled(const Field& x0, const Field& y0, const NoiseModel& model,
                                   const SolverConfig& cfg, double clip_radius) {
    require_same_grid(x0, y0);
    PathIntegrator a(x0, model, cfg, cfg.seed);
    PathIntegrator b(y0, model, cfg, cfg.seed);
    const std::size_t n_steps = cfg.n_steps();

    CoupledTrajectory out;
    for (Trajectory* t : {&out.first, &out.second}) {
        t->clip_radius = clip_radius;
        t->times.push_back(0.0);
    }
    out.first.snapshots.push_back(x0);
    out.second.snapshots.push_back(y0);
    out.first.summaries.push_back(summarize(x0, 0.0, clip_radius));
    out.second.summaries.push_back(summarize(y0, 0.0, clip_radius));
    out.distance.push_back(norm_hminus1(x0 - y0));

    for (std::size_t n = 1; n <= n_steps; ++n) {
        const Field dW = a.next_increment();
        a.advance_with(dW);
        b.advance_with(dW);
        out.first.summaries.push_back(summarize(a.state(), a.time(), clip_radius));
        out.second.summaries.push_back(summarize(b.state(), b.time(), clip_radius));
        out.distance.push_back(norm_hminus1(a.state() - b.state()));
        if (n % cfg.save_every == 0) {
            out.first.times.push_back(a.time());
            out.second.times.push_back(b.time());
            out.first.snapshots.push_back(a.state());
            out.second.snapshots.push_back(b.state());
        }
    }
    return out;
}

}  // namespace spme
