#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spme/grid.hpp"
#include "spme/monotone.hpp"
#include "spme/noise.hpp"

namespace spme {

enum class Scheme { Implicit, Explicit };

struct SolverConfig {
    double epsilon = 0.05;
    double dt = 1e-3;
    double T = 1.0;
    Scheme scheme = Scheme::Implicit;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    std::size_t save_every = 1;
    std::uint64_t seed = 0;

    YosidaParams yosida() const { return YosidaParams(epsilon); }
    std::size_t n_steps() const;
    /// Largest stable explicit step, h^2 / (2 (eps + 1/eps)).
    double explicit_dt_limit(const Grid& grid) const;
    /// Checks every field and, for the explicit scheme, the stability bound.
    void validate(const Grid& grid) const;
};

/// Y - dt * Delta_h(eps Y + phi^eps(Y)) - rhs, measured in discrete L^2.
double implicit_residual(const Field& Y, const Field& rhs, const SolverConfig& cfg);

/// Solves Y - dt * Delta_h(eps Y + phi^eps(Y)) = rhs by damped semismooth Newton,
/// starting from `guess` (rhs when omitted). Throws SolverDivergence when
/// newton_max_iter is exhausted.
Field solve_implicit(const Field& rhs, const SolverConfig& cfg);
Field solve_implicit(const Field& rhs, const Field& guess, const SolverConfig& cfg);

/// Implicit Euler-Maruyama step: Y - dt Delta_h(eps Y + phi^eps(Y)) = X + dW.
Field step_implicit(const Field& X, const Field& dW, const SolverConfig& cfg);

/// Forward Euler update X + dt Delta_h(eps X + phi^eps(X)) + dW without any
/// stability check.
Field explicit_update(const Field& X, const Field& dW, const SolverConfig& cfg);

/// Forward Euler step; rejects configurations violating the stability bound.
Field step_explicit(const Field& X, const Field& dW, const SolverConfig& cfg);

/// Dispatches on cfg.scheme.
Field step(const Field& X, const Field& dW, const SolverConfig& cfg);

struct StepSummary {
    double t = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    double hm1 = 0.0;
    double excess_sq = 0.0;  // (||X||_inf - 1)_+^2
    double clipdist = 0.0;
};

StepSummary summarize(const Field& X, double t, double clip_radius);

struct Trajectory {
    std::vector<double> times;          // snapshot times
    std::vector<Field> snapshots;       // every save_every steps, starting with x0
    std::vector<StepSummary> summaries; // every step, starting with t = 0
    double clip_radius = 4.0;
};

/// Streams one sample path of the regularised equation. The noise increment
/// of step n is keyed by (seed, n), so the path is a pure function of
/// (x0, model, cfg, seed).
class PathIntegrator {
public:
    PathIntegrator(Field x0, const NoiseModel& model, const SolverConfig& cfg, std::uint64_t seed);

    const Field& state() const noexcept { return state_; }
    double time() const noexcept { return static_cast<double>(step_) * cfg_.dt; }
    std::size_t step_index() const noexcept { return step_; }
    /// Increment that the next call to advance() will apply.
    Field next_increment() const;
    void advance();
    void advance_with(const Field& dW);

private:
    Field state_;
    const NoiseModel* model_;
    SolverConfig cfg_;
    std::uint64_t seed_;
    std::size_t step_ = 0;
};

Trajectory simulate(const Field& x0, const NoiseModel& model, const SolverConfig& cfg, double clip_radius = 4.0);

struct CoupledTrajectory {
    Trajectory first;
    Trajectory second;
    std::vector<double> distance;  // ||X^x - X^y||_{-1} at every step, starting at t = 0
};

/// Both runs share the noise path of cfg.seed.
CoupledTrajectory simulate_coupled(const Field& x0, const Field& y0, const NoiseModel& model,
                                   const SolverConfig& cfg, double clip_radius = 4.0);

}  // namespace spme
