#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "spme/grid.hpp"
#include "spme/noise.hpp"
#include "spme/sde_solver.hpp"

namespace spme {

/// One step of du/dt = eps Delta u + Delta phi^eps(u) + g. The implicit scheme
/// solves Y - dt Delta_h(eps Y + phi^eps(Y)) = u + dt g.
Field det_step(const Field& u, const Field& g, const SolverConfig& cfg);

/// u_inf = max((-Delta_h)^{-1} g, 1) nodewise. Requires g > 1 at every node.
Field fixed_point(const Field& g);

struct DetTrajectory {
    std::vector<double> times;
    std::vector<Field> snapshots;
    /// ||u(t) - fixed_point(g)||_{-1} at each snapshot time; empty when g is
    /// not strictly above 1, in which case the fixed point is undefined.
    std::vector<double> distance_to_equilibrium;
};

/// Integrates to time T (cfg.T is ignored), saving every cfg.save_every steps.
DetTrajectory det_solve(const Field& x0, const Field& g, const SolverConfig& cfg, double T);

/// First snapshot time at which both flows started from +R and -R lie within
/// `tolerance` of fixed_point(g) in H^{-1}; nullopt if that does not happen
/// before T_max.
std::optional<double> settling_time(const Field& g, const SolverConfig& cfg, double R, double tolerance,
                                    double T_max);

struct OrderViolation {
    double t = 0.0;
    std::size_t node = 0;
    double gap = 0.0;  // lower(node) - upper(node) > slack
};

struct ComparisonReport {
    bool passed = true;
    std::optional<OrderViolation> first_violation;
    std::size_t checked_times = 0;
};

using DetStepFn = std::function<Field(const Field&)>;

/// Runs both deterministic trajectories and checks lower <= upper + slack at
/// every saved time. Throws ConfigError unless field_leq(x0, y0).
ComparisonReport comparison_check(const Field& x0, const Field& y0, const Field& g, const SolverConfig& cfg,
                                  double T, double slack = 1e-10);

/// Same check with a caller-supplied one-step map.
ComparisonReport comparison_check(const Field& x0, const Field& y0, const DetStepFn& step_fn, double dt,
                                  std::size_t n_steps, std::size_t save_every, double slack = 1e-10);

struct TubeLevel {
    double beta = 0.0;
    std::size_t attempts = 0;
    std::size_t accepted = 0;
    std::vector<double> distances;  // ||X_S - u_S||_{-1} per accepted path
    double mean_distance = 0.0;
};

struct TubeClosenessReport {
    std::vector<TubeLevel> levels;  // beta, beta/2, beta/4
    double slope_estimate = 0.0;    // log-log slope of mean distance against beta
    bool conclusive = false;        // every level has at least one accepted path
};

/// Rejection-samples noise paths (seeds cfg.seed + i, i < budget) whose tube
/// sup max_n ||W^B(t_n) - t_n g||_2 stays below each level, keeps the first
/// `accept_target` per level, and compares the stochastic and deterministic
/// flows from x0 at time S.
TubeClosenessReport tube_closeness(const Field& x0, const NoiseModel& model, const SolverConfig& cfg, double S,
                                   double beta, double R, std::size_t accept_target, std::size_t budget,
                                   std::size_t workers = 1);

}  // namespace spme
