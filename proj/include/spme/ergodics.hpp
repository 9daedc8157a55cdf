#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spme/grid.hpp"
#include "spme/noise.hpp"
#include "spme/sde_solver.hpp"
#include "spme/stats.hpp"

namespace spme {

/// Parameters of the L-infinity occupation estimate: radius R > 3 of the
/// ball, H^{-1} neighbourhood width delta > 0, horizon T > 1.
struct OccupationSpec {
    double R = 4.0;
    double delta = 0.1;
    double T = 5.0;

    void validate() const;
};

/// Monte-Carlo estimate produced by one suite. `details` carries the
/// suite-specific breakdown, `config` echoes every parameter that shaped it.
struct ErgodicsReport {
    std::string suite;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_timepoints = 0;
    bool passed = false;
    nlohmann::json details = nlohmann::json::object();
    nlohmann::json config = nlohmann::json::object();
};

/// Uniform random field in [-amplitude, amplitude], keyed by (seed, stream).
Field random_field(const Grid& grid, double amplitude, std::uint64_t seed, std::uint64_t stream);

/// Fraction of (pair, path) combinations whose terminal H^{-1} distance does
/// not exceed the initial one by more than 1e-8; paths share noise across pairs.
ErgodicsReport contraction_suite(const std::vector<std::pair<Field, Field>>& pairs, const NoiseModel& model,
                                 const SolverConfig& cfg, std::size_t n_paths, std::size_t workers = 1);

/// Time-average over [0, T) of 1{clip_distance(X_r, R) < delta}, averaged over paths.
ErgodicsReport occupation_average(const Field& x0, const OccupationSpec& spec, const NoiseModel& model,
                                  const SolverConfig& cfg, std::size_t n_paths, std::size_t workers = 1);

/// Horizon S after which the deterministic flows from +R and -R stay within
/// delta/8 of the fixed point.
std::optional<double> pilot_horizon(const NoiseModel& model, const SolverConfig& cfg, double R, double delta,
                                    double T_max);

/// P(||X_S - u_inf||_{-1} < 2 delta) from x0 with clip_distance(x0, R) < delta.
ErgodicsReport accessibility(const Field& x0, const NoiseModel& model, const SolverConfig& cfg, double S,
                             double delta, double R, std::size_t n_paths, std::size_t workers = 1);

/// For each T in T_list, the time-average of 1{||X_r - u_inf||_{-1} < 2 delta}
/// over [0, T), averaged over paths.
ErgodicsReport lower_bound(const Field& x0, const NoiseModel& model, const SolverConfig& cfg, double delta,
                           const std::vector<double>& T_list, std::size_t n_paths, std::size_t workers = 1);

/// lower_bound >= gamma * occupation - 3 * combined standard error.
nlohmann::json product_chain_check(double lower_bound_estimate, std::size_t lower_bound_paths, double gamma,
                                   std::size_t gamma_paths, double occupation, std::size_t occupation_paths);

struct LipschitzFunctional {
    std::string name;
    double lipschitz = 1.0;  // with respect to ||.||_{-1}
    std::function<double(const Field&)> eval;
};

/// u -> min(1, ||u - anchor||_{-1}), Lipschitz constant 1.
LipschitzFunctional capped_distance_functional(const Field& anchor);

/// For every pair, functional and time, compares |E f(X^x_t) - E f(X^y_t)|
/// (common random numbers) against lipschitz * ||x - y||_{-1} + 3 standard errors.
ErgodicsReport e_property_probe(const std::vector<std::pair<Field, Field>>& pairs,
                                const std::vector<LipschitzFunctional>& functionals, const NoiseModel& model,
                                const SolverConfig& cfg, const std::vector<double>& t_list, std::size_t n_paths,
                                std::size_t workers = 1);

/// First Dirichlet eigenmode sin(pi (x + 1) / 2) sampled on the grid.
Field first_eigenmode(const Grid& grid);

/// Long-run time averages after burn-in of ||X||_2, ||X||_{-1}, ||X||_inf,
/// the psi-energy and <X, e_1>, with batch-means errors. The estimate is the
/// largest cross-IC discrepancy in units of combined standard error.
ErgodicsReport empirical_invariant(const std::vector<Field>& x_list, const NoiseModel& model,
                                   const SolverConfig& cfg, double T_long, double burn_in,
                                   std::size_t n_batches = 30, bool common_noise = true,
                                   std::size_t workers = 1);

}  // namespace spme
