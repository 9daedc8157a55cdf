#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spme/grid.hpp"
#include "spme/stats.hpp"

namespace spme {

struct NoiseMode {
    Field profile;
    double amplitude;
};

/// Truncated trace-class Wiener process W^B(t) = sum_k sigma_k beta_k(t) xi_k
/// together with the forcing g = sum_{k <= m} c_k sigma_k xi_k built from its
/// leading modes.
class NoiseModel {
public:
    /// Profiles must be mutually orthogonal in the discrete L^2 product (relative
    /// defect below 1e-8) and amplitudes nonnegative. Non-degeneracy of the
    /// forcing is not required here; see require_nondegenerate().
    NoiseModel(Grid grid, std::vector<NoiseMode> modes, std::vector<double> forcing_coeffs,
               double decay = 0.0, std::string profile_family = "custom");

    const Grid& grid() const noexcept { return grid_; }
    std::size_t truncation() const noexcept { return modes_.size(); }
    std::span<const NoiseMode> modes() const noexcept { return modes_; }
    std::span<const double> forcing_coeffs() const noexcept { return forcing_coeffs_; }
    const Field& forcing() const noexcept { return forcing_; }
    double decay() const noexcept { return decay_; }
    const std::string& profile_family() const noexcept { return profile_family_; }

    /// sum_k sigma_k^2 ||xi_k||_2^2, the trace of the covariance per unit time.
    double trace() const;
    /// Largest |G_jk| / sqrt(G_jj G_kk), j != k, of the discrete mode Gramian.
    double orthogonality_defect() const;

    double min_forcing() const;
    bool is_nondegenerate() const { return min_forcing() > 1.0; }
    /// Throws NonDegeneracyViolation when g <= 1 at some node.
    void require_nondegenerate() const;

private:
    Grid grid_;
    std::vector<NoiseMode> modes_;
    std::vector<double> forcing_coeffs_;
    Field forcing_;
    double decay_;
    std::string profile_family_;
};

/// Constant mode followed by cosines, amplitudes sigma_k = k^{-decay}, and
/// forcing g = c1 * sigma_1 * xi_1 from the constant mode alone.
///
/// Mode k >= 2 is cos((k-1) pi (i - 1/2) / n) at interior node i, i.e.
/// cos((k-1) pi (x + 1) / 2) rescaled to the cell-centred span of the interior
/// nodes, which keeps the family exactly orthogonal on the grid.
NoiseModel default_model(const Grid& grid, std::size_t K, double decay, double c1);

/// Increment Delta W^B_n = sum_k sigma_k sqrt(dt) zeta_{n,k} xi_k with
/// zeta_{n,k} keyed by (seed, n, k).
Field noise_increment(const NoiseModel& model, double dt, std::uint64_t seed, std::uint64_t step);
void noise_increment(const NoiseModel& model, double dt, std::uint64_t seed, std::uint64_t step,
                     std::span<double> out);

struct NoisePath {
    std::vector<double> times;        // t_0 = 0, ..., t_N
    std::vector<Field> increments;    // N fields
    std::vector<Field> cumulative;    // N + 1 fields, cumulative[0] = 0
};

NoisePath sample_path(const NoiseModel& model, double dt, std::size_t n_steps, std::uint64_t seed);

/// max over n = 1..N of ||W^B(t_n) - t_n g||_2 on the time grid t_n = n*dt up to S.
double tube_sup(const NoiseModel& model, double S, double dt, std::uint64_t seed);

/// Monte-Carlo estimate of P(max_n ||W^B(t_n) - t_n g||_2 <= beta) over
/// n_samples paths with seeds seed + i, with a Wilson 95% interval.
ProportionEstimate tube_probability(const NoiseModel& model, double S, double beta, double dt,
                                    std::size_t n_samples, std::uint64_t seed, std::size_t workers = 1);

std::size_t steps_for(double T, double dt);

}  // namespace spme
