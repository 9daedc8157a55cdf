#include "spme/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spme/errors.hpp"
#include "spme/parallel.hpp"
#include "spme/rng.hpp"

namespace spme {

namespace {

Field build_forcing(const Grid& grid, std::span<const NoiseMode> modes, std::span<const double> coeffs) {
    if (coeffs.size() > modes.size()) throw ConfigError("more forcing coefficients than noise modes");
    std::vector<double> g(grid.size(), 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const double scale = coeffs[k] * modes[k].amplitude;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * modes[k].profile[i];
    }
    return Field(grid, std::move(g));
}

}  // namespace

NoiseModel::NoiseModel(Grid grid, std::vector<NoiseMode> modes, std::vector<double> forcing_coeffs,
                       double decay, std::string profile_family)
    : grid_(grid),
      modes_(std::move(modes)),
      forcing_coeffs_(std::move(forcing_coeffs)),
      forcing_(build_forcing(grid_, modes_, forcing_coeffs_)),
      decay_(decay),
      profile_family_(std::move(profile_family)) {
    if (modes_.empty()) throw ConfigError("noise model needs at least one mode");
    for (const auto& m : modes_) {
        if (!(m.profile.grid() == grid_)) throw GridMismatch();
        if (!(m.amplitude >= 0.0) || !std::isfinite(m.amplitude)) {
            throw ConfigError("noise amplitudes must be finite and nonnegative");
        }
    }
    if (orthogonality_defect() > 1e-8) throw ConfigError("noise mode profiles are not mutually orthogonal");
}

double NoiseModel::trace() const {
    double s = 0.0;
    for (const auto& m : modes_) s += m.amplitude * m.amplitude * inner_l2(m.profile, m.profile);
    return s;
}

double NoiseModel::orthogonality_defect() const {
    double worst = 0.0;
    for (std::size_t j = 0; j < modes_.size(); ++j) {
        const double gjj = inner_l2(modes_[j].profile, modes_[j].profile);
        for (std::size_t k = j + 1; k < modes_.size(); ++k) {
            const double gkk = inner_l2(modes_[k].profile, modes_[k].profile);
            const double gjk = inner_l2(modes_[j].profile, modes_[k].profile);
            const double scale = std::sqrt(gjj * gkk);
            if (scale > 0.0) worst = std::max(worst, std::abs(gjk) / scale);
        }
    }
    return worst;
}

double NoiseModel::min_forcing() const {
    const auto v = forcing_.values();
    return *std::min_element(v.begin(), v.end());
}

void NoiseModel::require_nondegenerate() const {
    if (!is_nondegenerate()) {
        throw NonDegeneracyViolation("non-degeneracy condition violated: forcing g = sum c_k sigma_k xi_k must exceed 1 "
                                     "at every node, but min g = " +
                                     std::to_string(min_forcing()));
    }
}

NoiseModel default_model(const Grid& grid, std::size_t K, double decay, double c1) {
    if (K == 0) throw ConfigError("noise truncation K must be at least 1");
    if (!(decay > 0.5)) throw ConfigError("noise decay exponent must exceed 1/2");
    const std::size_t n = grid.size();
    std::vector<NoiseMode> modes;
    modes.reserve(K);
    for (std::size_t k = 1; k <= K; ++k) {
        std::vector<double> profile(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double cell = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            profile[i] = std::cos(static_cast<double>(k - 1) * std::numbers::pi * cell);
        }
        modes.push_back({Field(grid, std::move(profile)), std::pow(static_cast<double>(k), -decay)});
    }
    NoiseModel model(grid, std::move(modes), {c1}, decay, "constant+cosine");
    model.require_nondegenerate();
    return model;
}

void noise_increment(const NoiseModel& model, double dt, std::uint64_t seed, std::uint64_t step,
                     std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double sqdt = std::sqrt(dt);
    const auto modes = model.modes();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (modes[k].amplitude == 0.0) continue;
        const double coeff = modes[k].amplitude * sqdt * rng::standard_normal(seed, step, k);
        const auto profile = modes[k].profile.values();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += coeff * profile[i];
    }
}

Field noise_increment(const NoiseModel& model, double dt, std::uint64_t seed, std::uint64_t step) {
    std::vector<double> out(model.grid().size());
    noise_increment(model, dt, seed, step, out);
    return Field(model.grid(), std::move(out));
}

std::size_t steps_for(double T, double dt) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(T >= 0.0)) throw ConfigError("time horizon must be nonnegative");
    return static_cast<std::size_t>(std::llround(T / dt));
}

NoisePath sample_path(const NoiseModel& model, double dt, std::size_t n_steps, std::uint64_t seed) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    NoisePath path;
    path.times.reserve(n_steps + 1);
    path.increments.reserve(n_steps);
    path.cumulative.reserve(n_steps + 1);
    path.times.push_back(0.0);
    path.cumulative.push_back(Field::zeros(model.grid()));
    for (std::size_t n = 0; n < n_steps; ++n) {
        path.increments.push_back(noise_increment(model, dt, seed, n));
        path.cumulative.push_back(path.cumulative.back() + path.increments.back());
        path.times.push_back(static_cast<double>(n + 1) * dt);
    }
    return path;
}

double tube_sup(const NoiseModel& model, double S, double dt, std::uint64_t seed) {
    const std::size_t n_steps = steps_for(S, dt);
    const Grid& grid = model.grid();
    const auto g = model.forcing().values();
    std::vector<double> w(grid.size(), 0.0);
    std::vector<double> inc(grid.size());
    double worst = 0.0;
    for (std::size_t n = 0; n < n_steps; ++n) {
        noise_increment(model, dt, seed, n, inc);
        const double t = static_cast<double>(n + 1) * dt;
        double s = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] += inc[i];
            const double d = w[i] - t * g[i];
            s += d * d;
        }
        worst = std::max(worst, std::sqrt(grid.h() * s));
    }
    return worst;
}

ProportionEstimate tube_probability(const NoiseModel& model, double S, double beta, double dt,
                                    std::size_t n_samples, std::uint64_t seed, std::size_t workers) {
    if (!(S >= 0.0) || !(beta >= 0.0) || !(dt > 0.0)) {
        throw ConfigError("tube probability needs S >= 0, beta >= 0, dt > 0");
    }
    const auto inside = parallel_map(n_samples, workers, [&](std::size_t i) {
        return tube_sup(model, S, dt, rng::sample_seed(seed, i)) <= beta ? 1 : 0;
    });
    std::size_t hits = 0;
    for (int v : inside) hits += static_cast<std::size_t>(v);
    return wilson_from_counts(hits, n_samples);
}

}  // namespace spme
