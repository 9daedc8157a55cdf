#include <doctest.h>

#include <cmath>
#include <random>

#include "spme/det_solver.hpp"
#include "spme/errors.hpp"
#include "spme/sde_solver.hpp"
#include "spme/tridiagonal.hpp"

using namespace spme;

namespace {

NoiseModel silent_model(const Grid& g) {
    std::vector<NoiseMode> modes{{Field::constant(g, 1.0), 0.0}};
    return NoiseModel(g, std::move(modes), {}, 0.0, "silent");
}

Field random_field_uniform(const Grid& g, std::mt19937_64& gen, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(g.size());
    for (double& x : v) x = d(gen);
    return Field(g, std::move(v));
}

// (I - dt * k * Delta_h)^{-1} b for a constant conductivity k.
Field linear_heat_implicit(const Field& b, double dt, double k) {
    const Grid& g = b.grid();
    const double c = dt * k / (g.h() * g.h());
    std::vector<double> off(g.size(), -c), diag(g.size(), 1.0 + 2.0 * c);
    return Field(g, solve_tridiagonal(off, diag, off, b.values()));
}

SolverConfig config(double eps, double dt, double T = 1.0) {
    SolverConfig cfg;
    cfg.epsilon = eps;
    cfg.dt = dt;
    cfg.T = T;
    return cfg;
}

}  // namespace

TEST_CASE("solver configuration") {
    const Grid g(63);
    SolverConfig cfg = config(0.05, 1e-3);
    CHECK_NOTHROW(cfg.validate(g));
    cfg.scheme = Scheme::Explicit;
    CHECK_THROWS_AS(cfg.validate(g), ConfigError);
    cfg.dt = cfg.explicit_dt_limit(g);
    CHECK_NOTHROW(cfg.validate(g));
    CHECK(cfg.explicit_dt_limit(g) == doctest::Approx(g.h() * g.h() / (2.0 * (0.05 + 20.0))));

    SolverConfig bad = config(1.5, 1e-3);
    CHECK_THROWS_AS(bad.validate(g), ConfigError);
    bad = config(0.1, -1.0);
    CHECK_THROWS_AS(bad.validate(g), ConfigError);
    bad = config(0.1, 1e-3);
    bad.save_every = 0;
    CHECK_THROWS_AS(bad.validate(g), ConfigError);
}

TEST_CASE("implicit step") {
    const Grid g(63);
    SUBCASE("zero is a fixed point") {
        const SolverConfig cfg = config(0.1, 1e-2);
        CHECK(step_implicit(Field::zeros(g), Field::zeros(g), cfg) == Field::zeros(g));
    }
    SUBCASE("degenerate phase only feels the viscosity") {
        const SolverConfig cfg = config(1e-6, 1e-3);
        const Field X = Field::from_function(g, [](double x) { return 0.8 * std::cos(M_PI * x / 2.0); });
        const Field Y = step_implicit(X, Field::zeros(g), cfg);
        const Field heat = linear_heat_implicit(X, cfg.dt, cfg.epsilon);
        CHECK(norm_linf(Y - heat) < 1e-12);
        const double bound = 4.0 * cfg.dt * cfg.epsilon / (g.h() * g.h()) * norm_linf(X);
        CHECK(norm_linf(Y - X) <= bound);
    }
    SUBCASE("residual below tolerance on random inputs") {
        std::mt19937_64 gen(1);
        for (double eps : {1e-3, 0.05, 1.0}) {
            for (double dt : {1e-4, 1e-2, 0.1}) {
                SolverConfig cfg = config(eps, dt);
                for (int trial = 0; trial < 10; ++trial) {
                    const Field X = random_field_uniform(g, gen, -5.0, 5.0);
                    const Field dW = random_field_uniform(g, gen, -0.3, 0.3);
                    const Field Y = step_implicit(X, dW, cfg);
                    CHECK(implicit_residual(Y, X + dW, cfg) <= cfg.newton_tol);
                }
            }
        }
    }
    SUBCASE("iteration cap reports divergence") {
        SolverConfig cfg = config(1e-3, 0.1);
        cfg.newton_max_iter = 1;
        const Field X = Field::from_function(g, [](double x) { return 4.0 * std::sin(5.0 * x); });
        CHECK_THROWS_AS(step_implicit(X, Field::zeros(g), cfg), SolverDivergence);
    }
}

TEST_CASE("explicit step") {
    const Grid g(15);
    SolverConfig cfg = config(0.2, 1e-4);
    cfg.scheme = Scheme::Explicit;
    CHECK(step_explicit(Field::zeros(g), Field::zeros(g), cfg) == Field::zeros(g));

    SUBCASE("eigenmode decays by the discrete heat factor") {
        // In |x| < 1 the flux is eps * x, so an eigenvector of Delta_h is scaled by
        // 1 - dt eps lambda (explicit) and 1 / (1 + dt eps lambda) (implicit).
        const double lambda = 4.0 / (g.h() * g.h()) * std::pow(std::sin(M_PI * g.h() / 4.0), 2);
        const Field e1 = Field::from_function(g, [](double x) { return 0.5 * std::sin(M_PI * (x + 1.0) / 2.0); });
        const Field ex = step_explicit(e1, Field::zeros(g), cfg);
        const Field im = step_implicit(e1, Field::zeros(g), cfg);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(ex[i] == doctest::Approx(e1[i] * (1.0 - cfg.dt * cfg.epsilon * lambda)).epsilon(1e-12));
            CHECK(im[i] == doctest::Approx(e1[i] / (1.0 + cfg.dt * cfg.epsilon * lambda)).epsilon(1e-12));
        }
    }

    SUBCASE("one-step gap to the implicit scheme is second order") {
        // Every node sits on the branch |x| > 1 + eps, where the flux is linear.
        const Field X = Field::from_function(g, [](double x) { return 3.0 + 0.5 * std::cos(M_PI * x / 2.0); });
        auto gap = [&](double dt) {
            SolverConfig c = cfg;
            c.dt = dt;
            return norm_l2(step_explicit(X, Field::zeros(g), c) - step_implicit(X, Field::zeros(g), c));
        };
        const double ratio = gap(1e-4) / gap(5e-5);
        CHECK(ratio > 3.6);
        CHECK(ratio < 4.4);
    }

    SUBCASE("unstable explicit configuration rejected before stepping") {
        SolverConfig c = cfg;
        c.dt = 1.0;
        CHECK_THROWS_AS(step_explicit(Field::zeros(g), Field::zeros(g), c), ConfigError);
    }
}

TEST_CASE("simulate") {
    const Grid g(31);
    SUBCASE("zero noise from zero stays zero") {
        const Trajectory t = simulate(Field::zeros(g), silent_model(g), config(0.1, 1e-2, 0.5));
        CHECK(t.summaries.size() == 51);
        for (const auto& s : t.summaries) {
            CHECK(s.l2 == 0.0);
            CHECK(s.linf == 0.0);
            CHECK(s.hm1 == 0.0);
            CHECK(s.excess_sq == 0.0);
            CHECK(s.clipdist == 0.0);
        }
    }
    SUBCASE("snapshot cadence") {
        SolverConfig cfg = config(0.1, 1e-2, 0.53);
        cfg.save_every = 5;
        const Trajectory t = simulate(Field::constant(g, 2.0), default_model(g, 4, 1.0, 2.0), cfg);
        CHECK(t.snapshots.size() == 53 / 5 + 1);
        CHECK(t.times.size() == t.snapshots.size());
        CHECK(t.summaries.size() == 54);
    }
    SUBCASE("zero noise reproduces the deterministic flow without forcing") {
        const SolverConfig cfg = config(0.05, 5e-3, 0.5);
        const Field x0 = Field::from_function(g, [](double x) { return 3.0 * std::cos(2.0 * x); });
        const Trajectory t = simulate(x0, silent_model(g), cfg);
        Field u = x0;
        for (std::size_t n = 1; n < t.snapshots.size(); ++n) {
            u = det_step(u, Field::zeros(g), cfg);
            CHECK(norm_linf(u - t.snapshots[n]) <= 1e-10);
        }
    }
    SUBCASE("noise-free decay of the psi energy") {
        const SolverConfig cfg = config(0.05, 5e-3, 1.0);
        const Field x0 = Field::from_function(g, [](double x) { return 4.0 * std::cos(3.0 * x); });
        const Trajectory t = simulate(x0, silent_model(g), cfg);
        for (std::size_t n = 1; n < t.snapshots.size(); ++n) {
            CHECK(varphi_functional(t.snapshots[n]) <= varphi_functional(t.snapshots[n - 1]) + 1e-12);
        }
    }
    SUBCASE("determinism") {
        const SolverConfig cfg = config(0.05, 1e-2, 0.3);
        const NoiseModel m = default_model(g, 4, 1.0, 2.0);
        const Trajectory a = simulate(Field::constant(g, 1.5), m, cfg);
        const Trajectory b = simulate(Field::constant(g, 1.5), m, cfg);
        CHECK(a.snapshots == b.snapshots);
    }
}

TEST_CASE("pathwise energy inequality") {
    // ||Y||^2 <= ||X + dW||^2 for the implicit step, hence
    // ||X_{n+1}||^2 - ||X_n||^2 - 2 <X_n, dW_n> <= ||dW_n||^2.
    const Grid g(63);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    const SolverConfig cfg = config(0.05, 1e-2, 2.0);
    PathIntegrator path(Field::from_function(g, [](double x) { return 4.0 * (1.0 - x * x); }), m, cfg, 77);
    double mean_gap = 0.0;
    for (int n = 0; n < 200; ++n) {
        const Field X = path.state();
        const Field dW = path.next_increment();
        path.advance_with(dW);
        const Field& Y = path.state();
        const double lhs = inner_l2(Y, Y) - inner_l2(X, X) - 2.0 * inner_l2(X, dW);
        CHECK(lhs <= inner_l2(dW, dW) + 1e-9);
        mean_gap += inner_l2(dW, dW);
    }
    mean_gap /= 200.0;
    CHECK(mean_gap == doctest::Approx(cfg.dt * m.trace()).epsilon(0.25));
}

TEST_CASE("coupled simulation") {
    const Grid g(31);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    const SolverConfig cfg = config(0.05, 1e-2, 1.0);
    const Field x0 = Field::from_function(g, [](double x) { return 3.0 * std::sin(2.0 * x); });
    const Field y0 = Field::from_function(g, [](double x) { return -2.0 + x; });

    const CoupledTrajectory same = simulate_coupled(x0, x0, m, cfg);
    for (double d : same.distance) CHECK(d == 0.0);

    const CoupledTrajectory c = simulate_coupled(x0, y0, m, cfg);
    CHECK(c.distance.size() == cfg.n_steps() + 1);
    for (std::size_t n = 1; n < c.distance.size(); ++n) CHECK(c.distance[n] <= c.distance[n - 1] + 1e-8);

    const CoupledTrajectory swapped = simulate_coupled(y0, x0, m, cfg);
    CHECK(swapped.first.snapshots == c.second.snapshots);
    CHECK(swapped.second.snapshots == c.first.snapshots);
}

namespace {

// Least-squares slope of log sup_t ||X^eps - X^{eps/2}||_{-1}^2 against log eps.
double epsilon_consistency_slope() {
    const Grid g(63);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    const Field x0 = Field::from_function(g, [](double x) { return 2.5 * std::cos(M_PI * x / 2.0) - 0.5; });
    auto sup_gap = [&](double eps) {
        const SolverConfig a = config(eps, 2e-3, 1.0);
        const SolverConfig b = config(eps / 2.0, 2e-3, 1.0);
        PathIntegrator pa(x0, m, a, 5), pb(x0, m, b, 5);
        double worst = 0.0;
        for (std::size_t n = 0; n < a.n_steps(); ++n) {
            pa.advance();
            pb.advance();
            worst = std::max(worst, std::pow(norm_hminus1(pa.state() - pb.state()), 2));
        }
        return worst;
    };
    std::vector<double> xs, ys;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        xs.push_back(std::log(eps));
        ys.push_back(std::log(sup_gap(eps)));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / 4.0;
        my += ys[i] / 4.0;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("epsilon consistency: gap shrinks at least linearly in eps") {
    const double slope = epsilon_consistency_slope();
    MESSAGE("epsilon-consistency log-log slope: " << slope);
    CHECK(slope >= 0.7);
}

// The O(eps) estimate is only an upper bound; on smooth data the gap closes
// closer to eps^2, so the two-sided window is reported but allowed to fail.
TEST_CASE("epsilon consistency: slope within 1 +- 0.3" * doctest::may_fail()) {
    const double slope = epsilon_consistency_slope();
    CHECK(slope >= 0.7);
    CHECK(slope <= 1.3);
}
