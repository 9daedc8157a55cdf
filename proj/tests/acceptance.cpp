// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Runtime budgets are part of each criterion and are checked against wall time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spme/det_solver.hpp"
#include "spme/ergodics.hpp"
#include "spme/experiment.hpp"
#include "spme/io.hpp"
#include "spme/monotone.hpp"

#ifndef SPME_CLI_PATH
#define SPME_CLI_PATH "spme"
#endif

using namespace spme;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

SolverConfig solver(double eps, double dt, double T = 1.0, std::uint64_t seed = 1) {
    SolverConfig cfg;
    cfg.epsilon = eps;
    cfg.dt = dt;
    cfg.T = T;
    cfg.seed = seed;
    return cfg;
}

// Branch formula for phi^eps written out independently of the library.
double yosida_oracle(double eps, double x) {
    if (x >= -1.0 && x <= 1.0) return 0.0;
    if (x > 1.0 && x <= 1.0 + eps) return (x - 1.0) / eps;
    if (x >= -1.0 - eps && x < -1.0) return (x + 1.0) / eps;
    return x / (1.0 + eps);
}

Outcome yosida_exactness() {
    std::mt19937_64 gen(20240101);
    std::uniform_real_distribution<double> ue(0.0, 1.0), ux(-10.0, 10.0);
    double worst_branch = 0.0, worst_resolvent = 0.0;
    std::size_t bound_checked = 0, bound_failed = 0;
    for (int i = 0; i < 100000; ++i) {
        const double eps = 1.0 - ue(gen);  // (0, 1]
        const double x = ux(gen);
        const YosidaParams p(eps);
        const double y = yosida(p, x);
        worst_branch = std::max(worst_branch, std::abs(y - yosida_oracle(eps, x)));

        // s + eps*phi(s) contains x, with s = R^eps(x)
        const double s = resolvent(p, x);
        const Interval sel = phi_selection(s);
        const double lo = s + eps * sel.lo, hi = s + eps * sel.hi;
        const double miss = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
        worst_resolvent = std::max(worst_resolvent, miss);
        // phi^eps(x) = (x - R^eps(x)) / eps as well
        worst_resolvent = std::max(worst_resolvent, std::abs(y - (x - s) / eps) * eps);

        if (std::abs(x) >= 1.0 + eps) {
            ++bound_checked;
            if (std::abs(y) < std::abs(x) / 2.0) ++bound_failed;
        }
    }
    Outcome o;
    o.passed = worst_branch <= 1e-12 && worst_resolvent <= 1e-12 && bound_failed == 0;
    o.detail = "max branch error " + fmt(worst_branch) + ", max resolvent defect " + fmt(worst_resolvent) +
               ", |phi^eps(x)| >= |x|/2 on " + std::to_string(bound_checked - bound_failed) + "/" +
               std::to_string(bound_checked) + " samples";
    return o;
}

// L2(-1,1) distance between the piecewise-linear reconstruction of nodal values
// (zero at x = +-1) and f, by 5-point Gauss-Legendre on every cell.
double reconstruction_l2_error(const Field& u, const std::function<double(double)>& f) {
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                 0.2369268850561891};
    const Grid& g = u.grid();
    const double h = g.h();
    double s = 0.0;
    for (std::size_t c = 0; c <= g.size(); ++c) {
        const double a = -1.0 + static_cast<double>(c) * h;
        const double ua = c == 0 ? 0.0 : u[c - 1];
        const double ub = c == g.size() ? 0.0 : u[c];
        for (int q = 0; q < 5; ++q) {
            const double t = 0.5 * (gx[q] + 1.0);
            const double x = a + t * h;
            const double e = ua + t * (ub - ua) - f(x);
            s += 0.5 * h * gw[q] * e * e;
        }
    }
    return std::sqrt(s);
}

Outcome discrete_calculus() {
    // Defects are measured against ||w|| ||z||, the scale of both sides. Dividing by
    // |<w, z>| instead is ill-conditioned for random fields with <w, z> near zero.
    double worst_sbp = 0.0, worst_naive = 0.0;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (std::size_t n : {63, 127, 255}) {
        const Grid g(n);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = U(gen);
                b[i] = U(gen);
            }
            const Field w(g, a), z(g, b);
            // <Delta w, z>_{-1} = -<w, z>, and -Delta_h is symmetric in L2
            const double lhs = inner_hminus1(laplacian_apply(w), z);
            const double rhs = -inner_l2(w, z);
            worst_sbp = std::max(worst_sbp, std::abs(lhs - rhs) / (norm_l2(w) * norm_l2(z)));
            worst_naive = std::max(worst_naive, std::abs(lhs - rhs) / std::abs(rhs));
            const Field lw = laplacian_apply(w), lz = laplacian_apply(z);
            const double s1 = inner_l2(lw, z), s2 = inner_l2(w, lz);
            worst_sbp = std::max(worst_sbp, std::abs(s1 - s2) / (norm_l2(lw) * norm_l2(z)));
        }
    }

    const auto exact = [](double x) { return 1.0 - x * x; };
    std::vector<double> errors;
    double nodal = 0.0;
    for (std::size_t n : {63, 127, 255}) {
        const Grid g(n);
        const Field v = inverse_laplacian(Field::constant(g, 2.0));
        nodal = std::max(nodal, norm_linf(v - Field::from_function(g, exact)));
        errors.push_back(reconstruction_l2_error(v, exact));
    }
    const double r1 = errors[0] / errors[1], r2 = errors[1] / errors[2];
    Outcome o;
    o.passed = worst_sbp <= 1e-12 && r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5;
    o.detail = "SBP relative defect " + fmt(worst_sbp) + " (relative to |<w,z>|: " + fmt(worst_naive) +
               "); L2 error ratios h/(h/2) " + fmt(r1) + ", " + fmt(r2) +
               " (nodal error " + fmt(nodal) + ", stencil exact on quadratics)";
    return o;
}

Outcome pathwise_contraction() {
    const Grid g(63);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    const SolverConfig cfg = solver(0.05, 1e-3, 1.0);
    std::vector<std::pair<Field, Field>> pairs;
    for (std::size_t p = 0; p < 20; ++p) {
        pairs.emplace_back(random_field(g, 4.0, 3, 2 * p), random_field(g, 4.0, 3, 2 * p + 1));
    }
    const ErgodicsReport r = contraction_suite(pairs, m, cfg, 50, workers());
    const double mono = r.details["step_monotone_fraction"].get<double>();
    Outcome o;
    o.passed = r.estimate == 1.0 && mono >= 0.99;
    o.detail = "terminal contraction " + std::to_string(r.details["terminal_contractions"].get<std::size_t>()) + "/" +
               std::to_string(r.n_paths) + ", step-monotone fraction " + fmt(mono) + ", max step increase " +
               fmt(r.details["max_step_increase"].get<double>());
    return o;
}

Outcome deterministic_fixed_point() {
    const Grid g(255);
    const Field gf = Field::constant(g, 4.0);
    SolverConfig cfg = solver(1e-3, 1e-2);
    cfg.save_every = 10;
    const double T = 50.0;
    const DetTrajectory up = det_solve(Field::constant(g, 4.0), gf, cfg, T);
    const DetTrajectory down = det_solve(Field::constant(g, -4.0), gf, cfg, T);

    const Field profile = Field::from_function(g, [](double x) { return std::max(2.0 * (1.0 - x * x), 1.0); });
    const double d_up = norm_hminus1(up.snapshots.back() - profile);
    const double d_down = norm_hminus1(down.snapshots.back() - profile);

    std::vector<Field> starts;
    for (std::size_t k = 0; k < 16; ++k) starts.push_back(random_field(g, 4.0, 41, k));
    starts.push_back(Field::zeros(g));
    starts.push_back(Field::from_function(g, [](double x) { return 4.0 * std::sin(5.0 * x); }));
    starts.push_back(Field::from_function(g, [](double x) { return x < 0.0 ? -4.0 : 4.0; }));
    std::size_t sandwiched = 0;
    for (const Field& x0 : starts) {
        const DetTrajectory t = det_solve(x0, gf, cfg, T);
        bool ok = true;
        for (std::size_t k = 0; k < t.snapshots.size() && ok; ++k) {
            const Field& u = t.snapshots[k];
            for (std::size_t i = 0; i < u.size(); ++i) {
                if (u[i] > up.snapshots[k][i] + 1e-10 || u[i] < down.snapshots[k][i] - 1e-10) {
                    ok = false;
                    break;
                }
            }
        }
        sandwiched += ok ? 1 : 0;
    }
    Outcome o;
    o.passed = d_up <= 1e-2 && d_down <= 1e-2 && sandwiched == starts.size();
    o.detail = "H^-1 distance from +4: " + fmt(d_up) + ", from -4: " + fmt(d_down) + "; sandwiched " +
               std::to_string(sandwiched) + "/" + std::to_string(starts.size()) + " starts";
    return o;
}

Outcome comparison_principle() {
    const Grid g(63);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    const SolverConfig cfg = solver(0.05, 1e-3, 1.0);
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> U(-4.0, 4.0), gap(0.0, 1.0);
    std::size_t passed = 0;
    double worst = -INFINITY;
    for (int p = 0; p < 100; ++p) {
        std::vector<double> a(g.size()), b(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            a[i] = U(gen);
            b[i] = a[i] + gap(gen) * gap(gen) * 2.0;
        }
        const ComparisonReport r = comparison_check(Field(g, a), Field(g, b), m.forcing(), cfg, cfg.T, 1e-10);
        passed += r.passed ? 1 : 0;
        if (r.first_violation) worst = std::max(worst, r.first_violation->gap);
    }
    Outcome o;
    o.passed = passed == 100;
    o.detail = "order preserved in " + std::to_string(passed) + "/100 pairs at every saved time";
    if (std::isfinite(worst)) o.detail += ", worst violation " + fmt(worst);
    return o;
}

Outcome energy_scaling() {
    const Grid g(63);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    const SolverConfig cfg = solver(0.05, 1e-3);
    const Field x0 = random_field(g, 4.0, 17, 0);
    std::vector<double> means;
    for (double T : {5.0, 10.0, 20.0}) {
        const ErgodicsReport r = occupation_average(x0, OccupationSpec{4.0, 0.1, T}, m, cfg, 100, workers());
        means.push_back(r.details["excess_sq_time_mean"].get<double>());
    }
    const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    Outcome o;
    o.passed = std::all_of(means.begin(), means.end(), [](double v) { return std::isfinite(v); }) && *lo > 0.0 &&
               *hi <= 2.0 * *lo;
    o.detail = "time-mean of (|X|_inf - 1)_+^2 at T = 5, 10, 20: " + fmt(means[0]) + ", " + fmt(means[1]) + ", " +
               fmt(means[2]) + " (max/min " + fmt(*hi / *lo) + ")";
    return o;
}

Outcome noise_tube() {
    const Grid g(63);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    std::vector<ProportionEstimate> est;
    for (double beta : {1.0, 2.0, 4.0}) est.push_back(tube_probability(m, 0.5, beta, 1e-3, 10000, 1, workers()));
    const bool monotone = est[0].estimate <= est[1].estimate && est[1].estimate <= est[2].estimate;
    Outcome o;
    o.passed = est[1].estimate > 0.0 && est[1].ci_low > 0.0 && monotone;
    o.detail = "P(tube, beta=2) = " + fmt(est[1].estimate) + " [" + fmt(est[1].ci_low) + ", " + fmt(est[1].ci_high) +
               "]; beta = 1, 2, 4: " + fmt(est[0].estimate) + ", " + fmt(est[1].estimate) + ", " +
               fmt(est[2].estimate);
    return o;
}

Outcome accessibility_lower_bound() {
    const Grid g(63);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    // eps = 0.01 keeps the regularised equilibrium within delta/8 of u_inf, so the pilot can settle.
    SolverConfig cfg = solver(0.01, 1e-2);
    const double delta = 0.1, R = 4.0;
    const auto S = pilot_horizon(m, cfg, R, delta, 50.0);
    if (!S) return {false, "pilot run never settled within delta/8"};

    bool ok = true;
    std::string detail = "S = " + fmt(*S);
    for (double c : {3.0, -3.0, 0.0}) {
        const Field x0 = Field::constant(g, c);
        const ErgodicsReport gamma = accessibility(x0, m, cfg, *S, delta, R, 1000, workers());
        const ErgodicsReport lb = lower_bound(x0, m, cfg, delta, {5.0, 10.0, 20.0}, 100, workers());
        const ErgodicsReport occ = occupation_average(x0, OccupationSpec{R, delta, 20.0}, m, cfg, 100, workers());
        const auto chain = product_chain_check(lb.estimate, lb.n_paths, gamma.estimate, gamma.n_paths, occ.estimate,
                                               occ.n_paths);
        const bool here = gamma.ci_low > 0.0 && lb.ci_low > 0.0 && lb.passed && chain["holds"].get<bool>();
        ok = ok && here;
        detail += "; x0=" + fmt(c) + ": gamma " + fmt(gamma.estimate) + " [" + fmt(gamma.ci_low) + "], LB(T=20) " +
                  fmt(lb.estimate) + " [" + fmt(lb.ci_low) + "], occupation " + fmt(occ.estimate) + ", chain " +
                  (chain["holds"].get<bool>() ? "holds" : "fails");
    }
    return {ok, detail};
}

Outcome e_property() {
    const Grid g(63);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    const SolverConfig cfg = solver(0.05, 1e-3);
    std::vector<std::pair<Field, Field>> pairs;
    for (std::size_t p = 0; p < 10; ++p) {
        pairs.emplace_back(random_field(g, 3.0, 5, 2 * p), random_field(g, 3.0, 5, 2 * p + 1));
    }
    const ErgodicsReport r = e_property_probe(pairs, {capped_distance_functional(Field::zeros(g))}, m, cfg,
                                              {0.1, 0.5, 1.0, 2.0}, 50, workers());
    double slack = INFINITY;
    for (const auto& c : r.details["cells"]) {
        slack = std::min(slack, c["lipschitz_bound"].get<double>() + 3.0 * c["std_error"].get<double>() -
                                    c["gap"].get<double>());
    }
    Outcome o;
    o.passed = r.passed && r.details["cells_total"].get<std::size_t>() == 40;
    o.detail = std::to_string(r.details["cells_holding"].get<std::size_t>()) + "/" +
               std::to_string(r.details["cells_total"].get<std::size_t>()) + " cells within the Lipschitz bound" +
               ", smallest margin " + fmt(slack);
    return o;
}

Outcome uniqueness_proxy() {
    const Grid g(63);
    const NoiseModel m = default_model(g, 4, 1.0, 2.0);
    const SolverConfig cfg = solver(0.05, 1e-3);
    const ErgodicsReport r = empirical_invariant(
        {Field::constant(g, -3.0), Field::zeros(g), Field::constant(g, 3.0)}, m, cfg, 100.0, 20.0, 30, true, workers());
    std::string per;
    for (const auto& [name, v] : r.details["functionals"].items()) {
        per += (per.empty() ? "" : ", ") + name + " " + fmt(v["max_discrepancy_in_se"].get<double>());
    }
    return {r.passed, "max cross-IC discrepancy " + fmt(r.estimate) + " combined SE (" + per + ")"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome reproducibility() {
    const fs::path root = fs::temp_directory_path() / "spme_acceptance_repro";
    fs::remove_all(root);
    struct Suite {
        std::string sub;
        std::vector<std::string> overrides;
    };
    const std::vector<Suite> suites = {
        {"contraction", {"experiment.parameters.n_pairs=4", "experiment.parameters.n_paths=8", "solver.T=0.2"}},
        {"occupation", {"experiment.parameters.n_paths=12", "experiment.parameters.T=2", "solver.dt=0.01"}},
        {"tube", {"experiment.parameters.n_samples=2000"}},
        {"e-property", {"experiment.parameters.n_pairs=2", "experiment.parameters.n_paths=10",
                        "experiment.parameters.t_list=[0.1,0.3]"}},
        {"invariant", {"experiment.parameters.T_long=4", "experiment.parameters.burn_in=1", "solver.dt=0.01",
                       "experiment.parameters.n_batches=10"}},
    };
    std::size_t identical = 0, total = 0;
    std::string failures;
    for (const Suite& s : suites) {
        // in-process runner
        std::string reports[2];
        for (int k = 0; k < 2; ++k) {
            RunOptions o;
            o.subcommand = s.sub;
            o.overrides = s.overrides;
            o.workers = k == 0 ? 1 : 4;
            o.output_dir = (root / (s.sub + "_lib_w" + std::to_string(o.workers))).string();
            std::ostringstream log;
            run(o, log);
            reports[k] = slurp(fs::path(*o.output_dir) / "report.json");
        }
        // command-line binary
        std::string cli_reports[2];
        for (int k = 0; k < 2; ++k) {
            const std::string w = k == 0 ? "1" : "4";
            const fs::path out = root / (s.sub + "_cli_w" + w);
            std::string cmd = std::string("\"") + SPME_CLI_PATH + "\" " + s.sub;
            for (const auto& ov : s.overrides) cmd += " --set '" + ov + "'";
            cmd += " --workers " + w + " --output '" + out.string() + "' > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) failures += " " + s.sub + "(cli exit)";
            cli_reports[k] = slurp(out / "report.json");
        }
        const bool same = !reports[0].empty() && reports[0] == reports[1] && reports[0] == cli_reports[0] &&
                          cli_reports[0] == cli_reports[1];
        identical += same ? 1 : 0;
        ++total;
        if (!same) failures += " " + s.sub;
    }
    Outcome o;
    o.passed = identical == total;
    o.detail = std::to_string(identical) + "/" + std::to_string(total) +
               " suites byte-identical across --workers 1/4, library and CLI";
    if (!failures.empty()) o.detail += "; differing:" + failures;
    return o;
}

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> check;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "Yosida exactness", 1.0, yosida_exactness},
        {2, "discrete calculus", 1.0, discrete_calculus},
        {3, "pathwise contraction", 120.0, pathwise_contraction},
        {4, "deterministic fixed point", 120.0, deterministic_fixed_point},
        {5, "comparison principle", 60.0, comparison_principle},
        {6, "energy-estimate scaling", 300.0, energy_scaling},
        {7, "noise tube", 60.0, noise_tube},
        {8, "accessibility and lower bound", 600.0, accessibility_lower_bound},
        {9, "e-property probe", 300.0, e_property},
        {10, "uniqueness proxy", 900.0, uniqueness_proxy},
        {11, "reproducibility", 600.0, reproducibility},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs <= c.budget_s;
        const bool pass = o.passed && in_budget;
        if (!pass) ++failed;
        std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
                  << fmt(secs) << " s, budget " << fmt(c.budget_s) << " s" << (in_budget ? "" : ", over budget")
                  << ")" << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
