#include "spme/monotone.hpp"

#include <cmath>
#include <string>

#include "spme/errors.hpp"

namespace spme {

Interval phi_selection(double x) {
    if (x > 1.0 || x < -1.0) return {x, x};
    if (x == 1.0) return {0.0, 1.0};
    if (x == -1.0) return {-1.0, 0.0};
    return {0.0, 0.0};
}

double psi(double x) {
    if (std::abs(x) <= 1.0) return 0.0;
    return 0.5 * (x * x - 1.0);
}

double varphi_functional(const Field& u) {
    double s = 0.0;
    for (double v : u.values()) s += psi(v);
    return u.grid().h() * s;
}

YosidaParams::YosidaParams(double epsilon) : epsilon_(epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw ConfigError("epsilon must lie in (0, 1], got " + std::to_string(epsilon));
    }
}

double resolvent(const YosidaParams& p, double x) {
    const double eps = p.epsilon();
    const double ax = std::abs(x);
    if (ax <= 1.0) return x;
    if (ax <= 1.0 + eps) return std::copysign(1.0, x);
    return x / (1.0 + eps);
}

double yosida(const YosidaParams& p, double x) {
    const double eps = p.epsilon();
    if (x > 1.0 + eps || x < -1.0 - eps) return x / (1.0 + eps);
    if (x > 1.0) return (x - 1.0) / eps;
    if (x < -1.0) return (x + 1.0) / eps;
    return 0.0;
}

double yosida_derivative(const YosidaParams& p, double x) {
    const double eps = p.epsilon();
    if (x >= 1.0 + eps || x < -1.0 - eps) return 1.0 / (1.0 + eps);
    if (x >= 1.0 || x < -1.0) return 1.0 / eps;
    return 0.0;
}

double yosida_potential(const YosidaParams& p, double x) {
    const double r = resolvent(p, x);
    return psi(r) + (x - r) * (x - r) / (2.0 * p.epsilon());
}

}  // namespace spme
