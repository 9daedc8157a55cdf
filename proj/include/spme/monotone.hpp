#pragma once

#include "spme/grid.hpp"

namespace spme {

/// Closed interval [lo, hi]; degenerate when lo == hi.
struct Interval {
    double lo;
    double hi;

    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    bool is_point() const noexcept { return lo == hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// The maximal monotone graph of x -> x * 1{|x| > 1}:
/// zero on (-1, 1), identity outside [-1, 1], [0, 1] at x = 1, [-1, 0] at x = -1.
Interval phi_selection(double x);

/// psi(x) = (x^2 - 1)/2 for |x| > 1, zero otherwise; the antiderivative of phi.
double psi(double x);

/// h * sum psi(u_i): quadrature of the energy integral of psi(u).
double varphi_functional(const Field& u);

/// Regularisation parameter of the Yosida approximation, restricted to (0, 1].
class YosidaParams {
public:
    explicit YosidaParams(double epsilon);
    double epsilon() const noexcept { return epsilon_; }

private:
    double epsilon_;
};

/// Unique s with s + eps*phi(s) containing x.
double resolvent(const YosidaParams& p, double x);

/// phi^eps(x) = (x - R^eps(x)) / eps, evaluated by branch:
///   0                 |x| <= 1
///   (x - 1)/eps       1 < x <= 1 + eps
///   (x + 1)/eps       -1 - eps <= x < -1
///   x/(1 + eps)       |x| > 1 + eps
double yosida(const YosidaParams& p, double x);

/// Slope of phi^eps; right-hand slope at the kinks |x| = 1 and |x| = 1 + eps.
double yosida_derivative(const YosidaParams& p, double x);

/// eps*x + phi^eps(x), the nonlinearity under the Laplacian in the regularised equation.
/// Moreau envelope psi^eps(x) = psi(R^eps x) + (x - R^eps x)^2 / (2 eps); its derivative is phi^eps.
double yosida_potential(const YosidaParams& p, double x);

inline double regularised_flux(const YosidaParams& p, double x) { return p.epsilon() * x + yosida(p, x); }
inline double regularised_flux_slope(const YosidaParams& p, double x) {
    return p.epsilon() + yosida_derivative(p, x);
}

}  // namespace spme
