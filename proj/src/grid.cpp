#include "spme/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spme/errors.hpp"
#include "spme/tridiagonal.hpp"

namespace spme {

Grid::Grid(std::size_t n_interior) : n_(n_interior), h_(0.0) {
    if (n_interior == 0) throw ConfigError("grid needs at least one interior node");
    h_ = 2.0 / static_cast<double>(n_interior + 1);
}

std::vector<double> Grid::nodes() const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = node(i);
    return x;
}

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("field has " + std::to_string(values_.size()) + " values, grid has " +
                          std::to_string(grid_.size()) + " interior nodes");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw NumericalError("field contains a non-finite value");
    }
}

Field Field::zeros(const Grid& grid) { return Field(grid, std::vector<double>(grid.size(), 0.0)); }

Field Field::constant(const Grid& grid, double value) {
    return Field(grid, std::vector<double>(grid.size(), value));
}

Field Field::from_function(const Grid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
    return Field(grid, std::move(v));
}

Field Field::operator+(const Field& other) const {
    require_same_grid(*this, other);
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] + other.values_[i];
    return Field(grid_, std::move(out));
}

Field Field::operator-(const Field& other) const {
    require_same_grid(*this, other);
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] - other.values_[i];
    return Field(grid_, std::move(out));
}

Field Field::operator*(double s) const {
    std::vector<double> out(values_);
    for (double& v : out) v *= s;
    return Field(grid_, std::move(out));
}

void require_same_grid(const Field& u, const Field& v) {
    if (!(u.grid() == v.grid())) throw GridMismatch();
}

std::vector<double> laplacian_apply(const Grid& grid, std::span<const double> u) {
    const std::size_t n = grid.size();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? u[i - 1] : 0.0;
        const double right = i + 1 < n ? u[i + 1] : 0.0;
        out[i] = (left - 2.0 * u[i] + right) * inv_h2;
    }
    return out;
}

Field laplacian_apply(const Field& u) { return Field(u.grid(), laplacian_apply(u.grid(), u.values())); }

std::vector<double> inverse_laplacian(const Grid& grid, std::span<const double> f) {
    const std::size_t n = grid.size();
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    std::vector<double> off(n, -inv_h2);
    std::vector<double> diag(n, 2.0 * inv_h2);
    return solve_tridiagonal(off, diag, off, f);
}

Field inverse_laplacian(const Field& f) { return Field(f.grid(), inverse_laplacian(f.grid(), f.values())); }

double inner_l2(const Field& u, const Field& v) {
    require_same_grid(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return u.grid().h() * s;
}

double norm_l2(const Field& u) { return std::sqrt(inner_l2(u, u)); }

double norm_linf(const Field& u) {
    double m = 0.0;
    for (double v : u.values()) m = std::max(m, std::abs(v));
    return m;
}

double inner_hminus1(const Field& u, const Field& v) {
    require_same_grid(u, v);
    const std::vector<double> w = inverse_laplacian(v.grid(), v.values());
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * w[i];
    return u.grid().h() * s;
}

double norm_hminus1(const Grid& grid, std::span<const double> u) {
    const std::vector<double> w = inverse_laplacian(grid, u);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * w[i];
    // The quadratic form is positive definite; clamp rounding noise at zero.
    return std::sqrt(std::max(0.0, grid.h() * s));
}

double norm_hminus1(const Field& u) { return norm_hminus1(u.grid(), u.values()); }

bool field_leq(const Field& u, const Field& v) {
    require_same_grid(u, v);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] > v[i]) return false;
    }
    return true;
}

double clip_distance(const Field& u, double radius) {
    if (!(radius > 0.0)) throw ConfigError("clip radius must be positive");
    std::vector<double> excess(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        excess[i] = u[i] - std::clamp(u[i], -radius, radius);
    }
    return norm_hminus1(u.grid(), excess);
}

}  // namespace spme
