#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace spme {

/// Uniform grid on (-1, 1) with homogeneous Dirichlet data at both ends.
///
/// Only interior nodes x_i = -1 + i*h, i = 1..n, carry unknowns; the boundary
/// values are implicitly zero.
class Grid {
public:
    explicit Grid(std::size_t n_interior);

    std::size_t size() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    double node(std::size_t i) const noexcept { return -1.0 + static_cast<double>(i + 1) * h_; }
    std::vector<double> nodes() const;

    friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.n_ == b.n_; }

private:
    std::size_t n_;
    double h_;
};

/// Grid function: one finite value per interior node.
class Field {
public:
    Field(Grid grid, std::vector<double> values);

    static Field zeros(const Grid& grid);
    static Field constant(const Grid& grid, double value);
    static Field from_function(const Grid& grid, const std::function<double(double)>& f);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    Field operator+(const Field& other) const;
    Field operator-(const Field& other) const;
    Field operator*(double s) const;
    friend Field operator*(double s, const Field& f) { return f * s; }

    friend bool operator==(const Field& a, const Field& b) noexcept {
        return a.grid_ == b.grid_ && a.values_ == b.values_;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

void require_same_grid(const Field& u, const Field& v);

/// (Delta_h u)_i = (u_{i-1} - 2u_i + u_{i+1}) / h^2 with zero boundary values.
Field laplacian_apply(const Field& u);
std::vector<double> laplacian_apply(const Grid& grid, std::span<const double> u);

/// Solves -Delta_h v = f by tridiagonal elimination.
Field inverse_laplacian(const Field& f);
std::vector<double> inverse_laplacian(const Grid& grid, std::span<const double> f);

double inner_l2(const Field& u, const Field& v);
double norm_l2(const Field& u);
double norm_linf(const Field& u);

/// <u, v>_{-1} = h * sum u_i ((-Delta_h)^{-1} v)_i
double inner_hminus1(const Field& u, const Field& v);
double norm_hminus1(const Field& u);
double norm_hminus1(const Grid& grid, std::span<const double> u);

/// Nodewise order u <= v.
bool field_leq(const Field& u, const Field& v);

/// ||u - clip(u, [-R, R])||_{-1}. Upper bound for the H^{-1} distance from u
/// to the open L-infinity ball of radius R.
double clip_distance(const Field& u, double radius);

}  // namespace spme
