#pragma once

// Reference computations used by the tests. Everything here is written from
// the textbook definitions and shares no code with the library beyond plain
// Eigen containers.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using ld = long double;

/// Clamped uniform knot vector, written out directly.
inline std::vector<ld> clamped_knots(ld t0, ld t1, int degree, int spans) {
    std::vector<ld> k;
    for (int i = 0; i < degree; ++i) k.push_back(t0);
    for (int s = 0; s <= spans; ++s) k.push_back(t0 + (t1 - t0) * s / spans);
    for (int i = 0; i < degree; ++i) k.push_back(t1);
    return k;
}

// Recursive definition of B_{i,k} with the right end of the domain included
// in the last non-degenerate interval.
inline ld bspline(const std::vector<ld>& knots, int i, int k, ld t) {
    if (k == 0) {
        const ld a = knots[i], b = knots[i + 1];
        if (a == b) return 0;
        const ld last = knots.back();
        if (t == last) return (b == last && a < b) ? 1 : 0;
        return (t >= a && t < b) ? 1 : 0;
    }
    ld out = 0;
    const ld d1 = knots[i + k] - knots[i];
    const ld d2 = knots[i + k + 1] - knots[i + 1];
    if (d1 > 0) out += (t - knots[i]) / d1 * bspline(knots, i, k - 1, t);
    if (d2 > 0) out += (knots[i + k + 1] - t) / d2 * bspline(knots, i + 1, k - 1, t);
    return out;
}

/// r-th derivative of B_{i,k} by the standard difference formula.
inline ld bspline_deriv(const std::vector<ld>& knots, int i, int k, int r, ld t) {
    if (r == 0) return bspline(knots, i, k, t);
    if (k == 0) return 0;
    ld out = 0;
    const ld d1 = knots[i + k] - knots[i];
    const ld d2 = knots[i + k + 1] - knots[i + 1];
    if (d1 > 0) out += k / d1 * bspline_deriv(knots, i, k - 1, r - 1, t);
    if (d2 > 0) out -= k / d2 * bspline_deriv(knots, i + 1, k - 1, r - 1, t);
    return out;
}

inline std::vector<ld> basis(ld t0, ld t1, int degree, int L, ld t, int deriv = 0) {
    const auto knots = clamped_knots(t0, t1, degree, L - degree);
    std::vector<ld> out(L);
    for (int i = 0; i < L; ++i) out[i] = bspline_deriv(knots, i, degree, deriv, t);
    return out;
}

/// Trapezoid rule with `intervals` equal pieces.
inline ld trapezoid(const std::function<ld(ld)>& f, ld a, ld b, int intervals) {
    const ld h = (b - a) / intervals;
    ld sum = 0.5L * (f(a) + f(b));
    for (int k = 1; k < intervals; ++k) sum += f(a + k * h);
    return sum * h;
}

/// Composite Simpson on each [breaks[k], breaks[k+1]] with `panels` panels.
inline ld simpson(const std::function<ld(ld)>& f, const std::vector<ld>& breaks, int panels) {
    ld total = 0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const ld a = breaks[k], b = breaks[k + 1];
        if (!(b > a)) continue;
        const ld h = (b - a) / (2 * panels);
        ld s = f(a) + f(b);
        for (int j = 1; j < 2 * panels; ++j) s += (j % 2 ? 4 : 2) * f(a + j * h);
        total += s * h / 3;
    }
    return total;
}

/// Piecewise-linear interpolant of grid values; constant beyond the ends.
inline ld interpolate(const Eigen::VectorXd& grid, const Eigen::RowVectorXd& values, ld t) {
    const Eigen::Index m = grid.size();
    if (t <= grid[0]) return values[0];
    if (t >= grid[m - 1]) return values[m - 1];
    Eigen::Index k = 0;
    while (k + 2 < m && t >= grid[k + 1]) ++k;
    const ld w = (t - grid[k]) / (grid[k + 1] - grid[k]);
    return (1 - w) * values[k] + w * values[k + 1];
}

/// Sorted union of two break lists.
inline std::vector<ld> merge_breaks(std::vector<ld> a, const std::vector<ld>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

inline std::vector<ld> uniform_breaks(ld t0, ld t1, int pieces) {
    std::vector<ld> out;
    for (int k = 0; k <= pieces; ++k) out.push_back(t0 + (t1 - t0) * k / pieces);
    return out;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

inline double rel_frobenius(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
    return (got - want).norm() / want.norm();
}

}  // namespace oracle
