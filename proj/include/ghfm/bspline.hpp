#pragma once

// Clamped uniform B-spline bases on [t0, t1], composite Gauss-Legendre
// quadrature, and the L x L roughness and Gram blocks built from them.
//
// Everything here is a pure function of its inputs. Evaluation routines are
// templated on the scalar type so that tests can run the same recursion in
// extended precision.

#include "ghfm/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace ghfm {

/// B-spline family: degree d, M equally spaced interior spans, L = M + d.
struct BasisSpec {
    double t0 = 0.0;
    double t1 = 1.0;
    int degree = 3;
    int spans = 1;

    int dimension() const { return spans + degree; }
    int order() const { return degree + 1; }
    double span_width() const { return (t1 - t0) / spans; }

    void validate() const {
        if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1))
            throw ArgumentError("basis: domain end must exceed domain start");
        if (degree < 1) throw ArgumentError("basis: degree must be >= 1");
        if (spans < 1) throw ArgumentError("basis: need at least one span");
    }

    /// Basis of the given dimension on [t0, t1]; dimension must exceed degree.
    static BasisSpec with_dimension(double t0, double t1, int dimension, int degree = 3) {
        if (dimension <= degree) {
            std::ostringstream os;
            os << "basis: dimension " << dimension << " too small for degree " << degree;
            throw ArgumentError(os.str());
        }
        BasisSpec spec{t0, t1, degree, dimension - degree};
        spec.validate();
        return spec;
    }

    friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

/// Knot location k of the uniform grid, k in [0, M]; endpoints are exact.
template <typename Scalar = double>
Scalar breakpoint(const BasisSpec& spec, int k) {
    if (k <= 0) return Scalar(spec.t0);
    if (k >= spec.spans) return Scalar(spec.t1);
    return Scalar(spec.t0) + Scalar(k) * (Scalar(spec.t1) - Scalar(spec.t0)) / Scalar(spec.spans);
}

/// Full clamped knot vector, length L + d + 1.
template <typename Scalar = double>
std::vector<Scalar> knot_vector(const BasisSpec& spec) {
    std::vector<Scalar> knots;
    knots.reserve(spec.dimension() + spec.degree + 1);
    for (int i = 0; i < spec.degree; ++i) knots.push_back(Scalar(spec.t0));
    for (int k = 0; k <= spec.spans; ++k) knots.push_back(breakpoint<Scalar>(spec, k));
    for (int i = 0; i < spec.degree; ++i) knots.push_back(Scalar(spec.t1));
    return knots;
}

namespace detail {

template <typename Scalar>
void check_domain(const BasisSpec& spec, Scalar t) {
    if (!(t >= Scalar(spec.t0) && t <= Scalar(spec.t1))) {
        std::ostringstream os;
        os << "basis: t=" << double(t) << " outside [" << spec.t0 << ", " << spec.t1 << "]";
        throw DomainError(os.str());
    }
}

// Index s of the knot interval [knots[s], knots[s+1]) holding t, with the
// right endpoint folded into the last non-empty interval.
template <typename Scalar>
int find_span(const BasisSpec& spec, const std::vector<Scalar>& knots, Scalar t) {
    const int d = spec.degree;
    const int last = spec.dimension() - 1;
    Scalar rel = (t - Scalar(spec.t0)) / (Scalar(spec.t1) - Scalar(spec.t0)) * Scalar(spec.spans);
    int s = d + std::clamp(static_cast<int>(std::floor(static_cast<double>(rel))), 0, spec.spans - 1);
    while (s > d && t < knots[s]) --s;
    while (s < last && t >= knots[s + 1]) ++s;
    return s;
}

template <typename Scalar>
Scalar safe_ratio(Scalar num, Scalar den) {
    return den == Scalar(0) ? Scalar(0) : num / den;
}

// Cox-de Boor triangle: all B_{i,k}(t) of the target degree over the whole
// knot vector, i in [0, knots.size() - k - 1).
template <typename Scalar>
Vec<Scalar> cox_de_boor(const std::vector<Scalar>& knots, int span, int target_degree, Scalar t) {
    const int nk = static_cast<int>(knots.size());
    Vec<Scalar> level = Vec<Scalar>::Zero(nk - 1);
    level[span] = Scalar(1);
    for (int k = 1; k <= target_degree; ++k) {
        Vec<Scalar> next(nk - k - 1);
        for (int i = 0; i < nk - k - 1; ++i) {
            Scalar left = safe_ratio(t - knots[i], knots[i + k] - knots[i]) * level[i];
            Scalar right = safe_ratio(knots[i + k + 1] - t, knots[i + k + 1] - knots[i + 1]) * level[i + 1];
            next[i] = left + right;
        }
        level = std::move(next);
    }
    return level;
}

// Knot-difference derivative: maps (derivatives of) degree k-1 functions to
// the next derivative of the degree k functions.
template <typename Scalar>
Vec<Scalar> differentiate(const std::vector<Scalar>& knots, int k, const Vec<Scalar>& lower) {
    const int n = static_cast<int>(lower.size()) - 1;
    Vec<Scalar> out(n);
    for (int i = 0; i < n; ++i) {
        out[i] = Scalar(k) * (safe_ratio(lower[i], knots[i + k] - knots[i]) -
                              safe_ratio(lower[i + 1], knots[i + k + 1] - knots[i + 1]));
    }
    return out;
}

}  // namespace detail

/// B(t): L basis values at t. Nonnegative, sums to one, at most d+1 nonzeros.
template <typename Scalar>
Vec<Scalar> eval_basis(const BasisSpec& spec, Scalar t) {
    detail::check_domain(spec, t);
    const auto knots = knot_vector<Scalar>(spec);
    const int span = detail::find_span(spec, knots, t);
    return detail::cox_de_boor(knots, span, spec.degree, t);
}

/// B''(t). Zero for degree <= 1.
template <typename Scalar>
Vec<Scalar> eval_basis_deriv2(const BasisSpec& spec, Scalar t) {
    detail::check_domain(spec, t);
    const int d = spec.degree;
    if (d <= 1) return Vec<Scalar>::Zero(spec.dimension());
    const auto knots = knot_vector<Scalar>(spec);
    const int span = detail::find_span(spec, knots, t);
    Vec<Scalar> values = detail::cox_de_boor(knots, span, d - 2, t);
    Vec<Scalar> first = detail::differentiate(knots, d - 1, values);
    return detail::differentiate(knots, d, first);
}

/// Value of the spline with coefficient vector `coefs` at t.
template <typename Derived>
typename Derived::Scalar spline_value(const BasisSpec& spec, const Eigen::MatrixBase<Derived>& coefs,
                                      typename Derived::Scalar t) {
    return eval_basis(spec, t).dot(coefs);
}

/// Quadrature nodes and positive weights over some interval.
struct QuadratureRule {
    VectorXd nodes;
    VectorXd weights;

    Eigen::Index size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton on the Legendre recurrence).
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw ArgumentError("gauss_legendre: need at least one node");
    QuadratureRule rule{VectorXd(n), VectorXd(n)};
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
        return rule;
    }
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Composite Gauss-Legendre over consecutive pieces [breaks[k], breaks[k+1]].
inline QuadratureRule piecewise_rule(const std::vector<double>& breaks, int nodes_per_piece) {
    const QuadratureRule ref = gauss_legendre(nodes_per_piece);
    std::vector<double> nodes, weights;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = breaks[k], b = breaks[k + 1];
        if (!(b > a)) continue;
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int q = 0; q < nodes_per_piece; ++q) {
            nodes.push_back(mid + half * ref.nodes[q]);
            weights.push_back(half * ref.weights[q]);
        }
    }
    QuadratureRule rule{VectorXd(nodes.size()), VectorXd(weights.size())};
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        rule.nodes[q] = nodes[q];
        rule.weights[q] = weights[q];
    }
    return rule;
}

/// Composite rule with `nodes_per_span` nodes per knot span (default d + 1),
/// exact for products of two splines of the basis.
inline QuadratureRule composite_rule(const BasisSpec& spec, int nodes_per_span = 0) {
    spec.validate();
    if (nodes_per_span <= 0) nodes_per_span = spec.degree + 1;
    std::vector<double> breaks;
    for (int k = 0; k <= spec.spans; ++k) breaks.push_back(breakpoint(spec, k));
    return piecewise_rule(breaks, nodes_per_span);
}

/// Q x L matrix of basis values at the given points.
inline MatrixXd basis_matrix(const BasisSpec& spec, const VectorXd& points) {
    MatrixXd out(points.size(), spec.dimension());
    for (Eigen::Index q = 0; q < points.size(); ++q) out.row(q) = eval_basis(spec, points[q]).transpose();
    return out;
}

inline MatrixXd basis_deriv2_matrix(const BasisSpec& spec, const VectorXd& points) {
    MatrixXd out(points.size(), spec.dimension());
    for (Eigen::Index q = 0; q < points.size(); ++q) out.row(q) = eval_basis_deriv2(spec, points[q]).transpose();
    return out;
}

/// Roughness block: integral of B''(t) B''(t)^T.
inline MatrixXd roughness_block(const BasisSpec& spec, const QuadratureRule& rule) {
    const MatrixXd d2 = basis_deriv2_matrix(spec, rule.nodes);
    MatrixXd block = d2.transpose() * rule.weights.asDiagonal() * d2;
    return 0.5 * (block + block.transpose());
}

/// Gram block: integral of B(t) B(t)^T.
inline MatrixXd gram_block(const BasisSpec& spec, const QuadratureRule& rule) {
    const MatrixXd b = basis_matrix(spec, rule.nodes);
    MatrixXd block = b.transpose() * rule.weights.asDiagonal() * b;
    return 0.5 * (block + block.transpose());
}

}  // namespace ghfm
