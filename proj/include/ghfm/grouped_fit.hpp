#pragma once

// Penalized GLM with one shared intercept and one coefficient vector per
// group of subjects. This is the workhorse behind the homogeneous fit (one
// group), the pre-clustering refits (K groups), and the post-fusion refit
// (one group per estimated subgroup).

#include "ghfm/family.hpp"
#include "ghfm/types.hpp"

#include <span>
#include <vector>

namespace ghfm {

/// Intercept plus per-unit, per-covariate spline coefficients. Column u of
/// `coefs` stacks the p coefficient vectors of unit u, each of length L.
struct CoefficientSet {
    double alpha = 0.0;
    MatrixXd coefs;  // (p L) x U
    int p = 1;
    int L = 0;
    VectorXd offsets;  // optional per-unit intercept shifts; empty when unused

    int units() const { return static_cast<int>(coefs.cols()); }
    auto block(int unit, int j) const { return coefs.col(unit).segment(j * L, L); }
    auto block(int unit, int j) { return coefs.col(unit).segment(j * L, L); }
    double intercept(int unit) const { return offsets.size() ? alpha + offsets[unit] : alpha; }

    static CoefficientSet zeros(int units, int p, int L) {
        return {0.0, MatrixXd::Zero(p * L, units), p, L, {}};
    }
};

/// Quadratic penalty b^T Omega b applied to each group block, with
/// Omega = phi * blkdiag_p(R) + ridge * I.
MatrixXd penalty_matrix(const MatrixXd& roughness, int p, double phi, double ridge);

struct GroupedProblem {
    const MatrixXd& design;  // n x (p L)
    const VectorXd& y;
    Family family;
    std::span<const int> group;  // subject -> group in [0, groups)
    int groups;
    MatrixXd penalty;  // Omega, (p L) x (p L)
};

struct GroupedFit {
    double alpha = 0.0;
    MatrixXd coefs;  // (p L) x groups
    int newton_iterations = 0;
    double objective = 0.0;
};

/// (1/n) sum_i nll(y_i, alpha + g_i^T b_group(i)) + sum_g b_g^T Omega b_g.
double grouped_objective(const GroupedProblem& problem, double alpha, const MatrixXd& coefs);

/// Linear predictor for every subject.
VectorXd grouped_eta(const MatrixXd& design, std::span<const int> group, double alpha, const MatrixXd& coefs);

struct NewtonOptions {
    double grad_tol = 1e-8;
    int max_iters = 100;
};

/// Exact minimizer: one solve (Gaussian) or damped Newton (Bernoulli).
/// Throws NumericError naming the group when its system is singular.
GroupedFit fit_grouped(const GroupedProblem& problem, const GroupedFit* warm = nullptr, NewtonOptions options = {});

}  // namespace ghfm
