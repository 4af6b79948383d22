#include "ghfm/grouped_fit.hpp"

#include "ghfm/arrow.hpp"

#include <cmath>
#include <string>

namespace ghfm {

MatrixXd penalty_matrix(const MatrixXd& roughness, int p, double phi, double ridge) {
    const Eigen::Index L = roughness.rows();
    MatrixXd omega = MatrixXd::Zero(p * L, p * L);
    for (int j = 0; j < p; ++j) omega.block(j * L, j * L, L, L) = phi * roughness;
    omega.diagonal().array() += ridge;
    return omega;
}

VectorXd grouped_eta(const MatrixXd& design, std::span<const int> group, double alpha, const MatrixXd& coefs) {
    VectorXd eta(design.rows());
    for (Eigen::Index i = 0; i < design.rows(); ++i) eta[i] = alpha + design.row(i).dot(coefs.col(group[i]));
    return eta;
}

double grouped_objective(const GroupedProblem& problem, double alpha, const MatrixXd& coefs) {
    const VectorXd eta = grouped_eta(problem.design, problem.group, alpha, coefs);
    double value = total_nll(problem.family, problem.y, eta) / static_cast<double>(problem.y.size());
    for (int g = 0; g < problem.groups; ++g) value += coefs.col(g).dot(problem.penalty * coefs.col(g));
    return value;
}

namespace {

struct Members {
    std::vector<std::vector<int>> of;
};

Members members(const GroupedProblem& problem) {
    Members m;
    m.of.resize(problem.groups);
    for (std::size_t i = 0; i < problem.group.size(); ++i) {
        const int g = problem.group[i];
        if (g < 0 || g >= problem.groups) throw ArgumentError("grouped fit: group index out of range");
        m.of[g].push_back(static_cast<int>(i));
    }
    return m;
}

// Newton (or normal-equation) system at the current curvature weights.
void assemble(const GroupedProblem& problem, const Members& members, const VectorXd& weights, ArrowSystem& system) {
    const double inv_n = 1.0 / static_cast<double>(problem.y.size());
    const Eigen::Index dim = problem.design.cols();
    std::vector<MatrixXd> blocks(problem.groups);
    MatrixXd coupling = MatrixXd::Zero(dim, problem.groups);
    double corner = 0.0;
    for (int g = 0; g < problem.groups; ++g) {
        MatrixXd block = 2.0 * problem.penalty;
        for (int i : members.of[g]) {
            const double w = weights[i] * inv_n;
            block.selfadjointView<Eigen::Lower>().rankUpdate(problem.design.row(i).transpose(), w);
            coupling.col(g) += w * problem.design.row(i).transpose();
            corner += w;
        }
        blocks[g] = block.selfadjointView<Eigen::Lower>();
    }
    try {
        system.factor(blocks, coupling, corner, 0.0, MatrixXd());
    } catch (const NumericError& e) {
        std::string msg = e.what();
        const auto pos = msg.find("unit ");
        if (pos != std::string::npos) msg.replace(pos, 5, "group ");
        throw NumericError(msg);
    }
}

}  // namespace

GroupedFit fit_grouped(const GroupedProblem& problem, const GroupedFit* warm, NewtonOptions options) {
    const Eigen::Index n = problem.y.size();
    const Eigen::Index dim = problem.design.cols();
    if (problem.design.rows() != n || static_cast<Eigen::Index>(problem.group.size()) != n)
        throw ArgumentError("grouped fit: dimension mismatch");
    const Members mem = members(problem);
    const double inv_n = 1.0 / static_cast<double>(n);
    ArrowSystem system;

    GroupedFit fit;
    if (problem.family == Family::gaussian) {
        assemble(problem, mem, VectorXd::Ones(n), system);
        MatrixXd rhs = MatrixXd::Zero(dim, problem.groups);
        for (Eigen::Index i = 0; i < n; ++i) rhs.col(problem.group[i]) += inv_n * problem.y[i] * problem.design.row(i).transpose();
        auto sol = system.solve(problem.y.mean(), rhs);
        fit.alpha = sol.alpha;
        fit.coefs = std::move(sol.b);
        fit.newton_iterations = 1;
        fit.objective = grouped_objective(problem, fit.alpha, fit.coefs);
        return fit;
    }

    if (warm != nullptr && warm->coefs.rows() == dim && warm->coefs.cols() == problem.groups) {
        fit.alpha = warm->alpha;
        fit.coefs = warm->coefs;
    } else {
        fit.alpha = 0.0;
        fit.coefs = MatrixXd::Zero(dim, problem.groups);
    }
    fit.objective = grouped_objective(problem, fit.alpha, fit.coefs);
    for (int iter = 0; iter < options.max_iters; ++iter) {
        const VectorXd eta = grouped_eta(problem.design, problem.group, fit.alpha, fit.coefs);
        VectorXd weights(n);
        double grad_alpha = 0.0;
        MatrixXd grad = 2.0 * problem.penalty * fit.coefs;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Curvature c = grad_hess(problem.family, problem.y[i], eta[i]);
            weights[i] = c.hess;
            grad_alpha += inv_n * c.grad;
            grad.col(problem.group[i]) += inv_n * c.grad * problem.design.row(i).transpose();
        }
        const double gnorm = std::max(std::abs(grad_alpha), grad.cwiseAbs().maxCoeff());
        if (gnorm < options.grad_tol) break;
        assemble(problem, mem, weights, system);
        auto step = system.solve(-grad_alpha, -grad);
        double t = 1.0;
        bool accepted = false;
        const double slope = grad_alpha * step.alpha + grad.cwiseProduct(step.b).sum();
        for (int ls = 0; ls < 60; ++ls) {
            const double a = fit.alpha + t * step.alpha;
            MatrixXd c = fit.coefs + t * step.b;
            const double value = grouped_objective(problem, a, c);
            if (value <= fit.objective + 1e-4 * t * slope) {
                fit.alpha = a;
                fit.coefs = std::move(c);
                const double decrease = fit.objective - value;
                fit.objective = value;
                accepted = decrease > 1e-16 * std::max(1.0, std::abs(value));
                break;
            }
            t *= 0.5;
        }
        ++fit.newton_iterations;
        if (!accepted) break;
    }
    return fit;
}

}  // namespace ghfm
