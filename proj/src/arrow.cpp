#include "ghfm/arrow.hpp"

#include "ghfm/parallel.hpp"

#include <string>

namespace ghfm {

void ArrowSystem::factor(const std::vector<MatrixXd>& blocks, const MatrixXd& coupling, double corner, double rho,
                         const MatrixXd& coupling_graph) {
    const int units = static_cast<int>(blocks.size());
    if (units == 0) throw ArgumentError("arrow system: no units");
    dim_ = static_cast<int>(blocks.front().rows());
    rho_ = rho;
    corner_ = corner;
    coupling_ = coupling;
    graph_ = rho > 0.0 ? coupling_graph : MatrixXd();
    chol_.assign(units, Eigen::LLT<MatrixXd>());
    ainv_graph_.assign(rho > 0.0 ? units : 0, MatrixXd());
    std::vector<int> failed(units, 0);
    parallel_for(static_cast<std::size_t>(units), [&](std::size_t u) {
        chol_[u].compute(blocks[u]);
        if (chol_[u].info() != Eigen::Success) {
            failed[u] = 1;
            return;
        }
        if (rho_ > 0.0) ainv_graph_[u] = chol_[u].solve(graph_);
    });
    for (int u = 0; u < units; ++u)
        if (failed[u]) throw NumericError("singular coefficient system for unit " + std::to_string(u + 1));
    if (rho_ > 0.0) {
        MatrixXd kernel = MatrixXd::Identity(dim_, dim_);
        for (int u = 0; u < units; ++u) kernel -= rho_ * ainv_graph_[u];
        mean_lu_.compute(kernel);
    }
    xc_ = solve_inner(coupling_);
    schur_ = corner_ - (coupling_.cwiseProduct(xc_)).sum();
    if (!(schur_ > 0.0)) throw NumericError("singular intercept system");
}

MatrixXd ArrowSystem::solve_inner(const MatrixXd& r) const {
    const int units = static_cast<int>(chol_.size());
    MatrixXd x(dim_, units);
    for (int u = 0; u < units; ++u) x.col(u) = chol_[u].solve(r.col(u));
    if (rho_ > 0.0) {
        const VectorXd mean = mean_lu_.solve(x.rowwise().sum());
        for (int u = 0; u < units; ++u) x.col(u).noalias() += rho_ * (ainv_graph_[u] * mean);
    }
    return x;
}

ArrowSystem::Solution ArrowSystem::solve(double r_alpha, const MatrixXd& r_b) const {
    MatrixXd xr = solve_inner(r_b);
    const double alpha = (r_alpha - coupling_.cwiseProduct(xr).sum()) / schur_;
    xr.noalias() -= alpha * xc_;
    return {alpha, std::move(xr)};
}

}  // namespace ghfm
