#pragma once

// Linear systems of the form
//
//   [ c00   c^T ] [ alpha ]   [ r_alpha ]
//   [ c     M   ] [ b     ] = [ r_b     ],   M = blkdiag(A_1..A_U) - rho (1 1^T (x) G)
//
// which is the shape of every Newton / normal-equations system in this
// library: one intercept coupled to U unit blocks of size D, and (inside the
// splitting solver) a complete-graph Laplacian over units. The low-rank term
// is handled with a Woodbury-style D x D correction so the cost is O(U D^3)
// to factor and O(U D^2) per solve.

#include "ghfm/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <vector>

namespace ghfm {

class ArrowSystem {
public:
    /// blocks: U symmetric positive definite D x D matrices (A_u above, the
    /// rho * U * G diagonal share already included). coupling: D x U, column u
    /// is c_u. coupling_graph may be empty when rho == 0.
    void factor(const std::vector<MatrixXd>& blocks, const MatrixXd& coupling, double corner, double rho,
                const MatrixXd& coupling_graph);

    struct Solution {
        double alpha;
        MatrixXd b;  // D x U
    };

    Solution solve(double r_alpha, const MatrixXd& r_b) const;

    int units() const { return static_cast<int>(chol_.size()); }
    int dim() const { return dim_; }

private:
    MatrixXd solve_inner(const MatrixXd& r) const;

    int dim_ = 0;
    double rho_ = 0.0;
    double corner_ = 0.0;
    MatrixXd coupling_;
    MatrixXd graph_;
    std::vector<Eigen::LLT<MatrixXd>> chol_;
    std::vector<MatrixXd> ainv_graph_;  // A_u^{-1} G
    Eigen::PartialPivLU<MatrixXd> mean_lu_;
    MatrixXd xc_;
    double schur_ = 0.0;
};

}  // namespace ghfm
