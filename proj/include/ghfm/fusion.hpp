#pragma once

// Fused penalized estimation of unit-specific coefficient functions:
//
//   (1/n) sum_i nll_i + phi sum_{u,j} b_uj^T R b_uj + ridge sum |b|^2
//     + lambda sum_j sum_{a != b} int |B(t)^T (b_aj - b_bj)| dt
//
// solved by operator splitting on z_abj = V (b_aj - b_bj), with V the basis
// evaluated at the composite quadrature nodes. Units are either subjects or
// pre-clustering groups. Subgroups are read off exact zeros of z.

#include "ghfm/bspline.hpp"
#include "ghfm/fdata.hpp"
#include "ghfm/grouped_fit.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ghfm {

struct PenaltyConfig {
    double lambda = 0.0;
    double phi = 0.0;
    double rho = 1.0;
    double tol_primal = 1e-5;
    double tol_dual = 1e-5;
    int max_iters = 2000;
    double ridge = 1e-8;
    bool adaptive_rho = true;
    bool refit = true;
    int max_direct_units = 500;

    void validate() const;
};

/// Assignment of subjects to the units that own coefficient functions.
struct UnitMap {
    int units = 0;
    std::vector<int> unit_of_subject;

    static UnitMap identity(int n);
    /// From 0-based group labels in [0, K).
    static UnitMap from_groups(std::vector<int> groups, int K);
    bool is_identity() const;
};

/// Partition of units into estimated subgroups for one covariate.
struct Partition {
    std::vector<int> subgroup_of_unit;  // 0-based, numbered by first appearance
    int count = 0;

    std::vector<std::vector<int>> members() const;
};

struct FusionGraph {
    int units = 0;
    int p = 0;
    std::vector<std::pair<int, int>> pairs;  // a < b, lexicographic
    std::vector<MatrixXd> node_values;       // per covariate, Q x pairs: z
    std::vector<MatrixXd> duals;             // per covariate, Q x pairs: scaled duals

    static std::vector<std::pair<int, int>> all_pairs(int units);
};

/// Union-find over pairs whose z is exactly zero.
std::vector<Partition> extract_subgroups(const FusionGraph& graph);

/// Same closure over an explicit list of fused pairs (one covariate).
Partition partition_from_fused_pairs(int units, const std::vector<std::pair<int, int>>& fused);

struct FitDiagnostics {
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
    double final_rho = 0.0;
    std::vector<double> objective_trajectory;
    double objective_at_zero = 0.0;
    double objective_at_solution = 0.0;  // splitting iterate averaged within subgroups, before any refit
    bool objective_sane = true;
};

/// Raw splitting state, kept for warm starts along a lambda path.
struct SplittingState {
    double alpha = 0.0;
    MatrixXd coefs;  // (p L) x U
    std::vector<MatrixXd> z;
    std::vector<MatrixXd> duals;
    double rho = 1.0;
};

struct FitResult {
    std::string method = "ghfm";
    Family family = Family::gaussian;
    BasisSpec basis;
    CoefficientSet coefs;                  // per unit; identical within a subgroup
    std::vector<Partition> partitions;     // per covariate
    std::vector<MatrixXd> subgroup_coefs;  // per covariate, L x count
    FitDiagnostics diagnostics;
    PenaltyConfig config;
    std::vector<std::string> subject_ids;
    std::vector<int> unit_of_subject;
    std::optional<SplittingState> state;

    int units() const { return coefs.units(); }
    /// Estimated subgroup of every subject for covariate j.
    std::vector<int> subject_subgroups(int j) const;
};

/// Quantities shared by every fit on one design: quadrature, V, R, G = V^T V.
struct FusionContext {
    BasisSpec basis;
    QuadratureRule rule;
    MatrixXd node_basis;  // Q x L
    MatrixXd roughness;   // L x L
    MatrixXd node_gram;   // L x L
    MatrixXd design;      // n x (p L)
    int p = 1;

    static FusionContext make(const DesignCache& cache);
    int L() const { return basis.dimension(); }
    int Q() const { return static_cast<int>(rule.size()); }
};

double fused_objective(const CoefficientSet& coefs, const FunctionalDataset& data, const DesignCache& cache,
                       const UnitMap& units, const PenaltyConfig& config);
double fused_objective(const CoefficientSet& coefs, const FunctionalDataset& data, const FusionContext& context,
                       const UnitMap& units, const PenaltyConfig& config);

FitResult fit_fused(const FunctionalDataset& data, const DesignCache& cache, const UnitMap& units,
                    const PenaltyConfig& config, const SplittingState* warm = nullptr);
FitResult fit_fused(const FunctionalDataset& data, const FusionContext& context, const UnitMap& units,
                    const PenaltyConfig& config, const SplittingState* warm = nullptr);

/// Penalized refit with lambda = 0 and coefficients shared within each
/// subgroup; the roughness and ridge terms apply once per subgroup.
CoefficientSet refit_subgroups(const FunctionalDataset& data, const FusionContext& context, const UnitMap& units,
                               const std::vector<Partition>& partitions, const PenaltyConfig& config,
                               std::vector<MatrixXd>* subgroup_coefs = nullptr);

struct Prediction {
    VectorXd eta;
    VectorXd response;        // eta (Gaussian) or probability (Bernoulli)
    std::vector<int> labels;  // Bernoulli 0.5-threshold labels; empty for Gaussian
};

/// Linear predictor alpha + sum_j gamma_ij^T b_unit(i),j for subjects looked up
/// by id. Throws MappingError for ids absent from the fit.
Prediction predict(const FitResult& fit, const FunctionalDataset& data, const DesignCache& cache);

/// Fit a coefficient set against a unit map directly (no id lookup).
VectorXd linear_predictor(const CoefficientSet& coefs, const MatrixXd& design, std::span<const int> unit_of_subject);

}  // namespace ghfm
