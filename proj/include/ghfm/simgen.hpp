#pragma once

// Seeded generators for the three simulation settings: a single functional
// covariate X_i(t) = v_i^T B_x(t), v_i ~ N(3 1, I), sampled on the hourly grid
// of [0, 23], with subgroup-specific coefficient functions.

#include "ghfm/bspline.hpp"
#include "ghfm/fdata.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ghfm {

struct SimulationOptions {
    int setting = 1;
    int n = 100;
    double sigma_prime = 1.0;  // coefficient noise sd (settings 1 and 3)
    std::uint64_t seed = 1;
    double noise_sd = 1.0;     // response noise sd (settings 1 and 2)
    double alpha = 0.0;
    int x_dim = 26;
    int x_degree = 3;
    int beta_dim = 35;
    int beta_degree = 3;
    int m = 24;
    double t_end = 23.0;

    void validate() const;
};

enum class TruthKind { spline, closed_form };

struct SyntheticTruth {
    int setting = 1;
    std::vector<std::string> subject_ids;
    std::vector<int> labels;  // 0-based true subgroup of each subject
    int groups = 0;
    TruthKind kind = TruthKind::spline;
    BasisSpec beta_basis;
    MatrixXd beta_coefs;                  // L x n (spline truth)
    std::vector<std::string> functions;   // per true subgroup (closed form): "sin" / "cos"
    BasisSpec x_basis;
    double alpha = 0.0;
    double sigma_prime = 0.0;
    double noise_sd = 0.0;
    std::uint64_t seed = 0;
    SimulationOptions options;

    int n() const { return static_cast<int>(labels.size()); }
    double beta(int subject, double t) const;
};

struct SimulatedData {
    FunctionalDataset data;
    SyntheticTruth truth;
    VectorXd eta;  // true linear predictor
};

SimulatedData generate(const SimulationOptions& options);
SimulatedData generate_setting1(int n, double sigma_prime, std::uint64_t seed, SimulationOptions options = {});
SimulatedData generate_setting2(int n, std::uint64_t seed, SimulationOptions options = {});
SimulatedData generate_setting3(int n, double sigma_prime, std::uint64_t seed, SimulationOptions options = {});

/// Fresh observations (new covariate curves and outcome noise) for the same
/// subjects and coefficient functions; `draw` >= 1 selects the replicate.
SimulatedData redraw(const SyntheticTruth& truth, int draw);

/// Subject id used by the generators: S0001, S0002, ...
std::string simulated_subject_id(int index, int n);

}  // namespace ghfm
