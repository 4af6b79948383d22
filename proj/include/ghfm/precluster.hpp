#pragma once

// Stage-1 partition of subjects into K pre-clustering groups. Alternates a
// joint penalized refit of all group coefficient functions (one shared
// intercept) with reassignment of every subject to the group under which its
// own negative log-likelihood is smallest.

#include "ghfm/fdata.hpp"
#include "ghfm/fusion.hpp"
#include "ghfm/grouped_fit.hpp"

#include <cstdint>
#include <vector>

namespace ghfm {

struct PreclusterOptions {
    std::uint64_t seed = 1;
    int max_iters = 100;
    int restarts = 5;
    double ridge = 1e-8;
};

struct PreclusterResult {
    std::vector<int> assignment;  // 0-based group of each subject
    int K = 0;
    CoefficientSet group_coefs;   // K units
    // Gaussian: residual sum of squares after each refit. Bernoulli: total
    // negative log-likelihood after each refit.
    std::vector<double> sse_trajectory;
    std::vector<double> objective_trajectory;  // penalized objective after each refit
    double objective = 0.0;
    int iterations = 0;
    int restart = 0;  // index of the winning restart
    std::uint64_t seed = 0;
    double phi = 0.0;

    UnitMap units() const { return UnitMap::from_groups(assignment, K); }
};

PreclusterResult precluster(const FunctionalDataset& data, const DesignCache& cache, int K, double phi,
                            const PreclusterOptions& options = {});

/// Random balanced initial partition driven by per-subject keys derived from
/// (seed, restart, subject id): the same subject gets the same group no
/// matter where it sits in the file.
std::vector<int> balanced_initial_partition(const std::vector<std::string>& subject_ids, int K, std::uint64_t seed,
                                            int restart);

}  // namespace ghfm
