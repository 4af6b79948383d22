#pragma once

// Comparator methods: a homogeneous smooth functional linear model, response
// clustering followed by per-cluster smooth fits, and a plain (generalized)
// linear model on the raw grid values.

#include "ghfm/fdata.hpp"
#include "ghfm/fusion.hpp"

#include <vector>

namespace ghfm {

/// One coefficient function per covariate shared by every subject.
FitResult fit_sflm(const FunctionalDataset& data, const DesignCache& cache, double phi, double ridge = 1e-8);

/// Optimal 1-D k-means (exact dynamic program). Clusters are numbered in
/// increasing order of their centers. Throws ArgumentError when y has fewer
/// than G distinct values.
std::vector<int> kmeans_1d(const VectorXd& y, int G);

/// k-means on the outcome into G clusters, then an independent smooth fit
/// (own intercept) within each cluster.
FitResult fit_resp(const FunctionalDataset& data, const DesignCache& cache, double phi, int G, double ridge = 1e-8);

struct LinearGridFit {
    Family family = Family::gaussian;
    double alpha = 0.0;
    VectorXd coefs;  // m p, covariate blocks in grid order
    int m = 0;
    int p = 0;
    double jitter = 0.0;
    int iterations = 0;
    bool converged = true;
    std::vector<std::string> subject_ids;
};

/// Regression of y on the m p grid values plus an intercept. A ridge jitter
/// of 1e-8 is added when n <= m p.
LinearGridFit fit_lm_glm(const FunctionalDataset& data);

Prediction predict_lm(const LinearGridFit& fit, const FunctionalDataset& data);

/// Gradient of the (jittered) mean negative log-likelihood at `fit`.
VectorXd lm_gradient(const LinearGridFit& fit, const FunctionalDataset& data);

}  // namespace ghfm
