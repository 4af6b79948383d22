#pragma once

// Grid search over (lambda, phi). For every phi the lambda list is walked
// from largest to smallest, each fit warm-started from the previous one.

#include "ghfm/fusion.hpp"

#include <optional>
#include <vector>

namespace ghfm {

enum class Criterion { bic, holdout };

Criterion parse_criterion(const std::string& name);
std::string to_string(Criterion criterion);

struct TuneGrid {
    std::vector<double> lambdas;
    std::vector<double> phis;

    /// lambda in 10^{-6..0} (13 points) and phi in 10^{-8..-2} (7 points),
    /// both multiplied by n^{-1/2}.
    static TuneGrid defaults(int n);

    /// Grid in the units of the outcome: lambda = sd(y) / U^2 x 10^{-2..1.5}
    /// (15 points) for U fused units, phi in {1, 10, 100}. The fusion pull on
    /// a unit grows with U while its share of the loss shrinks as 1/U.
    static TuneGrid scaled(const VectorXd& y, int units);
};

/// 10^lo, ..., 10^hi with `points` log-spaced values.
std::vector<double> log_grid(double lo, double hi, int points);

struct Holdout {
    const FunctionalDataset* data = nullptr;
    const DesignCache* cache = nullptr;
};

struct TuneOptions {
    Criterion criterion = Criterion::bic;
    double bic_constant = 1.0;
    PenaltyConfig base;  // lambda and phi are overwritten per cell
    Holdout holdout;
};

struct TuneCell {
    double lambda = 0.0;
    double phi = 0.0;
    double score = 0.0;
    double df = 0.0;
    std::vector<int> subgroups;  // per covariate
    int iterations = 0;
    bool converged = false;
};

struct TuneResult {
    PenaltyConfig best;
    FitResult fit;
    std::vector<TuneCell> cells;  // phi-major, lambda descending within phi
    std::size_t best_index = 0;
};

/// Degrees of freedom: sum over covariates of (subgroups x L), plus one.
double fusion_df(const FitResult& fit);

/// n log(2 mean nll) + c df log n.
double bic_score(const FitResult& fit, const FunctionalDataset& data, const DesignCache& cache, double c = 1.0);

TuneResult tune(const FunctionalDataset& data, const DesignCache& cache, const UnitMap& units, const TuneGrid& grid,
                const TuneOptions& options = {});

}  // namespace ghfm
