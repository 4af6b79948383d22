#pragma once

// Evaluation quantities for fitted models: prediction error, coefficient
// recovery, subgroup recovery and binary-outcome classification.

#include "ghfm/bspline.hpp"
#include "ghfm/types.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace ghfm {

/// RMSE(y - yhat) / RMSE(y).
double rpmse(const VectorXd& y, const VectorXd& yhat);

/// Root mean squared error.
double rmse(const VectorXd& y, const VectorXd& yhat);

/// One spline-represented coefficient function per subject (columns).
struct SplineCurves {
    BasisSpec basis;
    MatrixXd coefs;  // L x n
};

/// Coefficient function of subject i at time t.
using CurveFunction = std::function<double(int subject, double t)>;

/// Relative integrated error over all subjects,
///   sqrt(sum_i int (bhat_i - b_i)^2) / sqrt(sum_i int b_i^2).
/// Exact via the Gram block when both sides share a basis, otherwise by
/// composite Gauss-Legendre quadrature on the union of both knot sets.
double ise(const SplineCurves& estimate, const SplineCurves& truth);
double ise(const SplineCurves& estimate, const CurveFunction& truth, int nodes_per_span = 12);

/// Fraction of subjects misclassified under the best injective matching of
/// estimated groups onto true groups. Labels are arbitrary integers.
double smr(std::span<const int> labels_hat, std::span<const int> labels_true);

/// Maximum-weight assignment on a rectangular matrix; returns the column
/// matched to each row, or -1 for unmatched rows.
std::vector<int> max_weight_assignment(const MatrixXd& weights);

/// Outcome misclassification: fraction with (p >= threshold) != y.
double omr(const VectorXd& y, const VectorXd& p_hat, double threshold = 0.5);

/// Area under the ROC curve (Mann-Whitney, ties credited 1/2).
/// Throws DomainError unless both classes are present.
double auc(const VectorXd& y, const VectorXd& p_hat);

struct RocSummary {
    std::optional<double> fnr;  // missing when y has no positives
    std::optional<double> fpr;  // missing when y has no negatives
    std::optional<double> auc;  // missing unless both classes are present
};

RocSummary roc_suite(const VectorXd& y, const VectorXd& p_hat, double threshold = 0.5);

/// Per-day summaries averaged across days (days lacking a value are skipped).
RocSummary multiday_roc(const std::vector<VectorXd>& y_by_day, const std::vector<VectorXd>& p_by_day,
                        double threshold = 0.5);

enum class MultidayRmse {
    mean_of_roots,  // (1/D) sum_d RMSE_d
    root_of_mean,   // sqrt((1/D) sum_d MSE_d)
};

double multiday_rpmse(const std::vector<VectorXd>& y_by_day, const std::vector<VectorXd>& yhat_by_day,
                      MultidayRmse variant = MultidayRmse::mean_of_roots);

}  // namespace ghfm
