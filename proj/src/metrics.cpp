#include "ghfm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace ghfm {

namespace {

void check_same_length(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) throw ArgumentError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                                    std::to_string(b) + ")");
}

std::vector<double> breaks_of(const BasisSpec& basis) {
    std::vector<double> out;
    for (int k = 0; k <= basis.spans; ++k) out.push_back(breakpoint(basis, k));
    return out;
}

std::vector<int> dense_labels(std::span<const int> labels, int& count) {
    std::map<int, int> index;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) out.push_back(index.emplace(l, static_cast<int>(index.size())).first->second);
    count = static_cast<int>(index.size());
    return out;
}

}  // namespace

double rmse(const VectorXd& y, const VectorXd& yhat) {
    check_same_length(y.size(), yhat.size(), "rmse");
    if (y.size() == 0) throw ArgumentError("rmse: empty input");
    return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

double rpmse(const VectorXd& y, const VectorXd& yhat) {
    check_same_length(y.size(), yhat.size(), "rpmse");
    if (y.size() == 0) throw ArgumentError("rpmse: empty input");
    const double denom = y.squaredNorm();
    if (!(denom > 0.0)) throw DomainError("rpmse: outcome vector is identically zero");
    return std::sqrt((y - yhat).squaredNorm() / denom);
}

double ise(const SplineCurves& estimate, const SplineCurves& truth) {
    check_same_length(estimate.coefs.cols(), truth.coefs.cols(), "ise");
    double err = 0.0, norm = 0.0;
    if (estimate.basis == truth.basis) {
        const MatrixXd gram = gram_block(estimate.basis, composite_rule(estimate.basis));
        const MatrixXd diff = estimate.coefs - truth.coefs;
        err = (diff.transpose() * gram * diff).trace();
        norm = (truth.coefs.transpose() * gram * truth.coefs).trace();
    } else {
        std::vector<double> breaks = breaks_of(estimate.basis);
        const std::vector<double> more = breaks_of(truth.basis);
        breaks.insert(breaks.end(), more.begin(), more.end());
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        const QuadratureRule rule = piecewise_rule(breaks, std::max(estimate.basis.degree, truth.basis.degree) + 1);
        const MatrixXd est = basis_matrix(estimate.basis, rule.nodes) * estimate.coefs;
        const MatrixXd tru = basis_matrix(truth.basis, rule.nodes) * truth.coefs;
        err = (rule.weights.asDiagonal() * (est - tru).cwiseAbs2()).sum();
        norm = (rule.weights.asDiagonal() * tru.cwiseAbs2()).sum();
    }
    if (!(norm > 0.0)) throw DomainError("ise: true coefficient functions have zero norm");
    return std::sqrt(std::max(err, 0.0) / norm);
}

double ise(const SplineCurves& estimate, const CurveFunction& truth, int nodes_per_span) {
    const QuadratureRule rule = composite_rule(estimate.basis, nodes_per_span);
    const MatrixXd est = basis_matrix(estimate.basis, rule.nodes) * estimate.coefs;
    double err = 0.0, norm = 0.0;
    for (Eigen::Index i = 0; i < est.cols(); ++i) {
        for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
            const double b = truth(static_cast<int>(i), rule.nodes[q]);
            err += rule.weights[q] * (est(q, i) - b) * (est(q, i) - b);
            norm += rule.weights[q] * b * b;
        }
    }
    if (!(norm > 0.0)) throw DomainError("ise: true coefficient functions have zero norm");
    return std::sqrt(err / norm);
}

std::vector<int> max_weight_assignment(const MatrixXd& weights) {
    const int rows = static_cast<int>(weights.rows());
    const int cols = static_cast<int>(weights.cols());
    if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);
    if (rows > cols) {
        const std::vector<int> t = max_weight_assignment(weights.transpose());
        std::vector<int> out(rows, -1);
        for (int c = 0; c < cols; ++c)
            if (t[c] >= 0) out[t[c]] = c;
        return out;
    }
    // Shortest augmenting path Hungarian method on cost = -weight, rows <= cols.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
    std::vector<int> match(cols + 1, 0), way(cols + 1, 0);
    for (int i = 1; i <= rows; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(cols + 1, inf);
        std::vector<char> used(cols + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= cols; ++j) {
                if (used[j]) continue;
                const double cur = -weights(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> out(rows, -1);
    for (int j = 1; j <= cols; ++j)
        if (match[j] > 0) out[match[j] - 1] = j - 1;
    return out;
}

double smr(std::span<const int> labels_hat, std::span<const int> labels_true) {
    check_same_length(static_cast<Eigen::Index>(labels_hat.size()), static_cast<Eigen::Index>(labels_true.size()),
                      "smr");
    if (labels_hat.empty()) return 0.0;
    int k_hat = 0, k_true = 0;
    const std::vector<int> est = dense_labels(labels_hat, k_hat);
    const std::vector<int> tru = dense_labels(labels_true, k_true);
    MatrixXd confusion = MatrixXd::Zero(k_hat, k_true);
    for (std::size_t i = 0; i < est.size(); ++i) confusion(est[i], tru[i]) += 1.0;
    const std::vector<int> match = max_weight_assignment(confusion);
    double matched = 0.0;
    for (int r = 0; r < k_hat; ++r)
        if (match[r] >= 0) matched += confusion(r, match[r]);
    return 1.0 - matched / static_cast<double>(est.size());
}

double omr(const VectorXd& y, const VectorXd& p_hat, double threshold) {
    check_same_length(y.size(), p_hat.size(), "omr");
    if (y.size() == 0) throw ArgumentError("omr: empty input");
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) wrong += ((p_hat[i] >= threshold) ? 1.0 : 0.0) != y[i];
    return static_cast<double>(wrong) / static_cast<double>(y.size());
}

double auc(const VectorXd& y, const VectorXd& p_hat) {
    check_same_length(y.size(), p_hat.size(), "auc");
    const Eigen::Index n = y.size();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return p_hat[a] < p_hat[b]; });
    // Mid-ranks over tied scores.
    double rank_sum = 0.0;
    double positives = 0.0;
    for (Eigen::Index s = 0; s < n;) {
        Eigen::Index e = s;
        while (e + 1 < n && p_hat[order[e + 1]] == p_hat[order[s]]) ++e;
        const double mid = 0.5 * static_cast<double>(s + e) + 1.0;
        for (Eigen::Index k = s; k <= e; ++k) {
            if (y[order[k]] == 1.0) {
                rank_sum += mid;
                positives += 1.0;
            }
        }
        s = e + 1;
    }
    const double negatives = static_cast<double>(n) - positives;
    if (positives == 0.0 || negatives == 0.0) throw DomainError("auc: outcome has a single class");
    return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

RocSummary roc_suite(const VectorXd& y, const VectorXd& p_hat, double threshold) {
    check_same_length(y.size(), p_hat.size(), "roc_suite");
    double tp = 0, fn = 0, fp = 0, tn = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const bool pos = p_hat[i] >= threshold;
        if (y[i] == 1.0)
            (pos ? tp : fn) += 1.0;
        else
            (pos ? fp : tn) += 1.0;
    }
    RocSummary out;
    if (tp + fn > 0) out.fnr = fn / (tp + fn);
    if (fp + tn > 0) out.fpr = fp / (fp + tn);
    if (tp + fn > 0 && fp + tn > 0) out.auc = auc(y, p_hat);
    return out;
}

RocSummary multiday_roc(const std::vector<VectorXd>& y_by_day, const std::vector<VectorXd>& p_by_day,
                        double threshold) {
    if (y_by_day.size() != p_by_day.size() || y_by_day.empty())
        throw ArgumentError("multiday_roc: day lists must be non-empty and aligned");
    double sums[3] = {0, 0, 0};
    int counts[3] = {0, 0, 0};
    for (std::size_t d = 0; d < y_by_day.size(); ++d) {
        const RocSummary day = roc_suite(y_by_day[d], p_by_day[d], threshold);
        const std::optional<double>* parts[3] = {&day.fnr, &day.fpr, &day.auc};
        for (int k = 0; k < 3; ++k)
            if (*parts[k]) {
                sums[k] += **parts[k];
                ++counts[k];
            }
    }
    RocSummary out;
    std::optional<double>* parts[3] = {&out.fnr, &out.fpr, &out.auc};
    for (int k = 0; k < 3; ++k)
        if (counts[k] > 0) *parts[k] = sums[k] / counts[k];
    return out;
}

double multiday_rpmse(const std::vector<VectorXd>& y_by_day, const std::vector<VectorXd>& yhat_by_day,
                      MultidayRmse variant) {
    if (y_by_day.size() != yhat_by_day.size() || y_by_day.empty())
        throw ArgumentError("multiday_rpmse: day lists must be non-empty and aligned");
    double acc = 0.0;
    for (std::size_t d = 0; d < y_by_day.size(); ++d) {
        const double r = rmse(y_by_day[d], yhat_by_day[d]);
        acc += variant == MultidayRmse::mean_of_roots ? r : r * r;
    }
    acc /= static_cast<double>(y_by_day.size());
    return variant == MultidayRmse::mean_of_roots ? acc : std::sqrt(acc);
}

}  // namespace ghfm
