#include "ghfm/baselines.hpp"

#include "ghfm/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ghfm {

namespace {

MatrixXd roughness_of(const DesignCache& cache) { return roughness_block(cache.basis, composite_rule(cache.basis)); }

FitResult shell(const FunctionalDataset& data, const DesignCache& cache, std::string method) {
    FitResult result;
    result.method = std::move(method);
    result.family = data.family;
    result.basis = cache.basis;
    result.subject_ids = data.subject_ids;
    result.diagnostics.converged = true;
    return result;
}

void fill_partitions(FitResult& result, int units) {
    const int p = result.coefs.p, L = result.coefs.L;
    result.partitions.clear();
    result.subgroup_coefs.clear();
    for (int j = 0; j < p; ++j) {
        Partition part;
        part.count = units;
        part.subgroup_of_unit.resize(units);
        std::iota(part.subgroup_of_unit.begin(), part.subgroup_of_unit.end(), 0);
        result.partitions.push_back(std::move(part));
        result.subgroup_coefs.push_back(result.coefs.coefs.middleRows(j * L, L));
    }
}

MatrixXd grid_design(const FunctionalDataset& data) {
    const int n = data.n(), m = data.m(), p = data.p();
    MatrixXd z(n, 1 + m * p);
    z.col(0).setOnes();
    for (int j = 0; j < p; ++j) z.middleCols(1 + j * m, m) = data.x[j];
    return z;
}

}  // namespace

FitResult fit_sflm(const FunctionalDataset& data, const DesignCache& cache, double phi, double ridge) {
    if (data.n() == 0) throw ArgumentError("sflm: empty dataset");
    const MatrixXd design = cache.design();
    const std::vector<int> group(data.n(), 0);
    GroupedProblem problem{design, data.y, data.family, group, 1, penalty_matrix(roughness_of(cache), cache.p(), phi, ridge)};
    const GroupedFit fit = fit_grouped(problem);
    FitResult result = shell(data, cache, "sflm");
    result.coefs = {fit.alpha, fit.coefs, cache.p(), cache.L(), {}};
    result.unit_of_subject = group;
    result.config.phi = phi;
    result.config.ridge = ridge;
    result.diagnostics.iterations = fit.newton_iterations;
    result.diagnostics.objective_at_solution = fit.objective;
    fill_partitions(result, 1);
    return result;
}

std::vector<int> kmeans_1d(const VectorXd& y, int G) {
    const int n = static_cast<int>(y.size());
    if (G < 1) throw ArgumentError("kmeans: G must be >= 1");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return y[a] < y[b]; });
    int distinct = 0;
    for (int r = 0; r < n; ++r)
        if (r == 0 || y[order[r]] != y[order[r - 1]]) ++distinct;
    if (G > distinct)
        throw ArgumentError("kmeans: " + std::to_string(G) + " clusters requested but y has " + std::to_string(distinct) +
                            " distinct values");

    // cost(i, j): within-cluster sum of squares of sorted values i..j.
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (int r = 0; r < n; ++r) {
        s1[r + 1] = s1[r] + y[order[r]];
        s2[r + 1] = s2[r] + y[order[r]] * y[order[r]];
    }
    auto cost = [&](int i, int j) {
        const double cnt = j - i + 1, s = s1[j + 1] - s1[i];
        return std::max(0.0, s2[j + 1] - s2[i] - s * s / cnt);
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(G, std::vector<double>(n, inf));
    std::vector<std::vector<int>> start(G, std::vector<int>(n, 0));
    for (int j = 0; j < n; ++j) best[0][j] = cost(0, j);
    for (int g = 1; g < G; ++g) {
        for (int j = g; j < n; ++j) {
            for (int i = g; i <= j; ++i) {
                // Never split tied values across clusters.
                if (y[order[i]] == y[order[i - 1]]) continue;
                const double c = best[g - 1][i - 1] + cost(i, j);
                if (c < best[g][j]) {
                    best[g][j] = c;
                    start[g][j] = i;
                }
            }
        }
    }
    std::vector<int> labels(n);
    int j = n - 1;
    for (int g = G - 1; g >= 0; --g) {
        const int i = g == 0 ? 0 : start[g][j];
        for (int r = i; r <= j; ++r) labels[order[r]] = g;
        j = i - 1;
    }
    return labels;
}

FitResult fit_resp(const FunctionalDataset& data, const DesignCache& cache, double phi, int G, double ridge) {
    const std::vector<int> labels = kmeans_1d(data.y, G);
    const MatrixXd design = cache.design();
    const MatrixXd omega = penalty_matrix(roughness_of(cache), cache.p(), phi, ridge);
    std::vector<std::vector<int>> rows(G);
    for (int i = 0; i < data.n(); ++i) rows[labels[i]].push_back(i);

    std::vector<GroupedFit> fits(G);
    parallel_for(static_cast<std::size_t>(G), [&](std::size_t g) {
        const auto& r = rows[g];
        MatrixXd d(r.size(), design.cols());
        VectorXd y(r.size());
        for (std::size_t k = 0; k < r.size(); ++k) {
            d.row(k) = design.row(r[k]);
            y[k] = data.y[r[k]];
        }
        const std::vector<int> group(r.size(), 0);
        fits[g] = fit_grouped({d, y, data.family, group, 1, omega});
    });

    FitResult result = shell(data, cache, "resp");
    result.coefs = CoefficientSet::zeros(G, cache.p(), cache.L());
    result.coefs.alpha = fits[0].alpha;
    result.coefs.offsets.resize(G);
    for (int g = 0; g < G; ++g) {
        result.coefs.coefs.col(g) = fits[g].coefs.col(0);
        result.coefs.offsets[g] = fits[g].alpha - fits[0].alpha;
        result.diagnostics.iterations = std::max(result.diagnostics.iterations, fits[g].newton_iterations);
    }
    result.unit_of_subject = labels;
    result.config.phi = phi;
    result.config.ridge = ridge;
    fill_partitions(result, G);
    return result;
}

namespace {

double glm_objective(const LinearGridFit& fit, const MatrixXd& z, const VectorXd& y, const VectorXd& theta) {
    const VectorXd eta = z * theta;
    return total_nll(fit.family, y, eta) / static_cast<double>(y.size()) + fit.jitter * theta.tail(theta.size() - 1).squaredNorm();
}

VectorXd glm_gradient(const LinearGridFit& fit, const MatrixXd& z, const VectorXd& y, const VectorXd& theta,
                      VectorXd* weights) {
    const VectorXd eta = z * theta;
    VectorXd g(y.size());
    if (weights) weights->resize(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const Curvature c = grad_hess(fit.family, y[i], eta[i]);
        g[i] = c.grad;
        if (weights) (*weights)[i] = c.hess;
    }
    VectorXd grad = z.transpose() * g / static_cast<double>(y.size());
    grad.tail(grad.size() - 1) += 2.0 * fit.jitter * theta.tail(theta.size() - 1);
    return grad;
}

}  // namespace

LinearGridFit fit_lm_glm(const FunctionalDataset& data) {
    data.validate();
    LinearGridFit fit;
    fit.family = data.family;
    fit.m = data.m();
    fit.p = data.p();
    fit.subject_ids = data.subject_ids;
    const MatrixXd z = grid_design(data);
    const Eigen::Index k = z.cols();
    const double n = data.n();
    if (data.n() <= fit.m * fit.p) fit.jitter = 1e-8;

    VectorXd theta = VectorXd::Zero(k);
    if (fit.family == Family::gaussian) {
        if (fit.jitter == 0.0) {
            theta = z.colPivHouseholderQr().solve(data.y);
        } else {
            MatrixXd h = z.transpose() * z / n;
            h.diagonal().tail(k - 1).array() += fit.jitter;
            theta = h.ldlt().solve(z.transpose() * data.y / n);
        }
        fit.iterations = 1;
    } else {
        double value = glm_objective(fit, z, data.y, theta);
        fit.converged = false;
        for (int iter = 0; iter < 200; ++iter) {
            VectorXd w;
            const VectorXd grad = glm_gradient(fit, z, data.y, theta, &w);
            fit.iterations = iter;
            if (grad.cwiseAbs().maxCoeff() < 1e-10) {
                fit.converged = true;
                break;
            }
            MatrixXd h = z.transpose() * w.asDiagonal() * z / n;
            h.diagonal().tail(k - 1).array() += 2.0 * fit.jitter;
            const VectorXd step = -h.ldlt().solve(grad);
            const double slope = grad.dot(step);
            double t = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                const VectorXd next = theta + t * step;
                const double v = glm_objective(fit, z, data.y, next);
                if (std::isfinite(v) && v <= value + 1e-4 * t * slope) {
                    accepted = value - v > 1e-16 * std::max(1.0, std::abs(v));
                    theta = next;
                    value = v;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) break;
        }
    }
    if (!theta.allFinite()) throw NumericError("lm: non-finite coefficients");
    fit.alpha = theta[0];
    fit.coefs = theta.tail(k - 1);
    return fit;
}

VectorXd lm_gradient(const LinearGridFit& fit, const FunctionalDataset& data) {
    VectorXd theta(1 + fit.coefs.size());
    theta << fit.alpha, fit.coefs;
    return glm_gradient(fit, grid_design(data), data.y, theta, nullptr);
}

Prediction predict_lm(const LinearGridFit& fit, const FunctionalDataset& data) {
    if (data.m() != fit.m || data.p() != fit.p) throw ArgumentError("predict: grid does not match the fitted model");
    Prediction pred;
    pred.eta = (grid_design(data).rightCols(fit.m * fit.p) * fit.coefs).array() + fit.alpha;
    pred.response = pred.eta.unaryExpr([&](double e) { return mean_response(fit.family, e); });
    if (fit.family == Family::bernoulli)
        for (Eigen::Index i = 0; i < pred.response.size(); ++i) pred.labels.push_back(pred.response[i] >= 0.5 ? 1 : 0);
    return pred;
}

}  // namespace ghfm
