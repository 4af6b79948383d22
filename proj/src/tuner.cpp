#include "ghfm/tuner.hpp"

#include "ghfm/metrics.hpp"
#include "ghfm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace ghfm {

Criterion parse_criterion(const std::string& name) {
    if (name == "bic") return Criterion::bic;
    if (name == "holdout") return Criterion::holdout;
    throw ArgumentError("unknown criterion '" + name + "' (expected bic or holdout)");
}

std::string to_string(Criterion criterion) { return criterion == Criterion::bic ? "bic" : "holdout"; }

std::vector<double> log_grid(double lo, double hi, int points) {
    if (points < 1) throw ArgumentError("grid: need at least one point");
    std::vector<double> out;
    for (int k = 0; k < points; ++k) {
        const double e = points == 1 ? lo : lo + (hi - lo) * k / (points - 1);
        out.push_back(std::pow(10.0, e));
    }
    return out;
}

TuneGrid TuneGrid::defaults(int n) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    TuneGrid grid{log_grid(-6, 0, 13), log_grid(-8, -2, 7)};
    for (double& v : grid.lambdas) v *= scale;
    for (double& v : grid.phis) v *= scale;
    return grid;
}

TuneGrid TuneGrid::scaled(const VectorXd& y, int units) {
    if (y.size() < 2 || units < 1) throw ArgumentError("grid: need at least two outcomes and one unit");
    const double sd = std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1));
    if (!(sd > 0.0)) throw ArgumentError("grid: outcome has zero variance");
    TuneGrid grid{log_grid(-2, 1.5, 15), log_grid(0, 2, 3)};
    const double scale = sd / (static_cast<double>(units) * units);
    for (double& v : grid.lambdas) v *= scale;
    return grid;
}

double fusion_df(const FitResult& fit) {
    double df = 1.0;
    for (const Partition& part : fit.partitions) df += static_cast<double>(part.count) * fit.coefs.L;
    return df;
}

double bic_score(const FitResult& fit, const FunctionalDataset& data, const DesignCache& cache, double c) {
    const VectorXd eta = linear_predictor(fit.coefs, cache.design(), fit.unit_of_subject);
    const double n = data.n();
    const double mean_nll = total_nll(data.family, data.y, eta) / n;
    return n * std::log(2.0 * mean_nll) + c * fusion_df(fit) * std::log(n);
}

TuneResult tune(const FunctionalDataset& data, const DesignCache& cache, const UnitMap& units, const TuneGrid& grid,
                const TuneOptions& options) {
    if (grid.lambdas.empty() || grid.phis.empty()) throw ArgumentError("tune: empty grid");
    if (options.criterion == Criterion::holdout && (!options.holdout.data || !options.holdout.cache))
        throw ArgumentError("tune: holdout criterion needs a validation dataset");
    std::vector<double> lambdas = grid.lambdas;
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
    const FusionContext context = FusionContext::make(cache);

    auto score_of = [&](const FitResult& fit) {
        if (options.criterion == Criterion::bic) return bic_score(fit, data, cache, options.bic_constant);
        const Prediction pred = predict(fit, *options.holdout.data, *options.holdout.cache);
        const VectorXd& y = options.holdout.data->y;
        return data.family == Family::gaussian ? rpmse(y, pred.response) : omr(y, pred.response);
    };

    const std::size_t nl = lambdas.size(), np = grid.phis.size();
    std::vector<TuneCell> cells(nl * np);
    std::vector<std::optional<FitResult>> best_per_phi(np);
    std::vector<std::size_t> best_cell_per_phi(np, 0);

    parallel_for(np, [&](std::size_t f) {
        std::optional<SplittingState> warm;
        for (std::size_t l = 0; l < nl; ++l) {
            PenaltyConfig config = options.base;
            config.lambda = lambdas[l];
            config.phi = grid.phis[f];
            FitResult fit = fit_fused(data, context, units, config, warm ? &*warm : nullptr);
            warm = fit.state;
            TuneCell& cell = cells[f * nl + l];
            cell.lambda = config.lambda;
            cell.phi = config.phi;
            cell.score = score_of(fit);
            cell.df = fusion_df(fit);
            for (const Partition& part : fit.partitions) cell.subgroups.push_back(part.count);
            cell.iterations = fit.diagnostics.iterations;
            cell.converged = fit.diagnostics.converged;
            if (!best_per_phi[f] || cell.score < cells[best_cell_per_phi[f]].score) {
                best_cell_per_phi[f] = f * nl + l;
                best_per_phi[f] = std::move(fit);
            }
        }
    });

    std::size_t best_f = 0;
    for (std::size_t f = 1; f < np; ++f)
        if (cells[best_cell_per_phi[f]].score < cells[best_cell_per_phi[best_f]].score) best_f = f;

    TuneResult result;
    result.cells = std::move(cells);
    result.best_index = best_cell_per_phi[best_f];
    result.fit = std::move(*best_per_phi[best_f]);
    result.best = result.fit.config;
    return result;
}

}  // namespace ghfm
