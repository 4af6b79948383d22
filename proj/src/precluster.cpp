#include "ghfm/precluster.hpp"

#include "ghfm/parallel.hpp"
#include "ghfm/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace ghfm {

std::vector<int> balanced_initial_partition(const std::vector<std::string>& subject_ids, int K, std::uint64_t seed,
                                            int restart) {
    const std::size_t n = subject_ids.size();
    std::vector<std::uint64_t> keys(n);
    for (std::size_t i = 0; i < n; ++i)
        keys[i] = mix_seed(seed, static_cast<std::uint64_t>(restart), hash_string(subject_ids[i]));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (keys[a] != keys[b]) return keys[a] < keys[b];
        return subject_ids[a] < subject_ids[b];
    });
    std::vector<int> groups(n);
    for (std::size_t r = 0; r < n; ++r) groups[order[r]] = static_cast<int>(r % K);
    return groups;
}

namespace {

struct Run {
    std::vector<int> assignment;
    GroupedFit fit;
    std::vector<double> sse, objective;
    int iterations = 0;
};

Run run_once(const FunctionalDataset& data, const MatrixXd& design, const MatrixXd& omega, int K,
             std::vector<int> assignment, int max_iters) {
    const int n = data.n();
    Run run;
    GroupedFit fit;
    auto refit = [&](const GroupedFit* warm) {
        GroupedProblem problem{design, data.y, data.family, assignment, K, omega};
        fit = fit_grouped(problem, warm);
        const VectorXd eta = grouped_eta(design, assignment, fit.alpha, fit.coefs);
        double sse = 0.0;
        for (int i = 0; i < n; ++i)
            sse += data.family == Family::gaussian ? (data.y[i] - eta[i]) * (data.y[i] - eta[i])
                                                   : nll(data.family, data.y[i], eta[i]);
        run.sse.push_back(sse);
        run.objective.push_back(fit.objective);
    };

    refit(nullptr);
    for (int iter = 0; iter < max_iters; ++iter) {
        run.iterations = iter + 1;
        // Per-subject loss under every group's coefficients.
        const MatrixXd scores = (design * fit.coefs).array() + fit.alpha;
        std::vector<int> next(assignment);
        std::vector<double> gain(n, 0.0);
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = assignment[i];
            const double incumbent = nll(data.family, data.y[i], scores(i, best));
            double best_loss = incumbent;
            for (int k = 0; k < K; ++k) {
                const double loss = nll(data.family, data.y[i], scores(i, k));
                if (loss < best_loss) {
                    best_loss = loss;
                    best = k;
                }
            }
            changed = changed || best != assignment[i];
            next[i] = best;
            gain[i] = incumbent - best_loss;
        }
        if (!changed) break;

        // A group about to empty keeps the leaving member that gains least by
        // moving. Staying put never raises that subject's loss, so the
        // objective cannot increase; repeat since a retention can empty the
        // group the subject was headed for.
        for (bool repaired = true; repaired;) {
            repaired = false;
            std::vector<int> sizes(K, 0);
            for (int g : next) ++sizes[g];
            for (int k = 0; k < K; ++k) {
                if (sizes[k] > 0) continue;
                int keep = -1;
                for (int i = 0; i < n; ++i)
                    if (assignment[i] == k && (keep < 0 || gain[i] < gain[keep])) keep = i;
                --sizes[next[keep]];
                next[keep] = k;
                ++sizes[k];
                gain[keep] = 0.0;
                repaired = true;
            }
        }
        if (next == assignment) break;
        assignment = std::move(next);
        refit(&fit);
    }
    run.assignment = std::move(assignment);
    run.fit = std::move(fit);
    return run;
}

}  // namespace

PreclusterResult precluster(const FunctionalDataset& data, const DesignCache& cache, int K, double phi,
                            const PreclusterOptions& options) {
    const int n = data.n();
    if (K < 1) throw ArgumentError("precluster: K must be >= 1");
    if (K > n) throw ArgumentError("precluster: K=" + std::to_string(K) + " exceeds n=" + std::to_string(n));
    if (options.restarts < 1 || options.max_iters < 0) throw ArgumentError("precluster: need restarts >= 1");
    if (!(phi >= 0.0)) throw ArgumentError("precluster: phi must be nonnegative");

    const MatrixXd design = cache.design();
    const QuadratureRule rule = composite_rule(cache.basis);
    const MatrixXd omega = penalty_matrix(roughness_block(cache.basis, rule), cache.p(), phi, options.ridge);

    std::vector<Run> runs(options.restarts);
    parallel_for(static_cast<std::size_t>(options.restarts), [&](std::size_t r) {
        runs[r] = run_once(data, design, omega, K,
                           balanced_initial_partition(data.subject_ids, K, options.seed, static_cast<int>(r)),
                           options.max_iters);
    });
    int best = 0;
    for (int r = 1; r < options.restarts; ++r)
        if (runs[r].fit.objective < runs[best].fit.objective) best = r;

    Run& win = runs[best];
    PreclusterResult result;
    result.K = K;
    result.assignment = std::move(win.assignment);
    result.group_coefs = {win.fit.alpha, std::move(win.fit.coefs), cache.p(), cache.L(), {}};
    result.sse_trajectory = std::move(win.sse);
    result.objective_trajectory = std::move(win.objective);
    result.objective = win.fit.objective;
    result.iterations = win.iterations;
    result.restart = best;
    result.seed = options.seed;
    result.phi = phi;
    return result;
}

}  // namespace ghfm
