// Repeated-seed properties checked against generator labels. Prints one
// PASS/FAIL line per property.

#include "ghfm/experiment.hpp"
#include "ghfm/parallel.hpp"

#include <cstdio>

using namespace ghfm;

namespace {

bool report(const char* name, bool pass, const char* detail) {
    std::printf("property %s: %s  %s\n", name, pass ? "PASS" : "FAIL", detail);
    std::fflush(stdout);
    return pass;
}

// n=400, K=20: no pre-clustering group mixes true subgroups, in >= 95 of 100 seeds.
bool finer_partition() {
    const int n = 400, K = 20, seeds = 100;
    int clean = 0, monotone = 0;
    for (int s = 1; s <= seeds; ++s) {
        SimulationOptions sim;
        sim.n = n;
        sim.seed = static_cast<std::uint64_t>(s);
        const SimulatedData train = generate(sim);
        const DesignCache cache = compute_gamma(train.data, BasisSpec::with_dimension(0.0, train.data.t_end, 35, 3));
        PreclusterOptions opts;
        opts.seed = sim.seed;
        const PreclusterResult r = precluster(train.data, cache, K, PipelineOptions{}.precluster_phi, opts);
        const int pure = pure_groups(r.assignment, K, train.truth.labels);
        if (pure == K) ++clean;
        if (strictly_decreasing(r.sse_trajectory)) ++monotone;
    }
    char detail[160];
    std::snprintf(detail, sizeof detail, "%d of %d seeds without a mixed group (>= 95); %d strictly decreasing SSE", clean,
                  seeds, monotone);
    const bool a = report("finer_partition_n400_K20", clean >= 95, detail);
    std::snprintf(detail, sizeof detail, "%d of %d runs", monotone, seeds);
    const bool b = report("sse_strictly_decreasing_n400_K20", monotone == seeds, detail);
    return a && b;
}

// Tuned fit recovers the four true subgroups in >= 80% of 20 seeds.
bool recovers_four_subgroups() {
    bool all = true;
    for (double sigma : {0.1, 0.5, 1.0}) {
        int hits = 0;
        for (int s = 1; s <= 20; ++s) {
            SimulationOptions sim;
            sim.n = 100;
            sim.sigma_prime = sigma;
            sim.seed = static_cast<std::uint64_t>(s);
            PipelineOptions pipeline;
            pipeline.baselines = false;
            if (run_replicate(sim, pipeline).score("ghfm").subgroups == 4) ++hits;
        }
        char name[64], detail[96];
        std::snprintf(name, sizeof name, "four_subgroups_sigma_%g", sigma);
        std::snprintf(detail, sizeof detail, "%d of 20 seeds select 4 subgroups (>= 16)", hits);
        all = report(name, hits >= 16, detail) && all;
    }
    return all;
}

}  // namespace

int main() {
    set_threads(0);
    bool ok = finer_partition();
    ok = recovers_four_subgroups() && ok;
    return ok ? 0 : 1;
}
