#pragma once

// Simulation harness: generate a training set and a held-out replicate for
// the same subjects, fit every method on the training set, and score each
// one against the held-out outcomes and the generating truth.

#include "ghfm/baselines.hpp"
#include "ghfm/precluster.hpp"
#include "ghfm/simgen.hpp"
#include "ghfm/tuner.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ghfm {

struct PipelineOptions {
    int basis_dim = 35;
    int degree = 3;
    int preclusters = -1;  // -1: 6 when n <= 500, else 100; 0 fits subjects directly
    int restarts = 5;
    double precluster_phi = 100.0;
    std::optional<TuneGrid> grid;  // defaults to TuneGrid::scaled(y, units)
    Criterion criterion = Criterion::bic;
    PenaltyConfig base;
    int resp_groups = 0;  // 0 uses the true number of subgroups
    bool baselines = true;
};

struct MethodScore {
    std::string method;
    double rpmse = std::numeric_limits<double>::quiet_NaN();
    double omr = std::numeric_limits<double>::quiet_NaN();
    double ise = std::numeric_limits<double>::quiet_NaN();
    double smr = std::numeric_limits<double>::quiet_NaN();
    int subgroups = 0;
    double seconds = 0.0;
};

struct ReplicateResult {
    SimulationOptions simulation;
    std::vector<MethodScore> scores;  // ghfm first, then sflm, resp, lm
    double lambda = 0.0;
    double phi = 0.0;
    std::optional<PreclusterResult> precluster;
    int pure_precluster_groups = 0;  // groups whose members share one true label

    const MethodScore& score(const std::string& method) const;
};

/// Pre-clustering groups used for a sample of size n under `preclusters`.
int resolve_preclusters(int preclusters, int n);

/// Training data is draw 0 of the generator; the held-out set is draw 1.
ReplicateResult run_replicate(const SimulationOptions& simulation, const PipelineOptions& options);

/// Number of pre-clustering groups containing a single true subgroup.
int pure_groups(const std::vector<int>& assignment, int K, const std::vector<int>& truth);

/// Whether an SSE trajectory decreases strictly (up to `slack`) at every step.
bool strictly_decreasing(const std::vector<double>& trajectory, double slack = 1e-9);

struct ReproduceOptions {
    int table = 1;
    int n = 100;
    int seeds = 5;
    std::uint64_t seed = 1;
    PipelineOptions pipeline;
    std::ostream* replicates = nullptr;  // optional per-replicate CSV
};

/// Runs the sweep behind one of the four simulation tables and writes a CSV
/// with averaged scores next to reference values.
void reproduce_table(const ReproduceOptions& options, std::ostream& out);

}  // namespace ghfm
