#include <doctest.h>

#include "fixtures.hpp"
#include "ghfm/baselines.hpp"
#include "ghfm/experiment.hpp"
#include "ghfm/precluster.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace ghfm;

namespace {

DesignCache design35(const FunctionalDataset& data) { return compute_gamma(data, BasisSpec::with_dimension(0.0, 23.0, 35, 3)); }

}  // namespace

TEST_SUITE("precluster") {

TEST_CASE("one group is the homogeneous fit") {
    for (Family family : {Family::gaussian, Family::bernoulli}) {
        const auto data = fixtures::random_dataset(40, 1, 4, family);
        const auto cache = compute_gamma(data, BasisSpec::with_dimension(0.0, 23.0, 10, 3));
        const auto res = precluster(data, cache, 1, 0.5);
        CHECK(std::all_of(res.assignment.begin(), res.assignment.end(), [](int g) { return g == 0; }));
        const auto sflm = fit_sflm(data, cache, 0.5);
        CHECK(std::abs(res.group_coefs.alpha - sflm.coefs.alpha) < 1e-8);
        CHECK((res.group_coefs.coefs - sflm.coefs.coefs).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("SSE decreases strictly on setting-1 runs") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto sim = generate_setting1(100, 1.0, seed);
        PreclusterOptions opts;
        opts.seed = seed;
        const auto res = precluster(sim.data, design35(sim.data), 6, 100.0, opts);
        CHECK(res.sse_trajectory.size() >= 2);
        CHECK(strictly_decreasing(res.sse_trajectory));
    }
}

TEST_CASE("penalized objective never increases") {
    for (Family family : {Family::gaussian, Family::bernoulli}) {
        const auto sim = family == Family::gaussian ? generate_setting1(120, 1.0, 8) : generate_setting3(120, 1.0, 8);
        PreclusterOptions opts;
        opts.seed = 8;
        opts.restarts = 2;
        const auto res = precluster(sim.data, design35(sim.data), 8, 100.0, opts);
        const auto& obj = res.objective_trajectory;
        for (std::size_t l = 1; l < obj.size(); ++l) CHECK(obj[l] <= obj[l - 1] + 1e-12 * std::abs(obj[l - 1]));
        CHECK(res.objective == doctest::Approx(obj.back()));
        std::set<int> used(res.assignment.begin(), res.assignment.end());
        CHECK(used.size() == 8);
        CHECK(*used.begin() == 0);
        CHECK(res.restart >= 0);
        CHECK(res.restart < 2);
    }
}

TEST_CASE("balanced initial partition is keyed by subject") {
    std::vector<std::string> ids;
    for (int i = 0; i < 23; ++i) ids.push_back("subj" + std::to_string(i));
    const auto groups = balanced_initial_partition(ids, 5, 42, 0);
    std::map<int, int> sizes;
    for (int g : groups) ++sizes[g];
    CHECK(sizes.size() == 5);
    for (auto [g, c] : sizes) CHECK((c == 4 || c == 5));

    auto shuffled = ids;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto again = balanced_initial_partition(shuffled, 5, 42, 0);
    for (int i = 0; i < 23; ++i) CHECK(again[22 - i] == groups[i]);
    CHECK(balanced_initial_partition(ids, 5, 42, 1) != groups);
}

TEST_CASE("determinism and permutation equivariance") {
    const auto sim = generate_setting1(80, 1.0, 3);
    const auto cache = design35(sim.data);
    PreclusterOptions opts;
    opts.seed = 3;
    const auto a = precluster(sim.data, cache, 6, 100.0, opts);
    const auto b = precluster(sim.data, cache, 6, 100.0, opts);
    CHECK(a.assignment == b.assignment);
    CHECK(a.sse_trajectory == b.sse_trajectory);

    std::vector<int> perm(80);
    for (int i = 0; i < 80; ++i) perm[i] = (i * 37) % 80;
    const auto permuted = sim.data.subset(perm);
    const auto c = precluster(permuted, design35(permuted), 6, 100.0, opts);
    // same partition up to relabeling
    std::map<int, int> relabel;
    bool consistent = true;
    for (int r = 0; r < 80; ++r) {
        auto [it, fresh] = relabel.emplace(c.assignment[r], a.assignment[perm[r]]);
        consistent = consistent && it->second == a.assignment[perm[r]];
    }
    CHECK(consistent);
    CHECK(relabel.size() == 6);
}

TEST_CASE("argument errors") {
    const auto data = fixtures::random_dataset(5, 1, 1);
    const auto cache = compute_gamma(data, BasisSpec::with_dimension(0.0, 23.0, 6, 3));
    CHECK_THROWS_AS(precluster(data, cache, 6, 1.0), ArgumentError);
    CHECK_THROWS_AS(precluster(data, cache, 0, 1.0), ArgumentError);
}

}
