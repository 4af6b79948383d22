#include <doctest.h>

#include "fixtures.hpp"
#include "ghfm/parallel.hpp"
#include "ghfm/precluster.hpp"
#include "ghfm/simgen.hpp"
#include "ghfm/tuner.hpp"

#include <algorithm>

using namespace ghfm;

namespace {

struct Setup {
    SimulatedData sim;
    DesignCache cache;
    PreclusterResult pre;
};

Setup setting1_units(std::uint64_t seed) {
    Setup s{generate_setting1(100, 1.0, seed), {}, {}};
    s.cache = compute_gamma(s.sim.data, BasisSpec::with_dimension(0.0, 23.0, 35, 3));
    PreclusterOptions opts;
    opts.seed = seed;
    s.pre = precluster(s.sim.data, s.cache, 6, 100.0, opts);
    return s;
}

}  // namespace

TEST_SUITE("tuner") {

TEST_CASE("grids") {
    const auto g = log_grid(-2, 1, 4);
    REQUIRE(g.size() == 4);
    CHECK(g.front() == doctest::Approx(0.01));
    CHECK(g[2] == doctest::Approx(1.0));
    CHECK(g.back() == doctest::Approx(10.0));
    const auto d = TuneGrid::defaults(100);
    CHECK(d.lambdas.size() == 13);
    CHECK(d.phis.size() == 7);
    CHECK(*std::max_element(d.lambdas.begin(), d.lambdas.end()) == doctest::Approx(0.1));
    CHECK(*std::min_element(d.phis.begin(), d.phis.end()) == doctest::Approx(1e-9));
    VectorXd y(4);
    y << 1, 2, 3, 4;
    const auto s = TuneGrid::scaled(y, 10);
    CHECK(s.lambdas.size() == 15);
    CHECK(s.lambdas.front() == doctest::Approx(std::sqrt(5.0 / 3.0) / 100 * 0.01));
    CHECK(s.phis == std::vector<double>{1.0, 10.0, 100.0});
    CHECK_THROWS_AS(TuneGrid::scaled(VectorXd::Ones(4), 3), ArgumentError);
    CHECK(parse_criterion("holdout") == Criterion::holdout);
    CHECK_THROWS_AS(parse_criterion("aic"), ArgumentError);
}

TEST_CASE("single point grid") {
    const auto data = fixtures::random_dataset(20, 1, 2);
    const auto cache = compute_gamma(data, BasisSpec::with_dimension(0.0, 23.0, 8, 3));
    std::vector<int> g(20);
    for (int i = 0; i < 20; ++i) g[i] = i % 4;
    const auto res = tune(data, cache, UnitMap::from_groups(g, 4), TuneGrid{{0.3}, {0.2}});
    CHECK(res.cells.size() == 1);
    CHECK(res.best.lambda == 0.3);
    CHECK(res.best.phi == 0.2);
    CHECK(res.best_index == 0);
    CHECK_THROWS_AS(tune(data, cache, UnitMap::from_groups(g, 4), TuneGrid{{}, {0.2}}), ArgumentError);
    TuneOptions holdout;
    holdout.criterion = Criterion::holdout;
    CHECK_THROWS_AS(tune(data, cache, UnitMap::from_groups(g, 4), TuneGrid{{0.3}, {0.2}}, holdout), ArgumentError);
}

TEST_CASE("BIC value") {
    const auto data = fixtures::random_dataset(20, 1, 3);
    const auto cache = compute_gamma(data, BasisSpec::with_dimension(0.0, 23.0, 8, 3));
    std::vector<int> g(20);
    for (int i = 0; i < 20; ++i) g[i] = i % 2;
    PenaltyConfig cfg;
    cfg.phi = 0.5;
    const auto fit = fit_fused(data, cache, UnitMap::from_groups(g, 2), cfg);
    REQUIRE(fit.partitions[0].count == 2);
    const auto eta = predict(fit, data, cache).eta;
    const double rss = (data.y - eta).squaredNorm();
    // 2 mean nll is the mean squared residual for the Gaussian family
    const double want = 20 * std::log(rss / 20) + 2.0 * (2 * 8 + 1) * std::log(20.0);
    CHECK(bic_score(fit, data, cache, 2.0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(fusion_df(fit) == 17.0);
}

TEST_CASE("interior lambda beats both ends on setting-1 data") {
    const auto s = setting1_units(1);
    TuneGrid grid = TuneGrid::scaled(s.sim.data.y, 6);
    grid.phis = {1.0};
    grid.lambdas.push_back(0.0);
    grid.lambdas.push_back(1e6);
    const auto res = tune(s.sim.data, s.cache, s.pre.units(), grid);
    const double top = *std::max_element(grid.lambdas.begin(), grid.lambdas.end());
    CHECK(res.best.lambda > 0.0);
    CHECK(res.best.lambda < top);
    // the ends really are the extremes of the path
    CHECK(res.cells.front().subgroups[0] == 1);
    CHECK(res.cells.back().subgroups[0] == 6);

    SUBCASE("df does not increase with lambda along the path") {
        for (std::size_t l = 1; l < res.cells.size(); ++l) CHECK(res.cells[l].df >= res.cells[l - 1].df);
    }
}

TEST_CASE("deterministic and thread independent") {
    const auto s = setting1_units(2);
    TuneGrid grid{log_grid(0, 2, 5), {1.0, 10.0}};
    set_threads(1);
    const auto a = tune(s.sim.data, s.cache, s.pre.units(), grid);
    set_threads(3);
    const auto b = tune(s.sim.data, s.cache, s.pre.units(), grid);
    set_threads(1);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t k = 0; k < a.cells.size(); ++k) {
        CHECK(a.cells[k].score == b.cells[k].score);
        CHECK(a.cells[k].subgroups == b.cells[k].subgroups);
    }
    CHECK(a.fit.coefs.coefs == b.fit.coefs.coefs);
}

TEST_CASE("holdout criterion") {
    const auto s = setting1_units(3);
    const auto val = redraw(s.sim.truth, 2);
    const auto val_cache = compute_gamma_like(val.data, s.cache);
    TuneOptions opts;
    opts.criterion = Criterion::holdout;
    opts.holdout = {&val.data, &val_cache};
    const auto res = tune(s.sim.data, s.cache, s.pre.units(), TuneGrid{log_grid(0, 2.5, 6), {1.0}}, opts);
    for (const auto& c : res.cells) CHECK(res.cells[res.best_index].score <= c.score);
    CHECK(res.cells[res.best_index].score < 0.2);
}

}
