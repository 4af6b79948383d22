#include <doctest.h>

#include "ghfm/parallel.hpp"
#include "ghfm/simgen.hpp"
#include "oracles.hpp"

#include <Eigen/Cholesky>

#include <sstream>

using namespace ghfm;

namespace {

std::string as_csv(const FunctionalDataset& data) {
    std::ostringstream os;
    write_csv(os, data);
    return os.str();
}

}  // namespace

TEST_SUITE("simgen") {

TEST_CASE("zero coefficient noise gives block constants") {
    const auto sim = generate_setting1(8, 0.0, 5);
    const auto& b = sim.truth.beta_coefs;
    REQUIRE(b.rows() == 35);
    CHECK(b.col(0) == VectorXd::Constant(35, 20.0));
    CHECK(b.col(1) == VectorXd::Constant(35, 20.0));
    CHECK(b.col(7) == VectorXd::Constant(35, -40.0));
    CHECK(sim.truth.labels == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3});
    CHECK(sim.truth.beta(3, 11.0) == doctest::Approx(6.0));
}

TEST_CASE("block means as the coefficient noise vanishes") {
    const auto sim = generate_setting1(40, 1e-6, 9);
    const double means[] = {20, 6, -10, -40};
    for (int g = 0; g < 4; ++g) {
        const double avg = sim.truth.beta_coefs.middleCols(g * 10, 10).mean();
        CHECK(std::abs(avg - means[g]) < 1e-5);
    }
}

TEST_CASE("fixed seed reproduces the dataset byte for byte") {
    for (int setting : {1, 2, 3}) {
        SimulationOptions o;
        o.setting = setting;
        o.n = 20;
        o.seed = 7;
        set_threads(1);
        const auto a = as_csv(generate(o).data);
        set_threads(4);
        const auto b = as_csv(generate(o).data);
        set_threads(1);
        CHECK(a == b);
        o.seed = 8;
        CHECK(as_csv(generate(o).data) != a);
    }
}

TEST_CASE("setting 2 halves") {
    const int n = 10;
    const auto sim = generate_setting2(n, 3);
    CHECK(sim.truth.kind == TruthKind::closed_form);
    // subjects n/2 and n/2 + 1 in 1-based numbering
    CHECK(sim.truth.beta(n / 2 - 1, 1.3) == std::sin(1.3));
    CHECK(sim.truth.beta(n / 2, 1.3) == std::cos(1.3));
    CHECK(sim.truth.functions[sim.truth.labels[n / 2 - 1]] == "sin");
    CHECK(sim.truth.functions[sim.truth.labels[n / 2]] == "cos");
}

TEST_CASE("design path integrates X sin against a dense oracle") {
    const auto sim = generate_setting2(4, 11);
    const auto basis = BasisSpec::with_dimension(0.0, 23.0, 600, 3);
    const auto cache = compute_gamma(sim.data, basis);
    // least-squares spline representation of sin
    const auto rule = composite_rule(basis, 8);
    const MatrixXd B = basis_matrix(basis, rule.nodes);
    const MatrixXd gram = B.transpose() * rule.weights.asDiagonal() * B;
    const VectorXd rhs = B.transpose() * rule.weights.cwiseProduct(rule.nodes.array().sin().matrix());
    const VectorXd c = gram.llt().solve(rhs);
    const auto breaks = oracle::uniform_breaks(0, 23, 23);
    for (int i = 0; i < 4; ++i) {
        const auto f = [&](oracle::ld t) { return oracle::interpolate(sim.data.grid, sim.data.x[0].row(i), t) * std::sin(t); };
        const double want = double(oracle::simpson(f, breaks, 200));
        const double scale = double(oracle::simpson([&](oracle::ld t) { return std::abs(f(t)); }, breaks, 200));
        CHECK(std::abs(cache.gamma[0].row(i).dot(c) - want) / scale < 1e-6);
    }
}

TEST_CASE("setting 3 probabilities") {
    const auto flat = generate_setting3(4, 0.0, 2);
    CHECK(flat.truth.beta_coefs.col(0) == VectorXd::Constant(35, 3.0));
    CHECK(flat.truth.beta_coefs.col(3) == VectorXd::Constant(35, -3.0));
    CHECK(flat.truth.alpha == 0.0);
    CHECK(mean_response(Family::bernoulli, 0.0) == 0.5);

    const auto big = generate_setting3(10000, 1.0, 4);
    double p_mean = 0.0;
    for (int i = 0; i < big.data.n(); ++i) p_mean += sigmoid(big.eta[i]);
    p_mean /= big.data.n();
    CHECK(std::abs(big.data.y.mean() - p_mean) < 0.02);
    CHECK(big.data.family == Family::bernoulli);
}

TEST_CASE("redraw keeps subjects and truth") {
    const auto sim = generate_setting1(12, 1.0, 6);
    const auto test = redraw(sim.truth, 1);
    CHECK(test.data.subject_ids == sim.data.subject_ids);
    CHECK(test.truth.labels == sim.truth.labels);
    CHECK(test.truth.beta_coefs == sim.truth.beta_coefs);
    CHECK(test.data.x[0] != sim.data.x[0]);
    CHECK(as_csv(redraw(sim.truth, 1).data) == as_csv(test.data));
    CHECK(as_csv(redraw(sim.truth, 2).data) != as_csv(test.data));
    CHECK_THROWS_AS(redraw(sim.truth, 0), ArgumentError);
}

TEST_CASE("options validation and ids") {
    CHECK_THROWS_AS(generate_setting1(10, 1.0, 1), ArgumentError);
    CHECK_THROWS_AS(generate_setting2(7, 1), ArgumentError);
    CHECK_THROWS_AS(generate_setting1(8, -1.0, 1), ArgumentError);
    CHECK(simulated_subject_id(0, 100) == "S0001");
    CHECK(simulated_subject_id(11999, 12000) == "S12000");
}

}
