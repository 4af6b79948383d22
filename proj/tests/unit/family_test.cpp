#include <doctest.h>

#include "ghfm/family.hpp"

#include <random>

using namespace ghfm;

TEST_SUITE("family") {

TEST_CASE("negative log-likelihood values") {
    CHECK(nll(Family::gaussian, 1.7, 1.7) == 0.0);
    CHECK(nll(Family::gaussian, 1.0, 3.0) == 2.0);
    CHECK(nll(Family::bernoulli, 1.0, 0.0) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
    // log(1 + e^40) = 40 + log1p(e^-40)
    const long double want = 40.0L + std::log1p(std::exp(-40.0L));
    CHECK(std::abs(nll(Family::bernoulli, 0.0, 40.0) - static_cast<double>(want)) < 1e-13);
    CHECK(std::isfinite(nll(Family::bernoulli, 0.0, 800.0)));
    CHECK(nll(Family::bernoulli, 1.0, -800.0) == doctest::Approx(800.0));
    CHECK(nll(Family::bernoulli, 1.0, 800.0) == doctest::Approx(0.0));
}

TEST_CASE("gradient and curvature") {
    const auto g = grad_hess(Family::gaussian, 2.0, 5.0);
    CHECK(g.grad == 3.0);
    CHECK(g.hess == 1.0);
    for (double y : {0.0, 1.0}) {
        const auto b = grad_hess(Family::bernoulli, y, 0.0);
        CHECK(b.grad == doctest::Approx(0.5 - y));
        CHECK(b.hess == doctest::Approx(0.25));
    }
}

TEST_CASE("gradient matches central differences at random points") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> eta_dist(-8.0, 8.0);
    for (Family family : {Family::gaussian, Family::bernoulli}) {
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double eta = eta_dist(rng);
            const double y = family == Family::gaussian ? eta_dist(rng) : double(rng() % 2);
            const double h = 1e-5;
            const double fd = (nll(family, y, eta + h) - nll(family, y, eta - h)) / (2 * h);
            const double g = grad_hess(family, y, eta).grad;
            worst = std::max(worst, std::abs(g - fd) / std::max(std::abs(g), 1e-3));
            CHECK(grad_hess(family, y, eta).hess >= 0.0);
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("inverse link and names") {
    CHECK(mean_response(Family::gaussian, 1.25) == 1.25);
    CHECK(mean_response(Family::bernoulli, 0.0) == 0.5);
    CHECK(sigmoid(-1000.0) == 0.0);
    CHECK(sigmoid(1000.0) == 1.0);
    CHECK(softplus(-1000.0) >= 0.0);
    CHECK(parse_family("bernoulli") == Family::bernoulli);
    CHECK(to_string(Family::gaussian) == "gaussian");
    CHECK_THROWS_AS(parse_family("poisson"), ArgumentError);
    VectorXd y(2), eta(2);
    y << 1.0, 0.0;
    eta << 0.0, 0.0;
    CHECK(total_nll(Family::gaussian, y, eta) == 0.5);
}

}
