#include <doctest.h>

#include "ghfm/metrics.hpp"
#include "oracles.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <numeric>
#include <random>

using namespace ghfm;

namespace {

VectorXd vec(std::initializer_list<double> v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), out.data());
    return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("rpmse") {
    const VectorXd y = vec({1, 2, 2});
    CHECK(rpmse(y, y) == 0.0);
    CHECK(rpmse(y, VectorXd::Zero(3)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rpmse(y, vec({1, 2, 4})) == doctest::Approx(std::sqrt(4.0 / 3) / std::sqrt(9.0 / 3)).epsilon(1e-15));
    CHECK(rpmse(y, vec({1, 2, 4})) == doctest::Approx(0.6667).epsilon(1e-4));
    CHECK(rpmse(2 * y, 2 * vec({1, 2, 4})) == doctest::Approx(rpmse(y, vec({1, 2, 4}))).epsilon(1e-15));
    CHECK(rmse(vec({3, 4}), vec({0, 0})) == doctest::Approx(std::sqrt(12.5)));
}

TEST_CASE("ise") {
    const auto basis = BasisSpec::with_dimension(0.0, 23.0, 12, 3);
    MatrixXd coefs(12, 3);
    for (int i = 0; i < 3; ++i) coefs.col(i).setLinSpaced(12, -1.0 + i, 2.0 * i + 1.0);
    const SplineCurves truth{basis, coefs};
    CHECK(ise(truth, truth) == 0.0);
    CHECK(ise(SplineCurves{basis, MatrixXd::Zero(12, 3)}, truth) == doctest::Approx(1.0).epsilon(1e-14));

    // shared-basis path against the quadrature path
    SplineCurves est{basis, coefs};
    est.coefs(4, 1) += 0.5;
    const CurveFunction f = [&](int i, double t) { return eval_basis(basis, t).dot(coefs.col(i)); };
    CHECK(ise(est, truth) == doctest::Approx(ise(est, f)).epsilon(1e-12));

    // different bases on each side
    const auto fine = BasisSpec::with_dimension(0.0, 23.0, 20, 3);
    const SplineCurves zero_fine{fine, MatrixXd::Zero(20, 3)};
    CHECK(ise(zero_fine, truth) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ise of cos against sin matches a dense oracle") {
    const auto basis = BasisSpec::with_dimension(0.0, 23.0, 600, 3);
    const auto rule = composite_rule(basis, 8);
    const MatrixXd B = basis_matrix(basis, rule.nodes);
    const MatrixXd gram = B.transpose() * rule.weights.asDiagonal() * B;
    const VectorXd c = gram.llt().solve(B.transpose() * rule.weights.cwiseProduct(rule.nodes.array().cos().matrix()));
    const SplineCurves est{basis, c};
    const double got = ise(est, [](int, double t) { return std::sin(t); });
    const auto grid = oracle::uniform_breaks(0, 23, 23);
    const auto num = oracle::simpson([](oracle::ld t) { const auto d = std::cos(t) - std::sin(t); return d * d; }, grid, 200);
    const auto den = oracle::simpson([](oracle::ld t) { return std::sin(t) * std::sin(t); }, grid, 200);
    CHECK(std::abs(got - double(std::sqrt(num / den))) < 1e-6);
}

TEST_CASE("smr") {
    const std::vector<int> truth{1, 1, 2, 2};
    CHECK(smr(truth, truth) == 0.0);
    CHECK(smr(std::vector<int>{7, 7, 3, 3}, truth) == 0.0);
    CHECK(smr(std::vector<int>{1, 2, 2, 2}, truth) == 0.25);
    // more estimated groups than true ones
    CHECK(smr(std::vector<int>{0, 1, 2, 3}, truth) == 0.5);
    CHECK(smr(std::vector<int>{0, 0, 0, 0}, truth) == 0.5);
    const std::vector<int> t3{0, 0, 1, 1, 2, 2};
    const std::vector<int> e3{2, 0, 1, 1, 0, 0};
    CHECK(smr(e3, t3) == doctest::Approx(1.0 / 6));
    CHECK(smr(t3, e3) == doctest::Approx(1.0 / 6));
    CHECK_THROWS_AS(smr(std::vector<int>{1}, truth), ArgumentError);
}

TEST_CASE("assignment solver against brute force") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const int rows = 2 + rep % 4, cols = 2 + (rep / 4) % 4;
        MatrixXd w(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) w(i, j) = u(rng);
        const auto match = max_weight_assignment(w);
        double got = 0.0;
        for (int i = 0; i < rows; ++i)
            if (match[i] >= 0) got += w(i, match[i]);
        // brute force over injections of the smaller side
        double best = 0.0;
        if (rows <= cols) {
            std::vector<int> perm(cols);
            std::iota(perm.begin(), perm.end(), 0);
            do {
                double s = 0.0;
                for (int i = 0; i < rows; ++i) s += w(i, perm[i]);
                best = std::max(best, s);
            } while (std::next_permutation(perm.begin(), perm.end()));
        } else {
            std::vector<int> perm(rows);
            std::iota(perm.begin(), perm.end(), 0);
            do {
                double s = 0.0;
                for (int j = 0; j < cols; ++j) s += w(perm[j], j);
                best = std::max(best, s);
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("omr") {
    const VectorXd y = vec({1, 0, 1});
    CHECK(omr(y, y) == 0.0);
    CHECK(omr(y, VectorXd::Constant(3, 0.5)) == doctest::Approx(1.0 / 3));
    CHECK(omr(y, vec({0.9, 0.6, 0.2})) == doctest::Approx(2.0 / 3));
    CHECK(omr(y, vec({0.9, 0.6, 0.2}), 0.7) == doctest::Approx(1.0 / 3));
}

TEST_CASE("roc suite") {
    const VectorXd y = vec({1, 1, 0, 0});
    CHECK(auc(y, vec({0.9, 0.8, 0.2, 0.1})) == 1.0);
    CHECK(auc(y, VectorXd::Constant(4, 0.3)) == 0.5);
    CHECK(auc(y, vec({0.9, 0.4, 0.6, 0.1})) == 0.75);
    const VectorXd p = vec({0.9, 0.4, 0.6, 0.1});
    CHECK(auc(y, p.array().exp().matrix()) == 0.75);
    CHECK_THROWS_AS(auc(VectorXd::Ones(3), vec({0.1, 0.2, 0.3})), DomainError);

    const auto s = roc_suite(y, p);
    REQUIRE(s.fnr.has_value());
    CHECK(*s.fnr == 0.5);
    CHECK(*s.fpr == 0.5);
    CHECK(*s.auc == 0.75);
    const auto only_pos = roc_suite(VectorXd::Ones(2), vec({0.7, 0.2}));
    CHECK(*only_pos.fnr == 0.5);
    CHECK_FALSE(only_pos.fpr.has_value());
    CHECK_FALSE(only_pos.auc.has_value());

    const auto days = multiday_roc({y, y}, {p, vec({0.9, 0.8, 0.2, 0.1})});
    CHECK(*days.auc == doctest::Approx(0.875));
    CHECK(*days.fnr == doctest::Approx(0.25));
}

TEST_CASE("multi-day prediction error") {
    const VectorXd y = vec({1, 2, 3});
    CHECK(multiday_rpmse({y, y}, {y, y}) == 0.0);
    const VectorXd yhat = vec({1.5, 2, 2});
    CHECK(multiday_rpmse({y, y, y}, {yhat, yhat, yhat}) == doctest::Approx(rmse(y, yhat)).epsilon(1e-15));
    const VectorXd zero = VectorXd::Zero(2);
    CHECK(multiday_rpmse({zero, zero}, {VectorXd::Ones(2), VectorXd::Constant(2, 3.0)}) == doctest::Approx(2.0));
    CHECK(multiday_rpmse({zero, zero}, {VectorXd::Ones(2), VectorXd::Constant(2, 3.0)}, MultidayRmse::root_of_mean) ==
          doctest::Approx(std::sqrt(5.0)));
}

}
