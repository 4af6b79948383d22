#include "ghfm/family.hpp"

#include <cmath>

namespace ghfm {

std::string to_string(Family family) {
    return family == Family::gaussian ? "gaussian" : "bernoulli";
}

Family parse_family(std::string_view name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "bernoulli") return Family::bernoulli;
    throw ArgumentError("unknown family '" + std::string(name) + "' (expected gaussian or bernoulli)");
}

namespace {

void check_eta(double eta) {
    if (!std::isfinite(eta)) throw NumericError("non-finite linear predictor");
}

}  // namespace

double sigmoid(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double softplus(double eta) {
    return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double nll(Family family, double y, double eta) {
    check_eta(eta);
    switch (family) {
        case Family::gaussian: {
            const double r = y - eta;
            return 0.5 * r * r;
        }
        case Family::bernoulli:
            return softplus(eta) - y * eta;
    }
    return 0.0;
}

Curvature grad_hess(Family family, double y, double eta) {
    check_eta(eta);
    switch (family) {
        case Family::gaussian:
            return {eta - y, 1.0};
        case Family::bernoulli: {
            const double p = sigmoid(eta);
            return {p - y, std::max(p * (1.0 - p), kBernoulliHessianFloor)};
        }
    }
    return {0.0, 0.0};
}

double mean_response(Family family, double eta) {
    return family == Family::gaussian ? eta : sigmoid(eta);
}

double total_nll(Family family, const VectorXd& y, const VectorXd& eta) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) sum += nll(family, y[i], eta[i]);
    return sum;
}

}  // namespace ghfm
