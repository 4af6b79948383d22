#pragma once

#include "ghfm/types.hpp"

#include <string>
#include <string_view>

namespace ghfm {

enum class Family { gaussian, bernoulli };

std::string to_string(Family family);
Family parse_family(std::string_view name);

/// First and second derivative of the per-subject negative log-likelihood
/// with respect to the linear predictor.
struct Curvature {
    double grad;
    double hess;
};

// Bernoulli curvature floor; keeps Newton systems nonsingular under separation.
inline constexpr double kBernoulliHessianFloor = 1e-10;

/// Per-subject negative log-likelihood, constants in the parameters dropped.
/// Gaussian: (y - eta)^2 / 2. Bernoulli: log(1 + e^eta) - y * eta.
double nll(Family family, double y, double eta);

Curvature grad_hess(Family family, double y, double eta);

/// Inverse link: eta for Gaussian, sigmoid(eta) for Bernoulli.
double mean_response(Family family, double eta);

double sigmoid(double eta);
double softplus(double eta);

/// Sum of nll over all subjects.
double total_nll(Family family, const VectorXd& y, const VectorXd& eta);

}  // namespace ghfm
