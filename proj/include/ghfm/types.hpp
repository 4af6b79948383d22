#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace ghfm {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using VectorXi = Eigen::VectorXi;

// Error taxonomy. The CLI maps ArgumentError/IngestError to exit code 2 and
// everything else to exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : Error {
    using Error::Error;
};
struct ArgumentError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct IngestError : Error {
    using Error::Error;
};
struct MappingError : Error {
    using Error::Error;
};

}  // namespace ghfm
