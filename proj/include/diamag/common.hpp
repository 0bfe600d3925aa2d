#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace diamag {

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// All recoverable failures (validation, domain errors) throw this.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846;

}  // namespace diamag
