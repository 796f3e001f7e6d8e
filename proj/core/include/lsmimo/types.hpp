#pragma once

#include <complex>

#include <Eigen/Dense>

namespace lsmimo {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

enum class Link { Downlink, Uplink };

}  // namespace lsmimo
