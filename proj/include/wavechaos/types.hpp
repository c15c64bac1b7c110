#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace wavechaos {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// max_ij |(A A^dagger - I)_ij|
inline double unitarity_defect(const CMatrix& a) {
    const CMatrix p = a * a.adjoint();
    return (p - CMatrix::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff();
}

}  // namespace wavechaos
