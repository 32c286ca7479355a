#pragma once

#include <complex>

#include <Eigen/Dense>

namespace hybridlg {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

/// Number-basis amplitudes of one oscillator mode (length cutoff+1), or of the
/// ancilla (x) oscillator compound with the ancilla index major:
/// index = a * (cutoff + 1) + n, a = 0 for |-1>, a = 1 for |+1>.
using FockVector = Eigen::VectorXcd;

/// Dense operator on a FockVector space.
using FockOperator = Eigen::MatrixXcd;

using DensityMatrix = Eigen::MatrixXcd;

}  // namespace hybridlg
