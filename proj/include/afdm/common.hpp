#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace afdm {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Raised for violated preconditions and infeasible configurations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unit phasor e^{i 2 pi frac}.
inline cplx unit_phase(double frac) { return std::polar(1.0, kTwoPi * frac); }

/// Non-negative residue of a modulo m.
inline std::int64_t mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace afdm
