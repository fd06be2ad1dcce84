#pragma once

#include <ostream>
#include <vector>

#include "propagator.hpp"
#include "systems.hpp"

namespace hamidx {

struct AngleLift {
  std::vector<double> times;
  /// Continuous argument of u + i v for z = gamma z0; empty for polar_split.
  std::vector<double> theta;
  /// Continuous angle of the orthogonal factor U = e^{J phi}, phi(t0) = 0 for gamma(t0) = I.
  std::vector<double> phi;
  double theta0 = 0.0;
  double max_increment = 0.0;
  /// max |theta - theta0 - phi|; at most pi/2 for a symplectic path from I.
  double max_polar_gap = 0.0;
  /// max ||U^T U - I|| where U was formed explicitly.
  double unitary_residual = 0.0;
};

/// Lift of the solution angle and of the polar angle for d = 1.
AngleLift angle_lift(const SymplecticPath& path, const Vec& z0);

/// Polar angle only: gamma = U (gamma^T gamma)^{1/2}, U = e^{J phi}.
AngleLift polar_split(const SymplecticPath& path);

/// Angle of the orthogonal polar factor of a 2x2 matrix with positive determinant.
double polar_angle(const Mat& m);

/// Closed-form U = m (m^T m)^{-1/2} for a 2x2 matrix.
Mat polar_factor(const Mat& m);

struct RotationNumber {
  double value = 0.0;      // (theta(L) - theta0) / L
  double phi_value = 0.0;  // phi(L) / L
  /// Slope of theta over the last half of the horizon.
  double trend = 0.0;
  double horizon = 0.0;
  double max_polar_gap = 0.0;
  double sympl_residual = 0.0;
  AngleLift lift;
};

RotationNumber rotation_number(const SymmetricField& field, double horizon, const Vec& z0,
                               const PropagationControl& control = {});
RotationNumber rotation_number(const SymmetricField& field, double horizon, const PropagationControl& control = {});

/// CSV rows t, theta, phi.
void write_lift_csv(std::ostream& out, const AngleLift& lift);

}  // namespace hamidx
