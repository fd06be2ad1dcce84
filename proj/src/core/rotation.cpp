#include "rotation.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>

#include "errors.hpp"

namespace hamidx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxIncrement = 0.5 * kPi;
constexpr int kMaxRefine = 20;
constexpr double kGapSlack = 1e-6;

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

struct Sample {
  double theta = 0.0;  // raw angle in (-pi, pi]
  double phi = 0.0;
};

}  // namespace

double polar_angle(const Mat& m) {
  require(m.rows() == 2 && m.cols() == 2, ErrorCode::invalid_argument, "polar angle needs a 2x2 matrix");
  // For m = R(phi) P with P symmetric positive definite,
  // (a + d, c - b) is a positive multiple of (cos phi, sin phi).
  const double x = m(0, 0) + m(1, 1), y = m(1, 0) - m(0, 1);
  if (!(std::isfinite(x) && std::isfinite(y)) || (x == 0.0 && y == 0.0)) {
    fail(ErrorCode::numerical_integrity, "polar factor undefined for a singular matrix");
  }
  return std::atan2(y, x);
}

Mat polar_factor(const Mat& m) {
  require(m.rows() == 2 && m.cols() == 2, ErrorCode::invalid_argument, "polar factor needs a 2x2 matrix");
  if (!(m.determinant() > 0.0)) fail(ErrorCode::numerical_integrity, "polar factor needs a positive determinant");
  // m + det(m) m^{-T} is a positive multiple of the orthogonal factor.
  Mat sum(2, 2);
  sum << m(0, 0) + m(1, 1), m(0, 1) - m(1, 0), m(1, 0) - m(0, 1), m(0, 0) + m(1, 1);
  const double r = std::hypot(sum(0, 0), sum(1, 0));
  if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::numerical_integrity, "polar factor undefined");
  return sum / r;
}

AngleLift angle_lift(const SymplecticPath& path, const Vec& z0) {
  require(path.dim_half() == 1, ErrorCode::invalid_argument, "angle lift needs d = 1");
  require(z0.size() == 2 && z0.norm() > 0.0, ErrorCode::invalid_argument, "z0 must be a nonzero 2-vector");
  AngleLift lift;
  lift.theta0 = std::atan2(z0(1), z0(0));
  const Mat id = Mat::Identity(2, 2);

  auto sample = [&](const ScaledMat& g) {
    Sample s;
    const Vec z = g.mantissa * z0;
    s.theta = std::atan2(z(1), z(0));
    s.phi = polar_angle(g.mantissa);
    if (std::abs(g.exponent) <= 10) {
      const Mat u = polar_factor(g.value());
      lift.unitary_residual = std::max(lift.unitary_residual, max_abs(u.transpose() * u - id));
    }
    return s;
  };

  const auto& times = path.times();
  Sample prev = sample(path.gamma_scaled(0));
  double theta = lift.theta0 + wrap(prev.theta - lift.theta0);
  double phi = prev.phi;
  lift.times.push_back(times[0]);
  lift.theta.push_back(theta);
  lift.phi.push_back(phi);

  auto push = [&](double t, const Sample& s) {
    const double dt = wrap(s.theta - prev.theta);
    const double dp = wrap(s.phi - prev.phi);
    lift.max_increment = std::max({lift.max_increment, std::abs(dt), std::abs(dp)});
    theta += dt;
    phi += dp;
    prev = s;
    lift.times.push_back(t);
    lift.theta.push_back(theta);
    lift.phi.push_back(phi);
    const double gap = std::abs(theta - lift.theta0 - phi);
    lift.max_polar_gap = std::max(lift.max_polar_gap, gap);
  };

  for (std::size_t i = 1; i < times.size(); ++i) {
    const Sample next = sample(path.gamma_scaled(i));
    if (std::abs(wrap(next.theta - prev.theta)) < kMaxIncrement &&
        std::abs(wrap(next.phi - prev.phi)) < kMaxIncrement) {
      push(times[i], next);
      continue;
    }
    // Refine the interval with dense output until every increment is small.
    bool done = false;
    for (int level = 1; level <= kMaxRefine && !done; ++level) {
      const int parts = 1 << level;
      std::vector<Sample> subs;
      Sample last = prev;
      bool ok = true;
      for (int k = 1; k <= parts; ++k) {
        const double t = times[i - 1] + (times[i] - times[i - 1]) * k / parts;
        const Sample s = k == parts ? next : sample(path.gamma_scaled_at(t));
        if (std::abs(wrap(s.theta - last.theta)) >= kMaxIncrement ||
            std::abs(wrap(s.phi - last.phi)) >= kMaxIncrement) {
          ok = false;
          break;
        }
        subs.push_back(s);
        last = s;
      }
      if (!ok) continue;
      for (int k = 1; k <= parts; ++k) {
        push(times[i - 1] + (times[i] - times[i - 1]) * k / parts, subs[static_cast<std::size_t>(k - 1)]);
      }
      done = true;
    }
    if (!done) {
      fail(ErrorCode::lift_failure, "angle increment bound unattainable near t = " + std::to_string(times[i]));
    }
  }
  if (path.anchor() == id && lift.max_polar_gap > 0.5 * kPi + kGapSlack) {
    fail(ErrorCode::numerical_integrity,
         "solution angle left the polar comparison band: gap " + std::to_string(lift.max_polar_gap));
  }
  if (lift.unitary_residual > 1e-9) {
    fail(ErrorCode::numerical_integrity, "polar factor is not orthogonal within 1e-9");
  }
  return lift;
}

AngleLift polar_split(const SymplecticPath& path) {
  Vec z0(2);
  z0 << 1.0, 0.0;
  AngleLift lift = angle_lift(path, z0);
  lift.theta.clear();
  lift.max_polar_gap = 0.0;
  return lift;
}

RotationNumber rotation_number(const SymmetricField& field, double horizon, const Vec& z0,
                               const PropagationControl& control) {
  require(field.dim_half() == 1, ErrorCode::invalid_argument, "rotation number needs d = 1");
  require(horizon >= 10.0, ErrorCode::insufficient_horizon, "rotation number needs horizon >= 10");
  const auto path = fundamental_solution(field, 0.0, horizon, control);
  RotationNumber out;
  out.lift = angle_lift(path, z0);
  out.horizon = horizon;
  const auto& lift = out.lift;
  out.value = (lift.theta.back() - lift.theta0) / horizon;
  out.phi_value = lift.phi.back() / horizon;
  // theta at the first sample past the half horizon.
  std::size_t mid = 0;
  while (mid + 1 < lift.times.size() && lift.times[mid] < 0.5 * horizon) ++mid;
  out.trend = (lift.theta.back() - lift.theta[mid]) / (lift.times.back() - lift.times[mid]);
  out.max_polar_gap = lift.max_polar_gap;
  out.sympl_residual = path.sympl_residual();
  return out;
}

RotationNumber rotation_number(const SymmetricField& field, double horizon, const PropagationControl& control) {
  Vec z0(2);
  z0 << 1.0, 0.0;
  return rotation_number(field, horizon, z0, control);
}

void write_lift_csv(std::ostream& out, const AngleLift& lift) {
  out << "t,theta,phi\n" << std::setprecision(17);
  for (std::size_t i = 0; i < lift.times.size(); ++i) {
    out << lift.times[i] << ',';
    if (i < lift.theta.size()) out << lift.theta[i];
    out << ',' << lift.phi[i] << '\n';
  }
}

}  // namespace hamidx
