#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "errors.hpp"
#include "oracles.hpp"
#include "rotation.hpp"

using namespace hamidx;

TEST_CASE("polar factor against the SVD") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const Mat m = oracle::random_symplectic(1, rng, 2.0);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat u_ref = svd.matrixU() * svd.matrixV().transpose();
    const Mat u = polar_factor(m);
    CHECK(max_abs(u - u_ref) <= 1e-10);
    CHECK(polar_angle(m) == doctest::Approx(std::atan2(u_ref(1, 0), u_ref(0, 0))).epsilon(1e-10));
  }
  Mat big(2, 2);
  big << 1e9, 3.0, -2.0, 1e-9;
  const Mat u = polar_factor(big);
  CHECK(max_abs(u.transpose() * u - Mat::Identity(2, 2)) <= 1e-14);
  CHECK_THROWS_AS(polar_factor(Mat::Zero(2, 2)), Error);
}

TEST_CASE("rotation number of constant rotations") {
  for (double k : {0.5, 1.0, 2.0}) {
    const auto r = rotation_number(catalog("constant_k", {{"k", k}}), 50.0);
    CHECK(r.value == doctest::Approx(k).epsilon(1e-9));
    CHECK(r.phi_value == doctest::Approx(k).epsilon(1e-9));
    CHECK(r.max_polar_gap <= 1e-9);
    CHECK(r.lift.max_increment < std::numbers::pi / 2);
  }
}

TEST_CASE("polar angle of the non-point example follows psi") {
  const auto path = fundamental_solution(catalog("example_45"), 0.0, 100.0);
  const auto lift = polar_split(path);
  CHECK(lift.theta.empty());
  for (std::size_t i = 0; i < lift.times.size(); ++i) {
    CHECK(std::abs(lift.phi[i] - example45_psi(lift.times[i])) <= 1e-6);
  }
  const auto r = rotation_number(catalog("example_45"), 100.0);
  CHECK(r.phi_value == doctest::Approx(std::sin(std::log(101.0))).epsilon(1e-6));
  CHECK(r.max_polar_gap <= std::numbers::pi / 2 + 1e-6);
}

TEST_CASE("hyperbolic angle stays bounded") {
  Vec z0(2);
  z0 << 1.0, 0.3;
  const auto r = rotation_number(catalog("hyperbolic"), 200.0, z0);
  for (double th : r.lift.theta) CHECK(std::abs(th - r.lift.theta0) < std::numbers::pi / 2);
  CHECK(std::abs(r.value) < 0.01);
}

TEST_CASE("quasi-periodic rotation settles") {
  const auto r = rotation_number(catalog("quasi_periodic_demo"), 400.0);
  CHECK(std::abs(r.value - r.trend) <= 0.02);
  CHECK(r.sympl_residual <= 1e-8);
}

TEST_CASE("rotation preconditions and output") {
  try {
    rotation_number(catalog("constant_k"), 5.0);
    FAIL("expected insufficient horizon");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_horizon);
  }
  CHECK_THROWS_AS(rotation_number(catalog("constant_k", {{"d", 2}}), 20.0), Error);

  const auto path = fundamental_solution(catalog("constant_k"), 0.0, 1.0);
  Vec z0(2);
  z0 << 0.0, 1.0;
  const auto lift = angle_lift(path, z0);
  CHECK(lift.theta0 == doctest::Approx(std::numbers::pi / 2));
  std::ostringstream out;
  write_lift_csv(out, lift);
  CHECK(out.str().rfind("t,theta,phi\n", 0) == 0);
}
