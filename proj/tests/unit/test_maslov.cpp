#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "errors.hpp"
#include "maslov.hpp"
#include "oracles.hpp"

using namespace hamidx;

namespace {

const Complex kOne(1.0, 0.0);
const Complex kMinusOne(-1.0, 0.0);
const Complex kI(0.0, 1.0);
constexpr double kPi = std::numbers::pi;

SymplecticPath rotation_path(double l, double k = 1.0, int d = 1) {
  return fundamental_solution(catalog("constant_k", {{"k", k}, {"d", d}}), 0.0, l);
}

Mat id2(int d = 1) { return Mat::Identity(2 * d, 2 * d); }

}  // namespace

TEST_CASE("det_function") {
  const auto zero = fundamental_solution(catalog("constant_k", {{"k", 0.0}}), 0.0, 1.0);
  for (const auto& s : det_function(zero, id2(), kOne, {0.0, 0.3, 1.0})) CHECK(std::abs(s.value) < 1e-14);

  const auto rot = rotation_path(7.0);
  std::vector<double> times;
  for (int i = 0; i <= 70; ++i) times.push_back(0.1 * i);
  for (const auto& s : det_function(rot, id2(), kOne, times)) {
    CHECK(s.value == doctest::Approx(2.0 - 2.0 * std::cos(s.time)).epsilon(1e-8).scale(1.0));
    CHECK(std::abs(s.imag) <= 1e-9);
  }
  // omega = i: conj(i) det(e^{Jt} - i) = 2 cos t ... zero at pi/2 mod 2pi only among [0, 7) where sin t = 1.
  const auto at = det_function(rot, id2(), kI, {kPi / 2, 1.0, 3.0});
  CHECK(std::abs(at[0].value) < 1e-9);
  CHECK(std::abs(at[1].value) > 1e-3);
}

TEST_CASE("find_crossings examples") {
  const auto zero = fundamental_solution(catalog("constant_k", {{"k", 0.0}}), 0.0, 1.0);
  CHECK(find_crossings(zero, AnchorFrame::from_matrix(id2()), kMinusOne, 0.0, 0.0, 1.0).crossings.empty());

  const auto rot3 = rotation_path(3.0);
  auto scan = find_crossings(rot3, AnchorFrame::from_matrix(id2()), kI, 0.0, 0.0, 3.0);
  REQUIRE(scan.crossings.size() == 1);
  CHECK(scan.crossings[0].time == doctest::Approx(kPi / 2).epsilon(1e-10));
  CHECK(scan.crossings[0].kernel_dim == 1);
  CHECK(scan.crossings[0].signature == 1);

  const auto rot7 = rotation_path(7.0);
  scan = find_crossings(rot7, AnchorFrame::from_matrix(id2()), kOne, 0.0, 0.0, 7.0);
  REQUIRE(scan.crossings.size() == 2);
  CHECK(scan.crossings[0].time == 0.0);
  CHECK(std::abs(scan.crossings[1].time - 2 * kPi) < 1e-8);
  CHECK(scan.crossings[1].kernel_dim == 2);
  CHECK(scan.crossings[1].signature == 2);

  std::ostringstream os;
  write_crossings_csv(os, scan.crossings);
  CHECK(os.str().rfind("time,kernel_dim,signature,d_slope", 0) == 0);
}

TEST_CASE("iota and i_omega calibration") {
  const auto zero = fundamental_solution(catalog("constant_k", {{"k", 0.0}}), 0.0, 1.0);
  CHECK(iota(id2(), zero, kMinusOne).value == 0);
  for (int d : {1, 2}) {
    const auto z = fundamental_solution(catalog("constant_k", {{"k", 0.0}, {"d", d}}), 0.0, 1.0);
    const auto v = i_omega(z, kOne);
    CHECK(v.value == -d);
    CHECK(v.epsilon > 0.0);
  }
  const auto rot10 = rotation_path(10.0);
  CHECK(i_omega(rot10, kOne).value == 3);
  CHECK(iota(id2(), rot10, kOne).value - 1 == 3);

  for (double l : {3.0, 10.0, 25.0, 100.0}) {
    for (int d : {1, 2}) {
      const auto p = rotation_path(l, 1.0, d);
      CHECK(i_omega(p, kOne).value == d * oracle::rotation_i1(l));
    }
  }

  const auto fast = fundamental_solution(catalog("constant_k", {{"k", 2 * kPi}}), 0.0, 1.0);
  CHECK(i_omega(fast, kMinusOne).value == 2);
  CHECK(positive_path_oracle(fast, id2(), kMinusOne) == 2);
}

TEST_CASE("positive path oracle") {
  const auto rot = rotation_path(4 * kPi);
  CHECK(positive_path_oracle(rot, id2(), kOne) == 4);
  CHECK(positive_path_oracle(rotation_path(3.0), id2(), kI) == 1);
  CHECK(positive_path_oracle(rotation_path(1.0), id2(), kMinusOne) == 0);
  for (double k : {0.7, 1.3}) {
    for (double ang : {0.0, 1.0, kPi, 4.0}) {
      const double l = 23.0;
      const auto p = rotation_path(l, k);
      const long expect = oracle::rotation_kernel_sum(k, l, ang);
      CHECK(positive_path_oracle(p, id2(), std::polar(1.0, ang)) == expect);
      CHECK(iota(id2(), p, std::polar(1.0, ang)).value == expect);
    }
  }
  CHECK_THROWS_AS(positive_path_oracle(fundamental_solution(catalog("hyperbolic"), 0.0, 1.0), id2(), kOne), Error);
}

TEST_CASE("oracle agreement on random positive fields") {
  std::mt19937_64 rng(77);
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int d = 1 + static_cast<int>(seed % 2);
    const auto f = random_field({.seed = 1000 + seed, .d = d, .bound = 2.0, .positive = true});
    const auto p = fundamental_solution(f, 0.0, 8.0);
    std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
    const Mat m = seed % 3 == 0 ? id2(d) : oracle::random_symplectic(d, rng, 0.7);
    for (Complex omega : {kOne, kMinusOne, std::polar(1.0, ang(rng))}) {
      INFO("seed " << seed << " omega " << omega);
      CHECK(iota(m, p, omega).value == positive_path_oracle(p, m, omega));
    }
  }
}

TEST_CASE("anchor comparison and finite gaps") {
  std::mt19937_64 rng(5);
  const auto f = random_field({.seed = 31, .d = 1, .bound = 1.5, .positive = true});
  const auto p = fundamental_solution(f, 0.0, 10.0);
  std::vector<Mat> anchors;
  for (int i = 0; i < 50; ++i) anchors.push_back(oracle::random_symplectic(1, rng));
  const auto rep = anchor_comparison_check(p, anchors);
  INFO(rep.detail);
  CHECK(rep.ok);

  const auto g = random_field({.seed = 32, .d = 2, .bound = 1.0});
  const auto q = fundamental_solution(g, 0.0, 10.0);
  anchors.clear();
  for (int i = 0; i < 20; ++i) anchors.push_back(oracle::random_symplectic(2, rng));
  const auto rep2 = anchor_comparison_check(q, anchors);
  INFO(rep2.detail);
  CHECK(rep2.ok);
}

TEST_CASE("path additivity") {
  const auto rot = rotation_path(10.0);
  CHECK(path_additivity_check(rot, 0.0, id2(), kOne).ok);
  const auto r5 = path_additivity_check(rot, 5.0, id2(), kOne);
  CHECK(r5.ok);
  CHECK(r5.whole == 4);
  const auto f = random_field({.seed = 40, .d = 1, .bound = 1.0});
  const auto p = fundamental_solution(f, 0.0, 8.0);
  for (Complex omega : {kOne, kMinusOne, kI}) {
    const auto rep = path_additivity_check(p, 3.0, id2(), omega);
    INFO(rep.detail);
    CHECK(rep.ok);
  }
}

TEST_CASE("growth bound and grid independence") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const int d = 1 + static_cast<int>(seed % 2);
    const auto f = random_field({.seed = 50 + seed, .d = d, .bound = 2.0});
    const auto p = fundamental_solution(f, 0.0, 15.0);
    const long v = iota(id2(d), p, kOne).value;
    CHECK(std::abs(v) <= d * f.bound() * 15.0 / kPi + 4 * d);

    PropagationControl fine;
    fine.max_step = 0.05;
    const auto pf = fundamental_solution(f, 0.0, 15.0, fine);
    CHECK(iota(id2(d), pf, kOne).value == v);

    // t -> gamma(c t) solves the system with coefficient c B(c t).
    const double c = 2.5;
    const auto scaled = SymmetricField::from_evaluator("scaled", d, c * f.bound(), {},
                                                       [f, c](double t) -> Mat { return c * f.evaluate(c * t); });
    const auto ps = fundamental_solution(scaled, 0.0, 15.0 / c);
    CHECK(iota(id2(d), ps, kOne).value == v);
  }
}

TEST_CASE("forced epsilon ladder agrees with the zero-epsilon count") {
  const auto f = random_field({.seed = 61, .d = 2, .bound = 1.5});
  const auto p = fundamental_solution(f, 0.0, 12.0);
  IndexOptions forced;
  forced.force_epsilon = true;
  for (Complex omega : {kOne, kMinusOne, std::polar(1.0, 0.4)}) {
    const auto a = iota(id2(2), p, omega);
    const auto b = iota(id2(2), p, omega, forced);
    CHECK(a.value == b.value);
    CHECK(b.epsilon > 0.0);
    CHECK(b.max_imag <= 1e-9);
  }
}
