#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "errors.hpp"
#include "oracles.hpp"
#include "systems.hpp"
#include "systems_io.hpp"

using namespace hamidx;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

std::vector<double> sample_times(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<double> t(count);
  for (auto& x : t) x = u(rng);
  return t;
}

}  // namespace

TEST_CASE("evaluate: constant, periodic and torus fields") {
  const auto c = catalog("constant_k", {{"k", 1.0}});
  CHECK(max_abs(c.evaluate(7.3) - Mat::Identity(2, 2)) == 0.0);
  CHECK(c.bound() == 1.0);

  const auto p = catalog("periodic_demo");
  CHECK(max_abs(p.evaluate(2.0 * std::numbers::pi) - diag2(2.0, 1.0)) < 1e-15);

  TorusField tf;
  tf.torus_dim = 2;
  tf.base_point = {0.0, 0.0};
  tf.frequency = {1.0, std::sqrt(2.0)};
  const Mat id = Mat::Identity(2, 2);
  tf.surface = {{1.5 * id, TermMode::constant, {0.0, 0.0}},
                {0.3 * id, TermMode::cos, {1.0, 0.0}},
                {0.3 * id, TermMode::cos, {0.0, 1.0}}};
  Structure st;
  st.kind = StructureKind::quasi_periodic;
  st.torus = tf;
  const auto q = SymmetricField::from_terms("qp", 1, 2.1, st, {});
  CHECK(max_abs(q.evaluate(0.0) - 2.1 * id) < 1e-15);
  for (double t : sample_times(20, 3)) {
    CHECK(max_abs(q.evaluate(t) - tf.at_time(t, 2)) <= 1e-12);
  }
}

TEST_CASE("evaluate rejects non-finite time") {
  const auto c = catalog("constant_k");
  CHECK_THROWS_AS(c.evaluate(std::nan("")), Error);
  try {
    c.evaluate(INFINITY);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
}

TEST_CASE("shift") {
  const auto p = catalog("periodic_demo");
  CHECK(max_abs(p.shift(std::numbers::pi).evaluate(0.0) - diag2(0.0, 1.0)) < 1e-15);
  for (double t : sample_times(50, 5)) {
    CHECK(max_abs(p.shift(0.0).evaluate(t) - p.evaluate(t)) == 0.0);
    CHECK(max_abs(p.shift(p.period()).evaluate(t) - p.evaluate(t)) <= 1e-12);
    CHECK(max_abs(p.shift(1.25).shift(-3.5).evaluate(t) - p.shift(-2.25).evaluate(t)) <= 1e-12);
  }
  CHECK(p.shift(0.7).is_periodic());
  CHECK(p.shift(0.7).bound() == p.bound());

  const auto q = catalog("quasi_periodic_demo");
  const auto qs = q.shift(1.7);
  CHECK(qs.structure().torus->base_point[0] == doctest::Approx(1.7));
  CHECK(qs.structure().torus->base_point[1] == doctest::Approx(1.7 * std::sqrt(2.0)));
  for (double t : sample_times(30, 7)) CHECK(max_abs(qs.evaluate(t) - q.evaluate(t + 1.7)) <= 1e-12);

  const auto e = catalog("example_45");
  for (double t : sample_times(30, 8)) CHECK(max_abs(e.shift(2.0).shift(3.0).evaluate(t) - e.shift(5.0).evaluate(t)) <= 1e-12);
}

TEST_CASE("reverse") {
  const auto k = catalog("constant_k", {{"k", 2.0}});
  CHECK(max_abs(k.reverse().evaluate(0.4) + 2.0 * Mat::Identity(2, 2)) == 0.0);

  std::vector<Term> terms(2);
  terms[0].matrix = Mat::Identity(2, 2);
  terms[1].matrix = Mat::Identity(2, 2);
  terms[1].mode = TermMode::cos;
  terms[1].frequency = 1.0;
  const auto f = SymmetricField::from_terms("one_plus_cos", 1, 2.0, {}, terms);
  for (double t : sample_times(40, 9)) {
    CHECK(max_abs(f.reverse().evaluate(t) + (1.0 + std::cos(t)) * Mat::Identity(2, 2)) <= 1e-14);
  }
  for (const auto& name : catalog_names()) {
    const auto b = catalog(name);
    const auto rr = b.reverse().reverse();
    for (double t : sample_times(30, 10)) CHECK(max_abs(rr.evaluate(t) - b.evaluate(t)) <= 1e-12);
    for (double t : sample_times(10, 11)) CHECK(max_abs(b.reverse().evaluate(t) + b.evaluate(-t)) <= 1e-12);
  }
}

TEST_CASE("catalog invariants on 1000 random times") {
  const auto times = sample_times(1000, 12);
  for (const auto& name : catalog_names()) {
    for (int d : {1, 2}) {
      if (d == 2 && (name == "periodic_demo" || name == "quasi_periodic_demo" || name == "example_45")) continue;
      const auto b = catalog(name, {{"d", d}});
      INFO(name);
      for (double t : times) {
        const Mat m = b.evaluate(t);
        CHECK(symmetry_residual(m) <= 1e-12);
        CHECK(operator_norm(m) <= b.bound() * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("catalog entries") {
  const auto h = catalog("hyperbolic");
  CHECK(max_abs(h.evaluate(0.3) - diag2(1.0, -1.0)) == 0.0);
  CHECK(h.period() == 1.0);

  // Example field at t = 0: psi = 0, psi' = 0, so B = [[0, -1], [-1, 0]].
  const auto e = catalog("example_45");
  Mat expect(2, 2);
  expect << 0.0, -1.0, -1.0, 0.0;
  CHECK(max_abs(e.evaluate(0.0) - expect) < 1e-15);
  CHECK(operator_norm(e.evaluate(0.0)) < 3.0);
  // B = -J gamma' gamma^{-1} with the closed-form gamma, by central differences.
  const Mat j = standard_j(1);
  for (double t : {0.5, 3.0, 40.0}) {
    const double h6 = 1e-5;
    const Mat dg = (oracle::example45_gamma(t + h6) - oracle::example45_gamma(t - h6)) / (2 * h6);
    const Mat b = -j * dg * oracle::example45_gamma(t).inverse();
    CHECK(max_abs(b - e.evaluate(t)) < 1e-6);
  }

  CHECK_THROWS_AS(catalog("nope"), Error);
  try {
    catalog("nope");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::catalog_miss);
  }
  try {
    catalog("constant_k", {{"d", 9}});
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::invalid_argument);
  }
  const auto blend = catalog("asymptotic_blend");
  CHECK(blend.structure().kind == StructureKind::asymptotic_periodic);
  CHECK(max_abs(blend.evaluate(30.0) - h.evaluate(30.0)) < 1e-15);
}

TEST_CASE("bound violation on the sample grid is a construction error") {
  Term t;
  t.matrix = 2.0 * Mat::Identity(2, 2);
  CHECK_THROWS_AS(SymmetricField::from_terms("big", 1, 1.0, {}, {t}), Error);
}

TEST_CASE("system documents round-trip") {
  const char* minimal = R"({"name": "k", "d": 1, "K": 2, "terms": [{"matrix": [2, 0, 0, 2], "mode": "constant"}]})";
  const auto f = parse_system(minimal);
  CHECK(max_abs(f.evaluate(3.0) - 2.0 * Mat::Identity(2, 2)) == 0.0);

  const char* qp = R"({"name": "qp", "d": 1, "K": 2.1,
    "structure": {"kind": "quasi_periodic", "torus": {"m": 2, "p": [0, 0], "q": [1, 1.41421356237], "u": 1,
      "surface_terms": [{"matrix": [1.5, 0, 0, 1.5], "mode": "constant", "frequency": [0, 0]},
                        {"matrix": [0.3, 0, 0, 0.3], "mode": "cos", "frequency": [1, 0]},
                        {"matrix": [0.3, 0, 0, 0.3], "mode": "cos", "frequency": [0, 1]}]}}})";
  const auto q = parse_system(qp);
  CHECK(q.structure().kind == StructureKind::quasi_periodic);
  CHECK(q.structure().torus->frequency[1] == 1.41421356237);

  for (const auto& field : {f, q, catalog("periodic_demo").shift(0.3).reverse(), catalog("asymptotic_blend"),
                            catalog("quasi_periodic_demo").shift(1.1), random_field({.seed = 4, .d = 2, .bound = 1.5})}) {
    const std::string once = serialize_system(field);
    const auto back = parse_system(once);
    CHECK(serialize_system(back) == once);
    for (double t : sample_times(10, 13)) CHECK(max_abs(back.evaluate(t) - field.evaluate(t)) == 0.0);
  }

  const char* asym = R"({"name": "bad", "d": 1, "K": 2, "terms": [{"matrix": [1, 0.5, 0, 1], "mode": "constant"}]})";
  try {
    parse_system(asym);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
  }
  try {
    parse_system(R"({"d": 1, "terms": []})");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    CHECK(std::string(e.what()).find("K") != std::string::npos);
  }
  try {
    parse_system("{\n\"d\": 1,\n oops}");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(serialize_system(catalog("example_45")), Error);
}

TEST_CASE("random fields respect their bounds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (bool positive : {false, true}) {
      const auto f = random_field({.seed = seed, .d = 1 + static_cast<int>(seed % 2), .bound = 2.0, .positive = positive});
      for (double t : sample_times(50, seed)) {
        const Mat m = f.evaluate(t);
        CHECK(operator_norm(m) <= 2.0 * (1 + 1e-12));
        if (positive) CHECK(Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues().minCoeff() >= 0.1 - 1e-12);
      }
    }
  }
}
