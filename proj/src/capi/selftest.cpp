#include "selftest.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "errors.hpp"
#include "fredholm.hpp"
#include "maslov.hpp"
#include "meanindex.hpp"
#include "rotation.hpp"

namespace hamidx::capi {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kOne(1.0, 0.0);

struct Outcome {
  bool passed = true;
  std::string detail;
};

void expect(Outcome& o, bool cond, const std::string& what) {
  if (!cond) {
    o.passed = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what;
  }
}

Outcome rotation_calibration() {
  Outcome o;
  const auto path = fundamental_solution(catalog("constant_k"), 0.0, 100.0);
  for (double l : {3.0, 10.0, 25.0, 100.0}) {
    const long want = 2 * static_cast<long>(std::floor(l / (2.0 * kPi))) + 1;
    const long got = i_omega(path, kOne, 0.0, l).value;
    expect(o, got == want, "i_1 on [0, " + std::to_string(l) + "] = " + std::to_string(got));
  }
  return o;
}

Outcome identity_shift(std::uint64_t seed) {
  Outcome o;
  for (std::uint64_t k = 0; k < 6; ++k) {
    RandomFieldSpec spec;
    spec.seed = seed + k;
    spec.d = 1 + static_cast<int>(k % 2);
    spec.bound = 1.5;
    const auto path = fundamental_solution(random_field(spec), 0.0, 12.0);
    const long i1 = i_omega(path, kOne).value;
    const long io = iota(Mat::Identity(path.dim(), path.dim()), path, kOne).value;
    expect(o, i1 + path.dim_half() == io, "seed " + std::to_string(spec.seed));
  }
  return o;
}

Outcome positive_oracle(std::uint64_t seed) {
  Outcome o;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  for (std::uint64_t k = 0; k < 8; ++k) {
    RandomFieldSpec spec;
    spec.seed = seed + 100 + k;
    spec.d = 1 + static_cast<int>(k % 2);
    spec.bound = 2.0;
    spec.positive = true;
    const auto path = fundamental_solution(random_field(spec), 0.0, 8.0);
    const Mat id = Mat::Identity(path.dim(), path.dim());
    for (Complex omega : {kOne, std::polar(1.0, angle(rng))}) {
      const long got = iota(id, path, omega).value;
      const long want = positive_path_oracle(path, id, omega);
      expect(o, got == want, "seed " + std::to_string(spec.seed) + ": " + std::to_string(got) + " vs " +
                                 std::to_string(want));
    }
  }
  return o;
}

Outcome anchors(std::uint64_t seed) {
  Outcome o;
  RandomFieldSpec spec;
  spec.seed = seed + 200;
  spec.positive = true;
  spec.bound = 2.0;
  const auto path = fundamental_solution(random_field(spec), 0.0, 6.0);
  // Anchors taken from an unrelated path are symplectic by construction.
  RandomFieldSpec other = spec;
  other.seed = seed + 201;
  other.positive = false;
  const auto source = fundamental_solution(random_field(other), 0.0, 10.0);
  std::vector<Mat> ms;
  for (int i = 1; i <= 10; ++i) ms.push_back(source.gamma_at(i));
  const auto rep = anchor_comparison_check(path, ms);
  expect(o, rep.ok, rep.detail);
  const auto add = path_additivity_check(path, 2.5, ms[3], kOne);
  expect(o, add.ok, add.detail);
  return o;
}

Outcome growth_bound(std::uint64_t seed) {
  Outcome o;
  for (std::uint64_t k = 0; k < 6; ++k) {
    RandomFieldSpec spec;
    spec.seed = seed + 300 + k;
    spec.d = 1 + static_cast<int>(k % 2);
    spec.bound = 2.0;
    const auto field = random_field(spec);
    const auto path = fundamental_solution(field, 0.0, 20.0);
    const Mat id = Mat::Identity(path.dim(), path.dim());
    for (double a : {0.0, 5.0}) {
      const double b = a + 15.0;
      const long v = iota(id, path, kOne, a, b).value;
      const double cap = field.dim_half() * field.bound() * (b - a) / kPi + 4.0 * field.dim_half();
      expect(o, std::abs(static_cast<double>(v)) <= cap, "seed " + std::to_string(spec.seed));
    }
  }
  return o;
}

Outcome sandwich() {
  Outcome o;
  const auto table = subadditivity_check(catalog("periodic_demo"), 8);
  expect(o, table.f_violations == 0 && table.g_violations == 0, table.detail);
  fgh(catalog("periodic_demo"), 16);  // raises on a sandwich violation
  return o;
}

Outcome periodic_mean() {
  Outcome o;
  const auto m = mean_index_periodic(catalog("constant_k"));
  expect(o, std::abs(m.mean_index - 1.0 / kPi) <= m.bound / (2.0 * kPi) + 1e-12,
         "mean index " + std::to_string(m.mean_index));
  return o;
}

Outcome rotation_identity() {
  Outcome o;
  const auto r = rotation_number(catalog("constant_k"), 50.0);
  expect(o, std::abs(r.value - 1.0) <= 1e-9, "R = " + std::to_string(r.value));
  return o;
}

Outcome fredholm_pair() {
  Outcome o;
  const auto hyp = fredholm_verdict(catalog("hyperbolic"));
  expect(o, hyp.spectrum.verdict == Verdict::fredholm && hyp.sweep.constant, "hyperbolic field");
  const auto rot = fredholm_verdict(catalog("constant_k"));
  expect(o, rot.spectrum.verdict == Verdict::not_fredholm && rot.sweep.strictly_increasing, "B = I");
  return o;
}

}  // namespace

Json run_selftest(std::uint64_t seed) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks = {
      {"rotation_calibration", rotation_calibration},
      {"identity_shift", [seed] { return identity_shift(seed); }},
      {"positive_path_oracle", [seed] { return positive_oracle(seed); }},
      {"anchor_comparison_and_additivity", [seed] { return anchors(seed); }},
      {"growth_bound", [seed] { return growth_bound(seed); }},
      {"sandwich_and_subadditivity", sandwich},
      {"periodic_mean_index", periodic_mean},
      {"rotation_number", rotation_identity},
      {"fredholm_equivalence", fredholm_pair},
  };
  Json out;
  out["command"] = "selftest";
  out["seed"] = seed;
  Json list = Json::array();
  bool all = true;
  for (const auto& [name, run] : checks) {
    Json entry;
    entry["name"] = name;
    Outcome o;
    try {
      o = run();
    } catch (const Error& e) {
      o.passed = false;
      o.detail = std::string(error_code_name(e.code())) + ": " + e.what();
    }
    entry["passed"] = o.passed;
    entry["detail"] = o.detail;
    all = all && o.passed;
    list.push_back(std::move(entry));
  }
  out["checks"] = std::move(list);
  out["passed"] = all;
  return out;
}

}  // namespace hamidx::capi
