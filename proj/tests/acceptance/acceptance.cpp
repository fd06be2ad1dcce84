// Acceptance runner: one PASS/FAIL line per criterion.
//
//   hamidx_acceptance                 run every criterion
//   hamidx_acceptance --criterion N   run criterion N only (exit 1 if it fails)
//
// Criterion 12 aggregates the integrity residuals recorded by every other
// criterion run in the same process, so `--criterion 12` runs them all.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fredholm.hpp"
#include "maslov.hpp"
#include "meanindex.hpp"
#include "rotation.hpp"

using namespace hamidx;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kOne(1.0, 0.0);

// Pinned tolerances.
constexpr double kC1Tol = 0.02;
constexpr double kC1Seconds = 10.0;
constexpr double kC2Seconds = 120.0;
constexpr double kC3Seconds = 120.0;
constexpr double kC6Slack = 0.05;
constexpr double kC6Seconds = 300.0;
constexpr double kC7Tol = 0.05;
constexpr double kC7Seconds = 60.0;
constexpr double kC8Tol = 0.1;
constexpr double kC8Seconds = 300.0;
constexpr double kC9Seconds = 300.0;
constexpr double kC10Beta = 0.9;
constexpr double kC10Seconds = 30.0;
constexpr double kSymplTol = 1e-8;
constexpr double kImagTol = 1e-9;

struct Integrity {
  double sympl = 0.0;
  double imag = 0.0;
  int runs = 0;
  void add(double s, double i) {
    sympl = std::max(sympl, s);
    imag = std::max(imag, i);
    ++runs;
  }
  void add(const MeanIndexEstimate& e) { add(e.sympl_residual, e.max_imag); }
  void add(const SymplecticPath& p) { add(p.sympl_residual(), 0.0); }
};

Integrity integrity;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail << "[fail: " << what << "] ";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shared quasi-periodic dyadic runs (criteria 5, 6, 7).
struct QuasiRuns {
  bool done = false;
  MeanIndexEstimate forward, backward;
  double seconds = 0.0;
};
QuasiRuns quasi;

const QuasiRuns& quasi_runs() {
  if (!quasi.done) {
    const auto start = Clock::now();
    EstimateParams p;
    p.scheme = Scheme::dyadic;
    p.k = 8;
    p.n = 32;
    const auto field = catalog("quasi_periodic_demo");
    quasi.forward = mean_index_interval(field, Direction::forward, p);
    quasi.backward = mean_index_interval(field, Direction::backward, p);
    integrity.add(quasi.forward);
    integrity.add(quasi.backward);
    quasi.seconds = seconds_since(start);
    quasi.done = true;
  }
  return quasi;
}

void c1(Outcome& o) {
  const auto start = Clock::now();
  EstimateParams p;
  p.horizon = 500.0;
  const auto e = mean_index_interval(catalog("constant_k"), Direction::forward, p);
  integrity.add(e);
  const double t = seconds_since(start);
  const double target = 1.0 / kPi;
  o.detail << "I_L=" << e.lower << " I_U=" << e.upper << " target=" << target << " t=" << t << "s ";
  o.expect(std::abs(e.lower - target) <= kC1Tol, "I_L");
  o.expect(std::abs(e.upper - target) <= kC1Tol, "I_U");
  o.expect(t <= kC1Seconds, "runtime");
}

void c2(Outcome& o) {
  const auto start = Clock::now();
  int estimates = 0, segments = 0, est_bad = 0, growth_bad = 0;
  double worst_growth_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RandomFieldSpec spec;
    spec.seed = 1000 + seed;
    spec.d = 1 + static_cast<int>(seed % 2);
    spec.bound = 0.5 + 1.5 * static_cast<double>(seed % 7) / 6.0;
    const auto field = random_field(spec);
    const int d = field.dim_half();
    const double k = field.bound();

    EstimateParams p;
    p.horizon = 200.0;
    const auto e = mean_index_interval(field, Direction::forward, p);
    integrity.add(e);
    ++estimates;
    const double cap = d * k / kPi + e.residual_bound;
    if (e.lower < -cap || e.upper > cap) ++est_bad;

    const auto path = fundamental_solution(field, 0.0, 60.0);
    integrity.add(path);
    const Mat id = Mat::Identity(path.dim(), path.dim());
    for (auto [a, b] : {std::pair{0.0, 20.0}, {10.0, 45.0}, {30.0, 60.0}, {0.0, 60.0}}) {
      const auto v = iota(id, path, kOne, a, b);
      integrity.add(0.0, v.max_imag);
      ++segments;
      const double bound = d * k * (b - a) / kPi + 4.0 * d;
      worst_growth_ratio = std::max(worst_growth_ratio, std::abs(static_cast<double>(v.value)) / bound);
      if (std::abs(static_cast<double>(v.value)) > bound) ++growth_bad;
    }
  }
  const double t = seconds_since(start);
  o.detail << estimates << " estimates (" << est_bad << " outside), " << segments << " segments (" << growth_bad
           << " over growth bound, worst |iota|/bound=" << worst_growth_ratio << ") t=" << t << "s ";
  o.expect(est_bad == 0, "bound");
  o.expect(growth_bad == 0, "growth");
  o.expect(t <= kC2Seconds, "runtime");
}

void c3(Outcome& o) {
  const auto start = Clock::now();
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  int compared = 0, mismatches = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomFieldSpec spec;
    spec.seed = 5000 + seed;
    spec.d = 1 + static_cast<int>(seed % 2);
    spec.bound = 2.0;
    spec.positive = true;
    const auto path = fundamental_solution(random_field(spec), 0.0, 10.0);
    integrity.add(path);
    const Mat id = Mat::Identity(path.dim(), path.dim());
    for (Complex omega : {kOne, std::polar(1.0, angle(rng))}) {
      const auto v = iota(id, path, omega);
      integrity.add(0.0, v.max_imag);
      ++compared;
      if (v.value != positive_path_oracle(path, id, omega)) ++mismatches;
    }
  }
  const double t = seconds_since(start);
  o.detail << compared << " comparisons, " << mismatches << " mismatches t=" << t << "s ";
  o.expect(mismatches == 0, "oracle");
  o.expect(t <= kC3Seconds, "runtime");
}

void c4(Outcome& o) {
  const auto path = fundamental_solution(catalog("constant_k"), 0.0, 100.0);
  integrity.add(path);
  for (double l : {3.0, 10.0, 25.0, 100.0}) {
    const long want = 2 * static_cast<long>(std::floor(l / (2.0 * kPi))) + 1;
    const auto got = i_omega(path, kOne, 0.0, l);
    integrity.add(0.0, got.max_imag);
    o.detail << "i_1[0," << l << "]=" << got.value << " ";
    o.expect(got.value == want, "calibration l=" + std::to_string(l));
  }
  int bad = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomFieldSpec spec;
    spec.seed = 7000 + seed;
    spec.d = 1 + static_cast<int>(seed % 2);
    spec.bound = 1.5;
    const auto p = fundamental_solution(random_field(spec), 0.0, 15.0);
    integrity.add(p);
    const long i1 = i_omega(p, kOne).value;
    const long io = iota(Mat::Identity(p.dim(), p.dim()), p, kOne).value;
    if (i1 + p.dim_half() != io) ++bad;
  }
  o.detail << "identity shift mismatches " << bad << "/20 ";
  o.expect(bad == 0, "identity shift");
}

bool table_sandwich(const DyadicTable& t, std::string& why) {
  for (std::size_t m = 0; m < t.f.size(); ++m) {
    const double f = static_cast<double>(t.f[m]), g = static_cast<double>(t.g[m]), h = t.h[m];
    if (!(f >= h - 1e-9 && h >= g - 1e-9 && g >= f - 2.0 * t.d)) {
      why = "window " + std::to_string(m);
      return false;
    }
  }
  for (std::size_t m = 0; m < t.f_avg.size(); ++m) {
    if (!(t.f_avg[m] >= t.h_avg[m] - 1e-9 && t.h_avg[m] >= t.g_avg[m] - 1e-9 &&
          t.g_avg[m] >= t.f_avg[m] - 2.0 * t.d - 1e-9)) {
      why = "average " + std::to_string(m);
      return false;
    }
  }
  return true;
}

void c5(Outcome& o) {
  const auto& q = quasi_runs();
  int tables = 0;
  for (const auto* e : {&q.forward, &q.backward}) {
    if (!e->table) continue;
    std::string why;
    ++tables;
    o.expect(e->table->sandwich_ok && table_sandwich(*e->table, why), "quasi-periodic table " + why);
  }
  for (const char* name : {"periodic_demo", "hyperbolic"}) {
    EstimateParams p;
    p.scheme = Scheme::dyadic;
    p.k = 5;
    p.n = 16;
    const auto e = mean_index_interval(catalog(name), Direction::forward, p);
    integrity.add(e);
    std::string why;
    ++tables;
    o.expect(e.table && e.table->sandwich_ok && table_sandwich(*e.table, why), std::string(name) + " table " + why);
  }
  o.detail << tables << " tables; ";
  int checked = 0, violations = 0;
  std::vector<SymmetricField> fields = {catalog("periodic_demo"), catalog("quasi_periodic_demo")};
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    RandomFieldSpec spec;
    spec.seed = 9000 + seed;
    spec.d = 1 + static_cast<int>(seed % 2);
    spec.bound = 1.5;
    fields.push_back(random_field(spec));
  }
  for (const auto& f : fields) {
    const auto t = subadditivity_check(f, 16);
    checked += t.checked;
    violations += t.f_violations + t.g_violations;
  }
  o.detail << "additivity pairs " << checked << ", violations " << violations << " ";
  o.expect(violations == 0, "additivity");
}

void c6(Outcome& o) {
  const auto& q = quasi_runs();
  const double tol = 2.0 / std::pow(2.0, 8) + kC6Slack;
  const double fw = q.forward.upper - q.forward.lower;
  const double bw = q.backward.upper - q.backward.lower;
  const double gap = std::abs(0.5 * (q.forward.lower + q.forward.upper) - 0.5 * (q.backward.lower + q.backward.upper));
  o.detail << "forward [" << q.forward.lower << ", " << q.forward.upper << "] backward [" << q.backward.lower << ", "
           << q.backward.upper << "] gap=" << gap << " tol=" << tol << " t=" << q.seconds << "s ";
  o.expect(fw <= tol, "forward width");
  o.expect(bw <= tol, "backward width");
  o.expect(gap <= tol, "direction gap");
  o.expect(q.seconds <= kC6Seconds, "runtime");
}

void c7(Outcome& o) {
  const auto& q = quasi_runs();
  const auto start = Clock::now();
  const auto r = rotation_number(catalog("quasi_periodic_demo"), 1000.0);
  integrity.add(r.sympl_residual, 0.0);
  const double t = seconds_since(start);
  const double mean = 0.5 * (q.forward.lower + q.forward.upper);
  const double diff = std::abs(kPi * mean - r.value);
  o.detail << "pi*I=" << kPi * mean << " R=" << r.value << " diff=" << diff << " t=" << t << "s ";
  o.expect(diff <= kC7Tol, "rotation identity");
  o.expect(t <= kC7Seconds, "runtime");
}

void c8(Outcome& o) {
  const auto start = Clock::now();
  const auto field = catalog("example_45");
  EstimateParams p;
  p.horizon = 2000.0;
  const auto e = mean_index_interval(field, Direction::forward, p);
  integrity.add(e);
  o.detail << "I_L=" << e.lower << " I_U=" << e.upper << " ";
  o.expect(std::abs(e.lower + 1.0) <= kC8Tol, "I_L vs -1");
  o.expect(std::abs(e.upper - 1.0) <= kC8Tol, "I_U vs +1");
  for (double v : {-0.5, 0.0, 0.5}) {
    try {
      const auto w = witness_subsequence(field, v, 1.0, 2000.0, p);
      o.detail << "witness v=" << v << (w.success ? " ok " : " none ");
      o.expect(w.success, "witness v=" + std::to_string(v));
    } catch (const Error& err) {
      o.detail << "witness v=" << v << " " << error_code_name(err.code()) << " ";
      o.expect(false, "witness v=" + std::to_string(v));
    }
  }
  const double t = seconds_since(start);
  o.detail << "t=" << t << "s ";
  o.expect(t <= kC8Seconds, "runtime");
}

void c9(Outcome& o) {
  const auto start = Clock::now();
  const auto hyp = fredholm_verdict(catalog("hyperbolic"));
  o.expect(hyp.spectrum.verdict == Verdict::fredholm, "hyperbolic spectrum");
  o.expect(hyp.sweep.constant, "hyperbolic sweep constant");
  const auto rot = catalog("constant_k");
  const auto one = fredholm_verdict(rot);
  o.expect(one.spectrum.verdict == Verdict::not_fredholm, "B=I spectrum");
  o.expect(one.sweep.strictly_increasing, "B=I sweep increasing");
  integrity.add(fundamental_solution(catalog("hyperbolic"), 0.0, 1.0));
  integrity.add(fundamental_solution(rot, 0.0, 2.0 * kPi));

  int disagreements = 0, inconclusive = 0, fredholm = 0, errors = 0;
  for (const auto& f : random_periodic_family(20, 2024)) {
    integrity.add(fundamental_solution(f, 0.0, f.period()));
    try {
      const auto v = fredholm_verdict(f);
      if (v.spectrum.verdict == Verdict::inconclusive) {
        ++inconclusive;
      } else {
        if (!v.agree) ++disagreements;
        if (v.spectrum.verdict == Verdict::fredholm) ++fredholm;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::equivalence_violation) {
        ++disagreements;
      } else {
        ++errors;
      }
    }
  }
  const double t = seconds_since(start);
  o.detail << "family: " << fredholm << " fredholm, " << inconclusive << " inconclusive, " << disagreements
           << " disagreements, " << errors << " errors t=" << t << "s ";
  o.expect(disagreements == 0, "family disagreements");
  o.expect(errors == 0, "family errors");
  o.expect(t <= kC9Seconds, "runtime");
}

void c10(Outcome& o) {
  const auto start = Clock::now();
  DichotomyParams p;
  p.samples = 10000;
  const auto r = dichotomy_inequality_check(catalog("hyperbolic"), p);
  integrity.add(fundamental_solution(catalog("hyperbolic"), -p.horizon, p.horizon));
  const double t = seconds_since(start);
  o.detail << r.samples << " samples, violations " << r.violations << ", beta_fit=" << r.beta_fit
           << " C=" << r.c_fit << " t=" << t << "s ";
  o.expect(r.ok, "inequalities");
  o.expect(r.samples >= 10000, "sample count");
  o.expect(r.beta_fit >= kC10Beta, "beta");
  o.expect(t <= kC10Seconds, "runtime");
}

void c11(Outcome& o) {
  const auto tr = translation_invariance_check(catalog("quasi_periodic_demo"), {1.7, 5.0, 20.0}, 500.0);
  integrity.add(tr.base);
  for (const auto& e : tr.entries) {
    o.detail << "s=" << e.shift << " diff=" << std::max(e.diff_lower, e.diff_upper) << "/" << e.bound << " ";
  }
  o.expect(tr.ok, "translation");
  const auto as = asymptotic_invariance_check(catalog("asymptotic_blend"), 4.0, {0.0, 2.0, 6.0}, 500.0);
  integrity.add(as.base);
  for (const auto& e : as.entries) {
    o.detail << "blend s=" << e.shift << " diff=" << std::max(e.diff_lower, e.diff_upper) << "/" << e.bound << " ";
  }
  o.expect(as.ok, "asymptotic");
}

void c12(Outcome& o) {
  o.detail << integrity.runs << " runs, max sympl residual " << integrity.sympl << ", max imag " << integrity.imag
           << " ";
  o.expect(integrity.runs > 0, "no runs recorded");
  o.expect(integrity.sympl <= kSymplTol, "symplecticity");
  o.expect(integrity.imag <= kImagTol, "imaginary part");
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "constant-field mean index", c1},
      {2, "bound suite", c2},
      {3, "oracle equivalence", c3},
      {4, "calibration", c4},
      {5, "sandwich and additivity", c5},
      {6, "quasi-periodic collapse", c6},
      {7, "rotation identity", c7},
      {8, "example 4.5 interval", c8},
      {9, "fredholm equivalence", c9},
      {10, "dichotomy inequalities", c10},
      {11, "translation and asymptotic invariance", c11},
      {12, "numerical integrity", c12},
  };
  return all;
}

bool run_one(const Criterion& c, bool print) {
  Outcome o;
  try {
    c.run(o);
  } catch (const Error& e) {
    o.pass = false;
    o.detail << "error " << error_code_name(e.code()) << ": " << e.what();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << "exception: " << e.what();
  }
  if (print) {
    std::printf("criterion %2d %-40s %s  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  }
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);

  const auto& all = criteria();
  if (only == 12) {
    for (const auto& c : all) {
      if (c.id != 12) run_one(c, false);
    }
    return run_one(all.back(), true) ? 0 : 1;
  }
  if (only != 0) return run_one(all[static_cast<std::size_t>(only - 1)], true) ? 0 : 1;

  int failed = 0;
  for (const auto& c : all) failed += run_one(c, true) ? 0 : 1;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
