#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meanindex.hpp"
#include "propagator.hpp"
#include "systems.hpp"

namespace hamidx {

enum class Verdict { fredholm, not_fredholm, inconclusive };

const char* verdict_name(Verdict v);

struct MonodromyReport {
  Mat monodromy;
  std::vector<Complex> spectrum;
  double unit_circle_distance = 0.0;
  /// Worst mismatch of the reciprocal-conjugate pairing mu -> 1 / conj(mu).
  double pairing_defect = 0.0;
  Verdict verdict = Verdict::inconclusive;
  double tol_lo = 1e-8;
  double tol_hi = 1e-4;
};

MonodromyReport monodromy_spectrum_test(const SymmetricField& field, double tol_lo = 1e-8, double tol_hi = 1e-4,
                                        const PropagationControl& control = {});

struct SweepParams {
  double lambda_max = 0.1;
  int steps = 11;
  ThetaGrid theta;
  IndexOptions index;
  PropagationControl control;
  /// Horizon of the direct estimator for non-periodic fields.
  double horizon = 500.0;
  unsigned threads = 0;
};

struct SweepPoint {
  double lambda = 0.0;
  /// Per-period mean index for periodic fields; midpoint of [lower, upper] otherwise.
  double index = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double residual = 0.0;
};

struct LambdaSweep {
  std::vector<SweepPoint> points;
  bool periodic = true;
  bool constant = false;
  bool strictly_increasing = false;
  /// lambda values between which the index changed by more than the residual.
  std::vector<double> jumps;
  double spread = 0.0;
  double tolerance = 0.0;
  /// Largest sampled r with the index on [-r, r] equal to its value at 0 within residuals.
  double invariance_radius = 0.0;
};

/// Mean index of B + lambda I on a uniform lambda grid; raises
/// internal-consistency when the sequence decreases beyond its residual.
LambdaSweep lambda_sweep(const SymmetricField& field, const SweepParams& params = {});

struct FredholmVerdict {
  MonodromyReport spectrum;
  LambdaSweep sweep;
  /// fredholm / not_fredholm from the sweep (constant means fredholm).
  Verdict sweep_verdict = Verdict::inconclusive;
  bool agree = false;
  bool asymptotic = false;
};

/// Spectrum test (of the periodic limit for asymptotic-periodic fields)
/// against lambda-invariance; raises equivalence-violation on disagreement
/// outside the inconclusive band.
FredholmVerdict fredholm_verdict(const SymmetricField& field, const SweepParams& params = {},
                                 double tol_lo = 1e-8, double tol_hi = 1e-4);

struct DichotomyParams {
  double horizon = 10.0;
  int samples = 10000;
  std::uint64_t seed = 7;
  /// Exchange the stable and unstable projections (deliberate misuse).
  bool swap_projection = false;
  double beta_guess = 0.0;  // 0: use the Floquet exponent
  PropagationControl control;
};

struct DichotomyReport {
  Mat projection;
  /// Spectral rate min |log|mu|| / T.
  double beta_spectral = 0.0;
  /// Decay rate fitted on the samples (least-squares slope of the envelope).
  double beta_fit = 0.0;
  double c_fit = 0.0;
  double c_limit = 0.0;
  int samples = 0;
  int violations = 0;
  bool forward_ok = false;
  bool backward_ok = false;
  bool ok = false;
  std::string detail;
};

/// Checks |gamma(t) P gamma(s)^{-1}| <= C e^{-beta (t - s)} for s <= t and
/// |gamma(t) (I - P) gamma(s)^{-1}| <= C e^{-beta (s - t)} for s >= t.
DichotomyReport dichotomy_inequality_check(const SymmetricField& field, const DichotomyParams& params = {});

/// Seeded family of periodic fields mixing elliptic and hyperbolic monodromies.
std::vector<SymmetricField> random_periodic_family(int count, std::uint64_t seed);

}  // namespace hamidx
