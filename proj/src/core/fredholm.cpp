#include "fredholm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "errors.hpp"
#include "parallel.hpp"

namespace hamidx {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::fredholm:
      return "fredholm";
    case Verdict::not_fredholm:
      return "not_fredholm";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

MonodromyReport monodromy_spectrum_test(const SymmetricField& field, double tol_lo, double tol_hi,
                                        const PropagationControl& control) {
  require(field.is_periodic(), ErrorCode::structure_mismatch, "spectrum test needs a periodic field");
  require(tol_lo > 0.0 && tol_lo < tol_hi, ErrorCode::invalid_argument, "need 0 < tol_lo < tol_hi");
  MonodromyReport rep;
  rep.tol_lo = tol_lo;
  rep.tol_hi = tol_hi;
  rep.monodromy = monodromy(field, control);
  Eigen::EigenSolver<Mat> es(rep.monodromy, false);
  rep.unit_circle_distance = 1e300;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const Complex mu = es.eigenvalues()(k);
    rep.spectrum.push_back(mu);
    rep.unit_circle_distance = std::min(rep.unit_circle_distance, std::abs(std::abs(mu) - 1.0));
  }
  for (const Complex& mu : rep.spectrum) {
    const Complex partner = 1.0 / std::conj(mu);
    double best = 1e300;
    for (const Complex& nu : rep.spectrum) best = std::min(best, std::abs(nu - partner) / std::max(1.0, std::abs(nu)));
    rep.pairing_defect = std::max(rep.pairing_defect, best);
  }
  if (rep.unit_circle_distance > tol_hi) {
    rep.verdict = Verdict::fredholm;
  } else if (rep.unit_circle_distance < tol_lo) {
    rep.verdict = Verdict::not_fredholm;
  } else {
    rep.verdict = Verdict::inconclusive;
  }
  return rep;
}

LambdaSweep lambda_sweep(const SymmetricField& field, const SweepParams& params) {
  require(params.steps >= 5 && params.steps % 2 == 1, ErrorCode::invalid_argument, "steps must be odd and >= 5");
  require(params.lambda_max > 0.0, ErrorCode::invalid_argument, "lambda_max must be positive");
  // Fields with K = 0 still admit the sweep width 0.1.
  require(params.lambda_max <= 0.5 * std::max(field.bound(), 0.2) + 1e-15, ErrorCode::invalid_argument,
          "lambda_max must not exceed K / 2");
  LambdaSweep out;
  out.periodic = field.is_periodic();
  const int steps = params.steps;
  out.points.resize(static_cast<std::size_t>(steps));
  parallel_for(
      out.points.size(),
      [&](std::size_t i) {
        const double lambda = -params.lambda_max + 2.0 * params.lambda_max * static_cast<double>(i) / (steps - 1);
        const SymmetricField shifted = field.plus_identity(lambda);
        SweepPoint& p = out.points[i];
        p.lambda = lambda;
        if (out.periodic) {
          const PeriodicMeanIndex m = mean_index_periodic(shifted, params.theta, params.index, params.control);
          p.index = p.lower = p.upper = m.per_period;
          p.residual = m.bound;
        } else {
          EstimateParams ep;
          ep.scheme = Scheme::direct;
          ep.horizon = params.horizon;
          ep.theta = params.theta;
          ep.index = params.index;
          ep.control = params.control;
          const MeanIndexEstimate e = mean_index_interval(shifted, Direction::forward, ep);
          p.lower = e.lower;
          p.upper = e.upper;
          p.index = 0.5 * (e.lower + e.upper);
          p.residual = e.residual_bound;
        }
      },
      params.threads);

  double lo = 1e300, hi = -1e300, lo_l = 1e300, hi_l = -1e300, lo_u = 1e300, hi_u = -1e300;
  double res = 0.0;
  for (const auto& p : out.points) {
    lo = std::min(lo, p.index);
    hi = std::max(hi, p.index);
    lo_l = std::min(lo_l, p.lower);
    hi_l = std::max(hi_l, p.lower);
    lo_u = std::min(lo_u, p.upper);
    hi_u = std::max(hi_u, p.upper);
    res = std::max(res, p.residual);
  }
  out.spread = std::max({hi - lo, hi_l - lo_l, hi_u - lo_u});
  // Periodic: the quadrature residual. Otherwise both estimates carry a residual.
  out.tolerance = out.periodic ? res : 2.0 * res;
  out.constant = out.spread <= out.tolerance;
  out.strictly_increasing = true;
  for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
    const auto& a = out.points[i];
    const auto& b = out.points[i + 1];
    const double allow = a.residual + b.residual;
    if (b.index < a.index - allow - 1e-12) {
      fail(ErrorCode::internal_consistency, "mean index decreases in lambda between " + std::to_string(a.lambda) +
                                                " and " + std::to_string(b.lambda));
    }
    if (!(b.index > a.index)) out.strictly_increasing = false;
    if (std::abs(b.index - a.index) > allow) out.jumps.push_back(0.5 * (a.lambda + b.lambda));
  }
  const auto& mid = out.points[static_cast<std::size_t>(steps / 2)];
  for (int r = 1; r <= steps / 2; ++r) {
    const auto& left = out.points[static_cast<std::size_t>(steps / 2 - r)];
    const auto& right = out.points[static_cast<std::size_t>(steps / 2 + r)];
    if (std::abs(left.index - mid.index) > left.residual + mid.residual ||
        std::abs(right.index - mid.index) > right.residual + mid.residual) {
      break;
    }
    out.invariance_radius = right.lambda;
  }
  return out;
}

FredholmVerdict fredholm_verdict(const SymmetricField& field, const SweepParams& params, double tol_lo,
                                 double tol_hi) {
  FredholmVerdict out;
  const auto& st = field.structure();
  if (field.is_periodic()) {
    out.spectrum = monodromy_spectrum_test(field, tol_lo, tol_hi, params.control);
  } else {
    require(st.kind == StructureKind::asymptotic_periodic && st.limit, ErrorCode::structure_mismatch,
            "fredholm verdict needs a periodic or asymptotically periodic field");
    out.asymptotic = true;
    out.spectrum = monodromy_spectrum_test(*st.limit, tol_lo, tol_hi, params.control);
  }
  out.sweep = lambda_sweep(field, params);
  out.sweep_verdict = out.sweep.constant ? Verdict::fredholm : Verdict::not_fredholm;
  if (out.spectrum.verdict == Verdict::inconclusive) {
    out.agree = true;
    return out;
  }
  out.agree = out.spectrum.verdict == out.sweep_verdict;
  if (!out.agree) {
    fail(ErrorCode::equivalence_violation, std::string("spectrum says ") + verdict_name(out.spectrum.verdict) +
                                               " but the lambda sweep says " + verdict_name(out.sweep_verdict));
  }
  return out;
}

DichotomyReport dichotomy_inequality_check(const SymmetricField& field, const DichotomyParams& params) {
  require(field.is_periodic(), ErrorCode::structure_mismatch, "dichotomy check needs a periodic field");
  require(params.samples >= 2 && params.horizon > 0.0, ErrorCode::invalid_argument, "need samples and a horizon");
  const int n = field.dim();
  const double period = field.period();
  const Mat mono = monodromy(field, params.control);
  Eigen::EigenSolver<Mat> es(mono, true);
  const auto& mu = es.eigenvalues();
  const CMat vecs = es.eigenvectors();
  CMat sel = CMat::Zero(n, n);
  double rho_in = 0.0, rho_out = 1e300;
  int stable = 0;
  for (int k = 0; k < n; ++k) {
    const double r = std::abs(mu(k));
    require(std::abs(r - 1.0) > 1e-4, ErrorCode::precondition,
            "monodromy has an eigenvalue on the unit circle; no exponential dichotomy");
    if (r < 1.0) {
      sel(k, k) = 1.0;
      rho_in = std::max(rho_in, r);
      ++stable;
    } else {
      rho_out = std::min(rho_out, r);
    }
  }
  require(stable == n / 2, ErrorCode::precondition, "stable subspace is not half-dimensional");
  const Mat id = Mat::Identity(n, n);
  const CMat pc = vecs * sel * vecs.inverse();
  DichotomyReport rep;
  rep.projection = pc.real();
  if (params.swap_projection) rep.projection = id - rep.projection;
  rep.beta_spectral = std::min(-std::log(rho_in), std::log(rho_out)) / period;

  const auto path = fundamental_solution(field, 0.0, params.horizon, params.control);
  double q = 1.0;
  for (int k = 0; k <= 64; ++k) {
    const double t = std::min(period, params.horizon) * k / 64.0;
    const Mat g = path.gamma_at(t);
    q = std::max({q, operator_norm(g), operator_norm(symplectic_inverse(g))});
  }
  Eigen::JacobiSVD<CMat> svd(vecs);
  const double kappa = svd.singularValues()(0) / svd.singularValues()(n - 1);
  rep.c_limit = kappa * q * q * std::exp(2.0 * rep.beta_spectral * period);

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unif(0.0, params.horizon);
  struct Obs {
    double gap;
    double log_norm;
  };
  std::vector<Obs> fwd, bwd;
  const Mat p = rep.projection, pq = id - rep.projection;
  for (int k = 0; k < params.samples; ++k) {
    double s = unif(rng), t = unif(rng);
    const bool forward = k % 2 == 0;
    if (forward == (s > t)) std::swap(s, t);
    const Mat gt = path.gamma_at(t);
    const Mat gs_inv = symplectic_inverse(path.gamma_at(s));
    const double norm = operator_norm(gt * (forward ? p : pq) * gs_inv);
    (forward ? fwd : bwd).push_back({std::abs(t - s), std::log(std::max(norm, 1e-300))});
  }
  rep.samples = params.samples;
  auto fit_slope = [](const std::vector<Obs>& obs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& o : obs) {
      sx += o.gap;
      sy += o.log_norm;
      sxx += o.gap * o.gap;
      sxy += o.gap * o.log_norm;
    }
    const double m = static_cast<double>(obs.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };
  const double beta_f = -fit_slope(fwd), beta_b = -fit_slope(bwd);
  rep.beta_fit = std::min(beta_f, beta_b);
  const double beta = params.beta_guess > 0.0 ? params.beta_guess : rep.beta_fit;
  auto check = [&](const std::vector<Obs>& obs, double& c_needed) {
    int bad = 0;
    for (const auto& o : obs) {
      const double c = std::exp(o.log_norm + beta * o.gap);
      c_needed = std::max(c_needed, c);
      if (c > rep.c_limit) ++bad;
    }
    return bad;
  };
  double cf = 0.0, cb = 0.0;
  const int bad_f = check(fwd, cf), bad_b = check(bwd, cb);
  rep.c_fit = std::max(cf, cb);
  rep.violations = bad_f + bad_b;
  rep.forward_ok = beta_f > 0.0 && bad_f == 0;
  rep.backward_ok = beta_b > 0.0 && bad_b == 0;
  rep.ok = rep.forward_ok && rep.backward_ok && beta > 0.0;
  rep.detail = "beta_forward " + std::to_string(beta_f) + " beta_backward " + std::to_string(beta_b) + " C " +
               std::to_string(rep.c_fit) + " limit " + std::to_string(rep.c_limit) + " violations " +
               std::to_string(rep.violations);
  return rep;
}

std::vector<SymmetricField> random_periodic_family(int count, std::uint64_t seed) {
  // Members alternate between a perturbed saddle and a perturbed non-resonant
  // center, sized so that the spectral type survives B + lambda I for
  // |lambda| <= 0.1 (the default sweep).
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double periods[] = {1.0, 2.0, std::numbers::pi, 2.0 * std::numbers::pi};
  auto resonance_gap = [](double k, double period) {
    const double x = k * period / std::numbers::pi;
    return std::abs(x - std::round(x));
  };
  std::vector<SymmetricField> out;
  for (int i = 0; i < count; ++i) {
    const int d = 1 + (i / 2) % 2;
    const double period = periods[rng() % 4];
    const bool hyperbolic = i % 2 == 0;
    SymmetricField base = catalog("constant_k");
    double delta = 0.0;
    if (hyperbolic) {
      const double c = 0.8 + 1.2 * unif(rng);
      base = catalog("hyperbolic", {{"d", static_cast<double>(d)}, {"c", c}, {"period", period}});
      delta = 0.2;
    } else {
      ParamMap params{{"d", static_cast<double>(d)}, {"period", period}};
      for (int j = 0; j < d; ++j) {
        double k = 0.0;
        // Keep k T / pi away from integers even after the shift by lambda.
        do {
          k = 0.6 + 1.4 * unif(rng);
        } while (std::min({resonance_gap(k, period), resonance_gap(k - 0.1, period),
                           resonance_gap(k + 0.1, period)}) < 0.1);
        params["k" + std::to_string(j + 1)] = k;
      }
      base = catalog("rotation_k", params);
      delta = 0.05;
    }
    RandomFieldSpec spec;
    spec.seed = rng();
    spec.d = d;
    spec.bound = delta;
    spec.period = period;
    const SymmetricField field = base.plus(random_field(spec));
    out.push_back(field.renamed("random_periodic_" + std::to_string(i) + (hyperbolic ? "_saddle" : "_center")));
  }
  return out;
}

}  // namespace hamidx
