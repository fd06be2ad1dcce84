#include "meanindex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"
#include "parallel.hpp"

namespace hamidx {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOrderTol = 1e-9;

// Eigenvalues of the window map within this distance of the circle split
// the theta grid into arcs. Deliberately loose: a spurious cut only costs
// one extra evaluation.
constexpr double kCircleCut = 1e-3;

PropagationControl with_unit_breakpoints(PropagationControl control) {
  if (control.breakpoint_spacing <= 0.0) control.breakpoint_spacing = 1.0;
  return control;
}

// Window quantities are computed on gamma(s + .) gamma(s)^{-1}. The anchored
// count is invariant under this change, and the restarted frames stay well
// separated where frames of the full path have long since converged.
void window_path_check(const SymplecticPath& path, double s, double w) {
  require(w > 0.0, ErrorCode::invalid_argument, "window length must be positive");
  require(s + w <= path.t1() + 1e-9, ErrorCode::domain, "window extends past the path");
}

SymplecticPath window_path(const SymplecticPath& path, double s, double w) {
  window_path_check(path, s, w);
  return path.compose_restart(s, s + w);
}

IndexValue restarted_iota(const SymplecticPath& win, const Frame& anchor, Complex omega,
                          const IndexOptions& options) {
  return iota_frame(win, AnchorFrame::from_frame(anchor), omega, win.t0(), win.t1(), options);
}

// g = iota(gamma(s + w), .) on the window equals -iota(I, .) on the reversed
// window path: reversal swaps the endpoint rule and negates every crossing form.
IndexValue window_g_value(const SymplecticPath& path, double s, double w, const IndexOptions& options) {
  window_path_check(path, s, w);
  const auto rev = path.compose_reverse_restart(s, s + w);
  IndexValue v = iota_frame(rev, AnchorFrame::from_frame(rev.frame(0)), Complex(1.0, 0.0), rev.t0(), rev.t1(), options);
  v.value = -v.value;
  return v;
}

ThetaAverage restarted_theta_average(const SymplecticPath& win, const ThetaGrid& grid, const IndexOptions& options);

}  // namespace

ThetaAverage theta_average(const SymplecticPath& path, double s, double w, const ThetaGrid& grid,
                           const IndexOptions& options) {
  return restarted_theta_average(window_path(path, s, w), grid, options);
}

namespace {

ThetaAverage restarted_theta_average(const SymplecticPath& win, const ThetaGrid& grid, const IndexOptions& options) {
  require(grid.samples >= 16, ErrorCode::invalid_argument, "theta_samples must be at least 16");
  const int n_theta = grid.samples;
  const ScaledMat end = win.gamma_scaled(win.size() - 1);
  Eigen::EigenSolver<Mat> es(end.mantissa, false);
  ThetaAverage out;
  std::vector<double> cuts;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const Complex mu = es.eigenvalues()(k) * std::ldexp(1.0, end.exponent);
    if (!std::isfinite(std::abs(mu))) continue;
    if (std::abs(std::abs(mu) - 1.0) <= kCircleCut) {
      ++out.jumps;
      cuts.push_back(std::abs(std::arg(mu)));
    }
  }
  std::sort(cuts.begin(), cuts.end());

  // Nodes 2 pi (j + 1/2) / N; i_{conj(omega)} = i_omega, so only the upper
  // half is evaluated and mirrored.
  const int half = (n_theta + 1) / 2;
  std::vector<double> theta(half);
  std::vector<int> weight(half);
  for (int j = 0; j < half; ++j) {
    double t = 2.0 * kPi * (j + 0.5) / n_theta;
    for (double a : cuts) {
      if (std::abs(t - a) < grid.jitter) t = t >= a ? a + 2.0 * grid.jitter : a - 2.0 * grid.jitter;
    }
    theta[j] = t;
    weight[j] = (j == n_theta - 1 - j) ? 1 : 2;
  }

  const Frame anchor = win.frame(0);
  std::vector<long> vals(half, 0);
  std::vector<bool> have(half, false);
  auto eval = [&](int j) {
    if (have[j]) return vals[j];
    const IndexValue v = restarted_iota(win, anchor, std::polar(1.0, theta[j]), options);
    out.max_imag = std::max(out.max_imag, v.max_imag);
    ++out.evaluations;
    have[j] = true;
    vals[j] = v.value;
    return v.value;
  };

  if (grid.every_node) {
    for (int j = 0; j < half; ++j) eval(j);
  } else {
    int start = 0;
    while (start < half) {
      int stop = start;
      while (stop + 1 < half) {
        const double lo = theta[stop], hi = theta[stop + 1];
        const bool cut = std::any_of(cuts.begin(), cuts.end(), [&](double a) { return a > lo && a < hi; });
        if (cut) break;
        ++stop;
      }
      const long first = eval(start);
      const long last = eval(stop);
      if (first == last) {
        for (int j = start; j <= stop; ++j) {
          vals[j] = first;
          have[j] = true;
        }
      } else {
        for (int j = start; j <= stop; ++j) eval(j);
      }
      start = stop + 1;
    }
  }
  double sum = 0.0;
  for (int j = 0; j < half; ++j) sum += static_cast<double>(weight[j]) * static_cast<double>(vals[j]);
  out.value = sum / n_theta;
  out.bound = 2.0 * win.dim_half() * out.jumps / static_cast<double>(n_theta);
  return out;
}

}  // namespace

long window_f(const SymplecticPath& path, double s, double w, const IndexOptions& options) {
  const auto win = window_path(path, s, w);
  return restarted_iota(win, win.frame(0), Complex(1.0, 0.0), options).value;
}

long window_g(const SymplecticPath& path, double s, double w, const IndexOptions& options) {
  return window_g_value(path, s, w, options).value;
}

WindowIndices window_fgh(const SymplecticPath& path, double s, double w, const ThetaGrid& grid,
                         const IndexOptions& options) {
  WindowIndices out;
  const Complex one(1.0, 0.0);
  const auto win = window_path(path, s, w);
  const IndexValue f = restarted_iota(win, win.frame(0), one, options);
  const IndexValue g = window_g_value(path, s, w, options);
  const ThetaAverage h = restarted_theta_average(win, grid, options);
  out.f = f.value;
  out.g = g.value;
  out.h = h.value;
  out.h_bound = h.bound;
  out.max_imag = std::max({f.max_imag, g.max_imag, h.max_imag});
  const double two_d = 2.0 * path.dim_half();
  const double fd = static_cast<double>(out.f), gd = static_cast<double>(out.g);
  if (!(fd >= out.h - kOrderTol && out.h >= gd - kOrderTol && gd >= fd - two_d - kOrderTol)) {
    fail(ErrorCode::internal_consistency, "window [" + std::to_string(s) + ", " + std::to_string(s + w) +
                                              "]: f = " + std::to_string(out.f) + ", h = " + std::to_string(out.h) +
                                              ", g = " + std::to_string(out.g) + " violate f >= h >= g >= f - 2d");
  }
  return out;
}

WindowIndices fgh(const SymmetricField& field, int n, const ThetaGrid& grid, const IndexOptions& options,
                  const PropagationControl& control) {
  require(n >= 1, ErrorCode::invalid_argument, "fgh needs n >= 1");
  const auto path = fundamental_solution(field, 0.0, n, with_unit_breakpoints(control));
  return window_fgh(path, 0.0, n, grid, options);
}

PeriodicMeanIndex mean_index_periodic(const SymmetricField& field, const ThetaGrid& grid,
                                      const IndexOptions& options, const PropagationControl& control) {
  require(field.is_periodic(), ErrorCode::structure_mismatch, "mean_index_periodic needs a periodic field");
  const double period = field.period();
  const auto path = fundamental_solution(field, 0.0, period, control);
  const ThetaAverage h = theta_average(path, 0.0, period, grid, options);
  PeriodicMeanIndex out;
  out.per_period = h.value;
  out.mean_index = h.value / period;
  out.bound = h.bound;
  out.jumps = h.jumps;
  out.sympl_residual = path.sympl_residual();
  return out;
}

const char* direction_name(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

const char* scheme_name(Scheme s) { return s == Scheme::direct ? "direct" : "dyadic"; }

double direct_tail_heuristic(int d, double bound, double l) {
  const double a = d * bound / kPi;
  return (a + 2.0 * d) / l + (a + 2.0 * d / l) / l;
}

long direct_tail_start(int d, double bound, double horizon) {
  const long cap = static_cast<long>(std::ceil(0.5 * horizon));
  long l = 1;
  while (l < cap && direct_tail_heuristic(d, bound, static_cast<double>(l)) > 0.05) ++l;
  return l;
}

PrefixIndex::PrefixIndex(const SymplecticPath& path, const IndexOptions& options)
    : t0_(path.t0()), merge_tol_(options.merge_tol), d_(path.dim_half()) {
  const IndexValue v = iota(Mat::Identity(path.dim(), path.dim()), path, Complex(1.0, 0.0), options);
  crossings_ = v.crossings;
  epsilon_ = v.epsilon;
  max_imag_ = v.max_imag;
}

long PrefixIndex::iota_to(double t) const {
  require(t > t0_, ErrorCode::invalid_argument, "prefix index needs t > t0");
  long sum = 0;
  for (const auto& c : crossings_) {
    if (std::abs(c.time - t) <= merge_tol_ && c.time > t0_) {
      sum -= c.negative;
    } else if (c.time < t) {
      sum += c.time <= t0_ ? c.positive : c.signature;
    }
  }
  return sum;
}

namespace {

struct DirectRun {
  MeanIndexEstimate estimate;
  std::optional<PrefixIndex> prefix;
};

DirectRun direct_run(const SymmetricField& field, const EstimateParams& params) {
  const double horizon = params.horizon;
  require(std::isfinite(horizon) && horizon >= 10.0, ErrorCode::insufficient_horizon,
          "direct scheme needs horizon >= 10");
  const int d = field.dim_half();
  const auto path = fundamental_solution(field, 0.0, horizon, with_unit_breakpoints(params.control));
  DirectRun run;
  run.prefix.emplace(path, params.index);
  auto& est = run.estimate;
  est.scheme = Scheme::direct;
  est.horizon = horizon;
  const long last = static_cast<long>(std::floor(horizon));
  const long l0 = direct_tail_start(d, field.bound(), horizon);
  require(last - l0 + 1 >= 4, ErrorCode::insufficient_horizon, "horizon too small for four tail samples");
  est.tail_start = static_cast<double>(l0);
  est.lower = 1e300;
  est.upper = -1e300;
  for (long l = 1; l <= last; ++l) {
    const double a = static_cast<double>(run.prefix->i1_to(static_cast<double>(l))) / static_cast<double>(l);
    est.trace.emplace_back(static_cast<double>(l), a);
    if (l >= l0) {
      est.lower = std::min(est.lower, a);
      est.upper = std::max(est.upper, a);
    }
  }
  est.residual_bound = direct_tail_heuristic(d, field.bound(), static_cast<double>(l0));
  est.residual_rigorous = false;
  est.sympl_residual = path.sympl_residual();
  est.max_imag = run.prefix->max_imag();
  return run;
}

MeanIndexEstimate dyadic_run(const SymmetricField& field, const EstimateParams& params) {
  const int k = params.k, n = params.n;
  require(k >= 0 && k <= 12, ErrorCode::invalid_argument, "dyadic scheme needs 0 <= k <= 12");
  require(n >= 4, ErrorCode::insufficient_horizon, "dyadic scheme needs n >= 4");
  const int d = field.dim_half();
  const double w = std::ldexp(1.0, k);
  const double horizon = w * n;
  const auto path = fundamental_solution(field, 0.0, horizon, with_unit_breakpoints(params.control));

  DyadicTable table;
  table.k = k;
  table.n = n;
  table.d = d;
  std::vector<WindowIndices> win(static_cast<std::size_t>(n));
  parallel_for(
      win.size(), [&](std::size_t l) { win[l] = window_fgh(path, static_cast<double>(l) * w, w, params.theta, params.index); },
      params.threads);

  MeanIndexEstimate est;
  est.scheme = Scheme::dyadic;
  est.horizon = horizon;
  est.k = k;
  est.n = n;
  double fs = 0.0, gs = 0.0, hs = 0.0;
  for (int m = 1; m <= n; ++m) {
    const auto& x = win[static_cast<std::size_t>(m - 1)];
    table.f.push_back(x.f);
    table.g.push_back(x.g);
    table.h.push_back(x.h);
    est.max_imag = std::max(est.max_imag, x.max_imag);
    fs += static_cast<double>(x.f);
    gs += static_cast<double>(x.g);
    hs += x.h;
    const double fa = fs / m, ga = gs / m, ha = hs / m;
    table.f_avg.push_back(fa);
    table.g_avg.push_back(ga);
    table.h_avg.push_back(ha);
    if (!(fa >= ha - kOrderTol && ha >= ga - kOrderTol && ga >= fa - 2.0 * d - kOrderTol)) table.sandwich_ok = false;
    est.trace.emplace_back(static_cast<double>(m), ha / w);
  }

  if (k >= 1) {
    const double half = 0.5 * w;
    std::vector<long> fine(static_cast<std::size_t>(2 * n));
    parallel_for(
        fine.size(), [&](std::size_t l) { fine[l] = window_f(path, static_cast<double>(l) * half, half, params.index); },
        params.threads);
    double coarse_sum = 0.0, fine_sum = 0.0;
    for (long v : table.f) coarse_sum += static_cast<double>(v);
    for (long v : fine) fine_sum += static_cast<double>(v);
    est.f_monotone = fine_sum / (2.0 * n) / half >= coarse_sum / n / w - kOrderTol;
  }

  const int tail = (n + 1) / 2;
  est.tail_start = tail;
  est.lower = 1e300;
  est.upper = -1e300;
  for (int m = tail; m <= n; ++m) {
    const double v = table.h_avg[static_cast<std::size_t>(m - 1)] / w;
    est.lower = std::min(est.lower, v);
    est.upper = std::max(est.upper, v);
  }
  est.residual_bound = 2.0 * d / w;
  est.residual_rigorous = true;
  est.sympl_residual = path.sympl_residual();
  est.table = std::move(table);
  return est;
}

MeanIndexEstimate negate_backward(MeanIndexEstimate est) {
  const double lo = est.lower;
  est.lower = -est.upper;
  est.upper = -lo;
  for (auto& p : est.trace) p.second = -p.second;
  est.direction = Direction::backward;
  return est;
}

}  // namespace

MeanIndexEstimate mean_index_interval(const SymmetricField& field, Direction direction,
                                      const EstimateParams& params) {
  if (direction == Direction::backward) {
    // gamma(-t) is the fundamental solution of the reversed field, so the
    // backward interval is the negated forward interval of the reversal.
    return negate_backward(mean_index_interval(field.reverse(), Direction::forward, params));
  }
  MeanIndexEstimate est = params.scheme == Scheme::direct ? direct_run(field, params).estimate : dyadic_run(field, params);
  est.direction = Direction::forward;
  return est;
}

WitnessResult witness_subsequence(const SymmetricField& field, double v, double u, double horizon,
                                  const EstimateParams& params) {
  require(u > 0.0 && std::isfinite(u), ErrorCode::invalid_argument, "witness step u must be positive");
  EstimateParams p = params;
  p.scheme = Scheme::direct;
  p.horizon = horizon;
  const DirectRun run = direct_run(field, p);
  const auto& est = run.estimate;
  if (v < est.lower - est.residual_bound || v > est.upper + est.residual_bound) {
    fail(ErrorCode::range, "v = " + std::to_string(v) + " outside the estimated interval [" +
                               std::to_string(est.lower) + ", " + std::to_string(est.upper) + "] inflated by " +
                               std::to_string(est.residual_bound));
  }
  WitnessResult out;
  const long m_first = std::max<long>(1, static_cast<long>(std::ceil(est.tail_start / u)));
  const long m_last = static_cast<long>(std::floor(horizon / u));
  double best = 1e300;
  for (long m = m_first; m <= m_last; ++m) {
    const double t = u * static_cast<double>(m);
    const double a = static_cast<double>(run.prefix->i1_to(t)) / t;
    const double err = std::abs(a - v);
    if (err < best) {
      best = err;
      out.m.push_back(m);
      out.times.push_back(t);
      out.values.push_back(a);
      out.errors.push_back(err);
    }
  }
  out.success = !out.errors.empty() && out.errors.back() < 0.05;
  out.diagnostic = out.errors.empty() ? "no samples"
                                      : "best error " + std::to_string(out.errors.back()) + " at t = " +
                                            std::to_string(out.times.back());
  return out;
}

InvarianceReport translation_invariance_check(const SymmetricField& field, const std::vector<double>& shifts,
                                              double horizon, const EstimateParams& params) {
  EstimateParams p = params;
  p.scheme = Scheme::direct;
  p.horizon = horizon;
  InvarianceReport rep;
  rep.base = mean_index_interval(field, Direction::forward, p);
  const double d = field.dim_half(), k = field.bound();
  for (double s : shifts) {
    const MeanIndexEstimate e = mean_index_interval(field.shift(s), Direction::forward, p);
    ShiftComparison c;
    c.shift = s;
    c.lower = e.lower;
    c.upper = e.upper;
    c.diff_lower = std::abs(e.lower - rep.base.lower);
    c.diff_upper = std::abs(e.upper - rep.base.upper);
    c.bound = (2.0 * d * k * std::abs(s) / kPi + 4.0 * d) / horizon + rep.base.residual_bound + e.residual_bound;
    c.ok = c.diff_lower <= c.bound && c.diff_upper <= c.bound;
    rep.ok = rep.ok && c.ok;
    rep.entries.push_back(c);
  }
  return rep;
}

InvarianceReport asymptotic_invariance_check(const SymmetricField& field, double transient,
                                             const std::vector<double>& origins, double horizon,
                                             const EstimateParams& params) {
  const auto& limit = field.structure().limit;
  require(limit != nullptr, ErrorCode::structure_mismatch, "field carries no periodic limit");
  EstimateParams p = params;
  p.scheme = Scheme::direct;
  p.horizon = horizon;
  InvarianceReport rep;
  rep.base = mean_index_interval(*limit, Direction::forward, p);
  const double d = field.dim_half(), k = std::max(field.bound(), limit->bound());
  for (double s : origins) {
    const MeanIndexEstimate a = mean_index_interval(field.shift(s), Direction::forward, p);
    const MeanIndexEstimate b = s == 0.0 ? rep.base : mean_index_interval(limit->shift(s), Direction::forward, p);
    ShiftComparison c;
    c.shift = s;
    c.lower = a.lower;
    c.upper = a.upper;
    c.diff_lower = std::abs(a.lower - b.lower);
    c.diff_upper = std::abs(a.upper - b.upper);
    c.bound = (2.0 * d * k * std::max(transient - s, 0.0) / kPi + 6.0 * d) / horizon + a.residual_bound +
              b.residual_bound;
    c.ok = c.diff_lower <= c.bound && c.diff_upper <= c.bound;
    rep.ok = rep.ok && c.ok;
    rep.entries.push_back(c);
  }
  return rep;
}

AdditivityTable subadditivity_check(const SymmetricField& field, int max_n, const IndexOptions& options,
                                    const PropagationControl& control) {
  require(max_n >= 1, ErrorCode::invalid_argument, "max_n must be positive");
  const auto path = fundamental_solution(field, 0.0, 2.0 * max_n, with_unit_breakpoints(control));
  const auto span = static_cast<std::size_t>(2 * max_n);
  const auto side = static_cast<std::size_t>(max_n);
  // whole[k-1]: windows [0, k]; part[n-1][m-1]: windows [n, n + m].
  std::vector<long> f_whole(span), g_whole(span);
  std::vector<long> f_part(side * side), g_part(side * side);
  parallel_for(span, [&](std::size_t i) {
    f_whole[i] = window_f(path, 0.0, static_cast<double>(i + 1), options);
    g_whole[i] = window_g(path, 0.0, static_cast<double>(i + 1), options);
  });
  parallel_for(side * side, [&](std::size_t i) {
    const double s = static_cast<double>(i / side + 1), w = static_cast<double>(i % side + 1);
    f_part[i] = window_f(path, s, w, options);
    g_part[i] = window_g(path, s, w, options);
  });
  AdditivityTable out;
  out.max_n = max_n;
  for (int n = 1; n <= max_n; ++n) {
    for (int m = 1; m <= max_n; ++m) {
      const long f_nm = f_whole[static_cast<std::size_t>(n + m - 1)];
      const long g_nm = g_whole[static_cast<std::size_t>(n + m - 1)];
      const long f_n = f_whole[static_cast<std::size_t>(n - 1)];
      const long g_n = g_whole[static_cast<std::size_t>(n - 1)];
      const std::size_t at = static_cast<std::size_t>(n - 1) * side + static_cast<std::size_t>(m - 1);
      ++out.checked;
      if (f_nm > f_n + f_part[at]) {
        ++out.f_violations;
        out.detail += "f(" + std::to_string(n) + "+" + std::to_string(m) + "); ";
      }
      if (g_nm < g_n + g_part[at]) {
        ++out.g_violations;
        out.detail += "g(" + std::to_string(n) + "+" + std::to_string(m) + "); ";
      }
    }
  }
  return out;
}

}  // namespace hamidx
