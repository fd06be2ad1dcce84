#include "maslov.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <iomanip>
#include <numbers>

#include "errors.hpp"

namespace hamidx {

namespace {

using CDyn = Eigen::MatrixXcd;

// Principal-angle machinery for Gr(e^{-eps J} gamma) against Gr(omega M).
// With F1 = [X; Y'] and Jhat = diag(-J, J), Jhat F1 spans the orthogonal
// complement of F1, so the sines of the principal angles between F1 and
// F2 = [A; omega C] are the singular values of S = X^T J A - omega Y'^T J C.
class Probe {
 public:
  Probe(const SymplecticPath& path, const AnchorFrame& anchor, Complex omega, double epsilon,
        const IndexOptions& options)
      : path_(path), omega_(omega), options_(options), n_(path.dim()), d_(path.dim_half()) {
    require(anchor.frame.rows() == 2 * n_ && anchor.frame.cols() == n_, ErrorCode::invalid_argument,
            "anchor frame has the wrong shape");
    require(std::abs(std::abs(omega) - 1.0) <= 1e-12, ErrorCode::invalid_argument, "omega must have unit modulus");
    a_ = anchor.frame.topRows(n_);
    c_ = anchor.frame.bottomRows(n_);
    j_ = standard_j(d_);
    ja_ = j_ * a_;
    jc_ = j_ * c_;
    rot_ = exp_j(d_, -epsilon);
    det_a_sign_ = a_.determinant() >= 0.0 ? 1.0 : -1.0;
    lipschitz_ = 1.05 * path.field().bound() + 1e-12;
    omega_d_conj_ = std::pow(std::conj(omega), d_);
  }

  double lipschitz() const { return lipschitz_; }
  std::size_t evaluations() const { return evaluations_; }

  Frame frame_at(double t) const { return path_.frame_at(t); }

  CMat s_matrix(const Frame& f) const {
    const Mat x = f.topRows(n_);
    const Mat yp = rot_ * f.bottomRows(n_);
    const Mat p = x.transpose() * ja_;
    const Mat q = yp.transpose() * jc_;
    return p.cast<Complex>() - omega_ * q.cast<Complex>();
  }

  double sigma_min(double t) {
    if (++evaluations_ > options_.max_evaluations) {
      throw PrecisionError("crossing search exceeded its evaluation budget", t);
    }
    return sigma_min_of(frame_at(t));
  }

  double sigma_min_of(const Frame& f) const {
    Eigen::JacobiSVD<CMat> svd(s_matrix(f));
    return svd.singularValues()(n_ - 1);
  }

  /// conj(omega)^d det W sign(det A) for W = [[X, A], [Y', omega C]].
  Complex det_normalized(const Frame& f) const {
    CSquare2 w(2 * n_, 2 * n_);
    w.topLeftCorner(n_, n_) = f.topRows(n_).cast<Complex>();
    w.bottomLeftCorner(n_, n_) = (rot_ * f.bottomRows(n_)).cast<Complex>();
    w.topRightCorner(n_, n_) = a_.cast<Complex>();
    w.bottomRightCorner(n_, n_) = omega_ * c_.cast<Complex>();
    return omega_d_conj_ * w.partialPivLu().determinant() * det_a_sign_;
  }

  double det_real(double t, double& max_imag) {
    ++evaluations_;
    const Complex v = det_normalized(frame_at(t));
    max_imag = std::max(max_imag, std::abs(v.imag()));
    return v.real();
  }

  /// Kernel dimension and crossing form at t.
  CrossingRecord analyze(double t, double a, double b) const {
    const Frame f = frame_at(t);
    const Mat x = f.topRows(n_);
    const Mat y = f.bottomRows(n_);
    const Mat yp = rot_ * y;
    Eigen::JacobiSVD<CMat> svd(s_matrix(f), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int m = 0;
    for (int i = 0; i < n_; ++i)
      if (sv(i) < options_.kernel_tol) ++m;
    m = std::max(m, 1);
    CrossingRecord rec;
    rec.time = t;
    rec.kernel_dim = m;
    CDyn z(n_, m);
    for (int k = 0; k < m; ++k) {
      const CVec u = svd.matrixV().col(n_ - 1 - k);
      const CVec au = a_.cast<Complex>() * u;
      const CVec cu = omega_ * (c_.cast<Complex>() * u);
      const CVec v = x.transpose().cast<Complex>() * au + yp.transpose().cast<Complex>() * cu;
      z.col(k) = y.cast<Complex>() * v;
    }
    const CDyn gram = z.adjoint() * z;
    const CDyn form = z.adjoint() * path_.field_at(t).cast<Complex>() * z;
    Eigen::LLT<CDyn> llt(gram);
    const CDyn linv = llt.matrixL().solve(CDyn::Identity(m, m));
    CDyn white = linv * form * linv.adjoint();
    white = (0.5 * (white + white.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<CDyn> es(white);
    const double scale = options_.degeneracy_tol * std::max(1.0, path_.field().bound());
    for (int k = 0; k < m; ++k) {
      const double ev = es.eigenvalues()(k);
      if (ev > scale) {
        ++rec.positive;
      } else if (ev < -scale) {
        ++rec.negative;
      } else {
        rec.degenerate = true;
      }
    }
    rec.signature = rec.positive - rec.negative;
    if (t <= a) {
      rec.contribution = rec.positive;
    } else if (t >= b) {
      rec.contribution = -rec.negative;
    } else {
      rec.contribution = rec.signature;
    }
    const double delta = 1e-6;
    const double lo = std::max(a, t - delta), hi = std::min(b, t + delta);
    if (hi > lo) {
      rec.d_slope = (det_normalized(frame_at(hi)).real() - det_normalized(frame_at(lo)).real()) / (hi - lo);
    }
    return rec;
  }

 private:
  const SymplecticPath& path_;
  Complex omega_;
  IndexOptions options_;
  int n_;
  int d_;
  Mat a_, c_, j_, ja_, jc_, rot_;
  double det_a_sign_ = 1.0;
  double lipschitz_ = 1.0;
  Complex omega_d_conj_;
  std::size_t evaluations_ = 0;
};

struct Knot {
  double t;
  double s;
};

}  // namespace

AnchorFrame AnchorFrame::from_matrix(const Mat& m) {
  require(m.rows() == m.cols() && m.rows() % 2 == 0 && m.rows() <= kMaxDim, ErrorCode::invalid_argument,
          "anchor must be a square matrix of even size");
  require(symplectic_residual(m) <= 1e-8 * std::max(1.0, max_abs(m) * max_abs(m)), ErrorCode::invalid_argument,
          "anchor must be symplectic");
  return {graph_frame(m)};
}

long CrossingScan::total() const {
  long sum = 0;
  for (const auto& c : crossings) sum += c.contribution;
  return sum;
}

bool CrossingScan::degenerate() const {
  if (continuum || ambiguous) return true;
  return std::any_of(crossings.begin(), crossings.end(), [](const CrossingRecord& c) { return c.degenerate; });
}

CrossingScan find_crossings(const SymplecticPath& path, const AnchorFrame& anchor, Complex omega, double epsilon,
                            double a, double b, const IndexOptions& options) {
  require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorCode::invalid_argument, "epsilon must be >= 0");
  require(a < b, ErrorCode::invalid_argument, "crossing window needs a < b");
  require(a >= path.t0() - 1e-12 && b <= path.t1() + 1e-12, ErrorCode::domain, "crossing window outside the path");
  a = std::max(a, path.t0());
  b = std::min(b, path.t1());
  Probe probe(path, anchor, omega, epsilon, options);
  CrossingScan scan;
  const double lip = probe.lipschitz();

  std::vector<Knot> knots;
  knots.push_back({a, probe.sigma_min(a)});
  const auto& times = path.times();
  auto it = std::upper_bound(times.begin(), times.end(), a);
  for (; it != times.end() && *it < b; ++it) {
    const auto i = static_cast<std::size_t>(it - times.begin());
    knots.push_back({*it, probe.sigma_min_of(path.frame(i))});
  }
  knots.push_back({b, probe.sigma_min(b)});

  struct Leaf {
    double l, r;
  };
  std::vector<Leaf> leaves;
  std::vector<std::pair<Knot, Knot>> stack;
  const double exclude = 0.1 * options.kernel_tol;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    stack.emplace_back(knots[k], knots[k + 1]);
    while (!stack.empty()) {
      const auto [lo, hi] = stack.back();
      stack.pop_back();
      const double w = hi.t - lo.t;
      if (0.5 * (lo.s + hi.s - lip * w) > exclude) continue;
      if (w <= options.leaf_width) {
        leaves.push_back({lo.t, hi.t});
        continue;
      }
      const double mid = lo.t + 0.5 * w;
      const Knot m{mid, probe.sigma_min(mid)};
      if (w > 1e-6 && lo.s < options.zero_tol && m.s < options.zero_tol && hi.s < options.zero_tol) {
        scan.continuum = true;
        scan.evaluations = probe.evaluations();
        return scan;
      }
      stack.emplace_back(m, hi);
      stack.emplace_back(lo, m);
    }
  }
  std::sort(leaves.begin(), leaves.end(), [](const Leaf& x, const Leaf& y) { return x.l < y.l; });

  std::vector<double> found;
  auto consider = [&](double t_star, double s_star, bool sign_change) {
    if (t_star - a <= options.merge_tol) t_star = a;
    if (b - t_star <= options.merge_tol) t_star = b;
    if (!sign_change && s_star > options.zero_tol) {
      if (s_star >= options.kernel_tol) return;
      scan.ambiguous = true;
    }
    for (double f : found)
      if (std::abs(f - t_star) <= options.merge_tol) return;
    found.push_back(t_star);
    CrossingRecord rec = probe.analyze(t_star, a, b);
    if (!sign_change && s_star > options.zero_tol) rec.degenerate = true;
    scan.crossings.push_back(rec);
  };

  if (knots.front().s < options.kernel_tol) consider(a, knots.front().s, false);

  std::size_t i = 0;
  while (i < leaves.size()) {
    double lo = leaves[i].l, hi = leaves[i].r;
    std::size_t j = i + 1;
    while (j < leaves.size() && leaves[j].l - hi <= options.merge_tol) hi = std::max(hi, leaves[j++].r);
    i = j;
    lo = std::max(a, lo - options.leaf_width);
    hi = std::min(b, hi + options.leaf_width);
    const double d_lo = probe.det_real(lo, scan.max_imag);
    const double d_hi = probe.det_real(hi, scan.max_imag);
    double t_star = 0.0;
    bool sign_change = false;
    // Near tangential crossings D is O(dt^2) and drowns in round-off, so a
    // sign change only counts when both ends clear the noise floor.
    const double noise = 1e-12;
    if (std::min(std::abs(d_lo), std::abs(d_hi)) > noise && ((d_lo < 0.0) != (d_hi < 0.0))) {
      sign_change = true;
      std::uintmax_t iters = 100;
      double imag = 0.0;
      auto f = [&](double t) { return probe.det_real(t, imag); };
      auto tol = [](double x, double y) { return std::abs(y - x) <= 1e-13 * std::max(1.0, std::abs(x)); };
      const auto r = boost::math::tools::toms748_solve(f, lo, hi, d_lo, d_hi, tol, iters);
      t_star = 0.5 * (r.first + r.second);
      scan.max_imag = std::max(scan.max_imag, imag);
    } else {
      // Boost caps the tolerance near sqrt(eps), so search on the unit interval.
      const double width = hi - lo;
      auto g = [&](double u) { return probe.sigma_min(lo + u * width); };
      const auto r = boost::math::tools::brent_find_minima(g, 0.0, 1.0, 40);
      t_star = lo + r.first * width;
      double best = r.second;
      for (double edge : {lo, hi}) {
        const double s_edge = probe.sigma_min(edge);
        if (s_edge < best) {
          best = s_edge;
          t_star = edge;
        }
      }
    }
    consider(t_star, probe.sigma_min(t_star), sign_change);
  }

  if (knots.back().s < options.kernel_tol) consider(b, knots.back().s, false);

  std::sort(scan.crossings.begin(), scan.crossings.end(),
            [](const CrossingRecord& x, const CrossingRecord& y) { return x.time < y.time; });
  scan.evaluations = probe.evaluations();
  if (scan.max_imag > options.realness_tol) {
    fail(ErrorCode::numerical_integrity, "normalized determinant has imaginary part " + std::to_string(scan.max_imag));
  }
  return scan;
}

IndexValue iota_frame(const SymplecticPath& path, const AnchorFrame& anchor, Complex omega, double a, double b,
                      const IndexOptions& options) {
  IndexValue out;
  out.omega = omega;
  if (!options.force_epsilon) {
    CrossingScan scan = find_crossings(path, anchor, omega, 0.0, a, b, options);
    out.max_imag = scan.max_imag;
    if (!scan.degenerate()) {
      out.value = scan.total();
      out.epsilon = 0.0;
      out.crossings = std::move(scan.crossings);
      out.ladder.emplace_back(0.0, out.value);
      return out;
    }
  }
  double eps = options.eps_start;
  long previous = 0;
  bool have_previous = false;
  for (int level = 0; level < options.eps_levels; ++level, eps *= 0.5) {
    CrossingScan scan = find_crossings(path, anchor, omega, eps, a, b, options);
    out.max_imag = std::max(out.max_imag, scan.max_imag);
    if (scan.continuum) continue;
    const long value = scan.total();
    out.ladder.emplace_back(eps, value);
    if (have_previous && value == previous) {
      out.value = value;
      out.epsilon = eps;
      out.crossings = std::move(scan.crossings);
      return out;
    }
    previous = value;
    have_previous = true;
  }
  const long first = out.ladder.size() >= 2 ? out.ladder[out.ladder.size() - 2].second : previous;
  throw IndexUnstableError("epsilon ladder did not stabilize", first, previous);
}

IndexValue iota(const Mat& m, const SymplecticPath& path, Complex omega, const IndexOptions& options) {
  return iota(m, path, omega, path.t0(), path.t1(), options);
}

IndexValue iota(const Mat& m, const SymplecticPath& path, Complex omega, double a, double b,
                const IndexOptions& options) {
  require(m.rows() == path.dim(), ErrorCode::invalid_argument, "anchor dimension does not match the path");
  return iota_frame(path, AnchorFrame::from_matrix(m), omega, a, b, options);
}

IndexValue i_omega(const SymplecticPath& path, Complex omega, const IndexOptions& options) {
  return i_omega(path, omega, path.t0(), path.t1(), options);
}

IndexValue i_omega(const SymplecticPath& path, Complex omega, double a, double b, const IndexOptions& options) {
  require(max_abs(path.anchor() - Mat::Identity(path.dim(), path.dim())) == 0.0, ErrorCode::invalid_argument,
          "i_omega needs a path starting at the identity");
  IndexValue v = iota(Mat::Identity(path.dim(), path.dim()), path, omega, a, b, options);
  if (std::abs(omega - Complex(1.0, 0.0)) <= 1e-14) v.value -= path.dim_half();
  return v;
}

namespace {

// Souriau unitary Z Z^T of the real Lagrangian Gr(G) inside R^{2N} x R^{2N}
// with the form -J + J, after flipping the momentum block of the first factor
// to reach the standard form. G is given as mantissa * 2^exponent.
CDyn souriau(const Eigen::MatrixXd& mant, int exponent) {
  const auto n2 = mant.rows();  // 2N
  const auto nn = n2 / 2;
  Eigen::MatrixXd f(2 * n2, n2);
  f.topRows(n2) = std::ldexp(1.0, -std::min(exponent, 1000)) * Eigen::MatrixXd::Identity(n2, n2);
  f.bottomRows(n2) = mant;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(f);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(2 * n2, n2);
  // Rows: x_q, x_p, y_q, y_p. Flip x_p, then Q = (x_q, y_q), P = (x_p, y_p).
  Eigen::MatrixXd qpos(n2, n2), ppos(n2, n2);
  qpos.topRows(nn) = q.middleRows(0, nn);
  qpos.bottomRows(nn) = q.middleRows(n2, nn);
  ppos.topRows(nn) = -q.middleRows(nn, nn);
  ppos.bottomRows(nn) = q.middleRows(n2 + nn, nn);
  CDyn z = qpos.cast<Complex>() + Complex(0.0, 1.0) * ppos.cast<Complex>();
  return z * z.transpose();
}

struct Doubling {
  bool complex = false;
  double angle = 0.0;

  Eigen::MatrixXd lift(const Mat& g) const {
    if (!complex) return g;
    const auto n = g.rows();
    // Coordinates ordered (q_1a, q_1b, ..., p_1a, p_1b, ...), so the
    // symplectic form of G (x) I_2 is again the standard one.
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        out(2 * i, 2 * j) = g(i, j);
        out(2 * i + 1, 2 * j + 1) = g(i, j);
      }
    return out;
  }

  Eigen::MatrixXd rotation(Eigen::Index n) const {
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      r(2 * i, 2 * i) = std::cos(angle);
      r(2 * i, 2 * i + 1) = -std::sin(angle);
      r(2 * i + 1, 2 * i) = std::sin(angle);
      r(2 * i + 1, 2 * i + 1) = std::cos(angle);
    }
    return r;
  }
};

}  // namespace

long positive_path_oracle(const SymplecticPath& path, const Mat& m, Complex omega) {
  return positive_path_oracle(path, m, omega, path.t0(), path.t1());
}

long positive_path_oracle(const SymplecticPath& path, const Mat& m, Complex omega, double a, double b) {
  require(std::abs(std::abs(omega) - 1.0) <= 1e-12, ErrorCode::invalid_argument, "omega must have unit modulus");
  require(a < b && a >= path.t0() && b <= path.t1(), ErrorCode::domain, "oracle window outside the path");
  const int n = path.dim();
  Doubling dbl;
  Eigen::MatrixXd anchor;
  const double re = omega.real(), im = omega.imag();
  if (std::abs(im) <= 1e-15) {
    anchor = (re > 0 ? 1.0 : -1.0) * Eigen::MatrixXd(m);
  } else {
    dbl.complex = true;
    dbl.angle = std::arg(omega);
    // Anchor (I (x) R_theta)(M (x) I).
    anchor = dbl.rotation(n) * dbl.lift(m);
  }
  const CDyn s0 = souriau(anchor, 0);
  const CDyn s0inv = s0.adjoint();

  const double bound = path.field().bound();
  const auto nn = dbl.complex ? 2 * n : n;
  const double h_target = std::min(0.01, 0.5 / (static_cast<double>(nn) * std::max(bound, 1e-3)));
  const auto steps = static_cast<long>(std::ceil((b - a) / h_target));
  const double h = (b - a) / static_cast<double>(steps);
  const double min_eig = 1e-9;
  const double snap = 1e-9;
  const double two_pi = 2.0 * std::numbers::pi;

  auto angles_at = [&](double t, Complex& det) {
    const Mat bt = path.field_at(t);
    Eigen::SelfAdjointEigenSolver<Mat> es(bt);
    require(es.eigenvalues().minCoeff() >= min_eig, ErrorCode::precondition,
            "positive-path oracle needs B(t) > 0; fails at t = " + std::to_string(t));
    const ScaledMat g = path.gamma_scaled_at(t);
    const CDyn u = souriau(dbl.lift(g.mantissa), g.exponent) * s0inv;
    Eigen::ComplexEigenSolver<CDyn> ces(u, false);
    std::vector<double> out;
    det = Complex(1.0, 0.0);
    for (Eigen::Index k = 0; k < ces.eigenvalues().size(); ++k) {
      const Complex ev = ces.eigenvalues()(k);
      det *= ev / std::abs(ev);
      double ang = std::arg(ev);
      if (ang < 0) ang += two_pi;
      if (ang < snap || two_pi - ang < snap) ang = 0.0;
      out.push_back(ang);
    }
    return out;
  };
  auto count_zero = [&](const std::vector<double>& v) {
    return static_cast<long>(std::count(v.begin(), v.end(), 0.0));
  };

  Complex det_prev;
  std::vector<double> prev = angles_at(a, det_prev);
  const long start_hits = count_zero(prev);
  double sum_prev = 0.0;
  for (double x : prev) sum_prev += x;
  // Net winding, and passes for increasing and for decreasing angles.
  double lifted = 0.0;
  long passes_up = 0;
  long passes_down = 0;
  std::vector<double> last = prev;
  for (long k = 1; k <= steps; ++k) {
    const double t = k == steps ? b : a + static_cast<double>(k) * h;
    Complex det;
    const auto cur = angles_at(t, det);
    const double dphi = std::arg(det / det_prev);
    double sum_cur = 0.0;
    for (double x : cur) sum_cur += x;
    // Increasing angles: passes = (dphi - (sum_cur - sum_prev)) / 2pi with angles in [0, 2pi).
    passes_up += std::lround((dphi - (sum_cur - sum_prev)) / two_pi);
    // Decreasing angles: use angles in (0, 2pi] mirrored, i.e. -angle mod 2pi.
    double msum_prev = 0.0, msum_cur = 0.0;
    for (double x : prev) msum_prev += x == 0.0 ? 0.0 : two_pi - x;
    for (double x : cur) msum_cur += x == 0.0 ? 0.0 : two_pi - x;
    passes_down += std::lround((-dphi - (msum_cur - msum_prev)) / two_pi);
    lifted += dphi;
    det_prev = det;
    sum_prev = sum_cur;
    prev = cur;
    last = cur;
  }
  const long end_hits = count_zero(last);
  const long passes = lifted >= 0.0 ? passes_up : passes_down;
  long total = start_hits + passes - end_hits;
  if (dbl.complex) {
    require(total % 2 == 0, ErrorCode::internal_consistency, "doubled oracle count is odd");
    total /= 2;
  }
  return total;
}

AdditivityReport path_additivity_check(const SymplecticPath& path, double split, const Mat& m, Complex omega,
                                       const IndexOptions& options) {
  AdditivityReport rep;
  const double a = path.t0(), b = path.t1();
  require(split >= a && split <= b, ErrorCode::domain, "split outside the path domain");
  rep.whole = iota(m, path, omega, a, b, options).value;
  if (split == a || split == b) {
    rep.left = split == a ? 0 : rep.whole;
    rep.right = split == a ? rep.whole : 0;
    rep.right_restarted = rep.right;
    rep.ok = true;
    rep.detail = "trivial split";
    return rep;
  }
  rep.left = iota(m, path, omega, a, split, options).value;
  rep.right = iota(m, path, omega, split, b, options).value;
  // Transported anchor: gamma(s + t) gamma(s)^{-1} against M gamma(s)^{-1}.
  const auto restarted = path.compose_restart(split);
  const ScaledMat gs = path.gamma_scaled_at(split);
  const Frame fm = graph_frame(m);
  // Gr(M gamma(s)^{-1}) = {(gamma(s) x, M x)}: frame [gamma(s) A'; C'] from Gr(M) = [A'; C'].
  const auto n = static_cast<Eigen::Index>(path.dim());
  Frame moved(2 * n, n);
  moved.topRows(n) = gs.mantissa * fm.topRows(n);
  moved.bottomRows(n) = std::ldexp(1.0, -gs.exponent) * fm.bottomRows(n);
  const auto anchor = AnchorFrame::from_frame(orthonormalize(moved));
  rep.right_restarted = iota_frame(restarted, anchor, omega, restarted.t0(), restarted.t1(), options).value;
  rep.ok = rep.whole == rep.left + rep.right && rep.right == rep.right_restarted;
  rep.detail = "whole " + std::to_string(rep.whole) + " left " + std::to_string(rep.left) + " right " +
               std::to_string(rep.right) + " restarted " + std::to_string(rep.right_restarted);
  return rep;
}

ComparisonReport anchor_comparison_check(const SymplecticPath& path, const std::vector<Mat>& anchors,
                                         const IndexOptions& options) {
  ComparisonReport rep;
  const Complex one(1.0, 0.0);
  const double a = path.t0(), b = path.t1();
  rep.at_start = iota_frame(path, AnchorFrame::from_frame(path.frame(0)), one, a, b, options).value;
  rep.at_end = iota_frame(path, AnchorFrame::from_frame(path.frame(path.size() - 1)), one, a, b, options).value;
  rep.ok = true;
  long lo = rep.at_end, hi = rep.at_start;
  for (const auto& m : anchors) {
    const long v = iota(m, path, one, options).value;
    rep.values.push_back(v);
    if (v < rep.at_end || v > rep.at_start) {
      rep.ok = false;
      rep.detail += "anchor value " + std::to_string(v) + " outside [" + std::to_string(rep.at_end) + ", " +
                    std::to_string(rep.at_start) + "]; ";
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo > 2 * path.dim_half()) {
    rep.ok = false;
    rep.detail += "spread " + std::to_string(hi - lo) + " exceeds 2d; ";
  }
  return rep;
}

std::vector<DetSample> det_function(const SymplecticPath& path, const Mat& m, Complex omega,
                                    const std::vector<double>& times, double realness_tol) {
  IndexOptions opts;
  const auto anchor = AnchorFrame::from_matrix(m);
  Probe probe(path, anchor, omega, 0.0, opts);
  const auto n = static_cast<Eigen::Index>(path.dim());
  const double det_a = std::abs(anchor.frame.topRows(n).determinant());
  std::vector<DetSample> out;
  for (double t : times) {
    const Frame f = probe.frame_at(t);
    const Complex v = probe.det_normalized(f);
    DetSample s;
    s.time = t;
    s.normalized = v.real();
    s.imag = v.imag();
    const double det_x = std::abs(f.topRows(n).determinant());
    s.value = v.real() / (det_x * det_a);
    if (std::abs(s.imag) > realness_tol) {
      fail(ErrorCode::numerical_integrity,
           "normalized determinant has imaginary part " + std::to_string(s.imag) + " at t = " + std::to_string(t));
    }
    out.push_back(s);
  }
  return out;
}

void write_crossings_csv(std::ostream& out, const std::vector<CrossingRecord>& crossings) {
  out << "time,kernel_dim,signature,d_slope,degenerate,contribution\n" << std::setprecision(17);
  for (const auto& c : crossings) {
    out << c.time << ',' << c.kernel_dim << ',' << c.signature << ',' << c.d_slope << ',' << (c.degenerate ? 1 : 0)
        << ',' << c.contribution << '\n';
  }
}

}  // namespace hamidx
