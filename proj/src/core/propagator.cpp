#include "propagator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include "errors.hpp"

namespace hamidx {

namespace {

const double kSqrt15 = std::sqrt(15.0);
const double kC[3] = {0.5 - kSqrt15 / 10.0, 0.5, 0.5 + kSqrt15 / 10.0};
const double kA[3][3] = {
    {5.0 / 36.0, 2.0 / 9.0 - kSqrt15 / 15.0, 5.0 / 36.0 - kSqrt15 / 30.0},
    {5.0 / 36.0 + kSqrt15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - kSqrt15 / 24.0},
    {5.0 / 36.0 + kSqrt15 / 30.0, 2.0 / 9.0 + kSqrt15 / 15.0, 5.0 / 36.0},
};
const double kB[3] = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};

ScaledMat renormalized(Mat m, int exponent) {
  const double big = max_abs(m);
  if (big > 0.0 && std::isfinite(big)) {
    int e = 0;
    std::frexp(big, &e);
    if (e != 0) {
      m *= std::ldexp(1.0, -e);
      exponent += e;
    }
  }
  return {std::move(m), exponent};
}

Frame propagate_frame(const Frame& f, const Mat& step) {
  const auto n = step.rows();
  Frame g(2 * n, n);
  g.topRows(n) = f.topRows(n);
  g.bottomRows(n) = step * f.bottomRows(n);
  return orthonormalize(g);
}

double frame_residual(const Frame& f, const Mat& j) {
  const auto n = j.rows();
  const Mat x = f.topRows(n), y = f.bottomRows(n);
  return max_abs(y.transpose() * j * y - x.transpose() * j * x);
}

}  // namespace

Mat ScaledMat::value() const { return mantissa * std::ldexp(1.0, exponent); }

double ScaledMat::log2_norm() const { return std::log2(operator_norm(mantissa)) + exponent; }

Mat gauss_step(const SymmetricField& field, double t, double h) {
  const int n = field.dim();
  const Mat j = standard_j(field.dim_half());
  Mat a[3];
  for (int i = 0; i < 3; ++i) a[i] = j * field.evaluate(t + kC[i] * h);
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(3 * n, 3 * n);
  Eigen::MatrixXd rhs(3 * n, n);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) sys.block(i * n, k * n, n, n) -= (h * kA[i][k]) * a[i];
    rhs.block(i * n, 0, n, n) = a[i];
  }
  const Eigen::MatrixXd stages = sys.partialPivLu().solve(rhs);
  Mat s = Mat::Identity(n, n);
  for (int i = 0; i < 3; ++i) s += (h * kB[i]) * stages.block(i * n, 0, n, n);
  return s;
}

void SymplecticPath::push_node(double t, const Mat& step, const Frame& frame, const ScaledMat& g) {
  const auto n = static_cast<Eigen::Index>(dim());
  if (!times_.empty()) {
    const auto base = steps_.size();
    steps_.resize(base + static_cast<std::size_t>(n * n));
    Eigen::Map<Eigen::MatrixXd>(steps_.data() + base, n, n) = step;
  }
  times_.push_back(t);
  auto base = frames_.size();
  frames_.resize(base + static_cast<std::size_t>(2 * n * n));
  Eigen::Map<Eigen::MatrixXd>(frames_.data() + base, 2 * n, n) = frame;
  base = mant_.size();
  mant_.resize(base + static_cast<std::size_t>(n * n));
  Eigen::Map<Eigen::MatrixXd>(mant_.data() + base, n, n) = g.mantissa;
  expo_.push_back(g.exponent);
}

Mat SymplecticPath::step_map(std::size_t i) const {
  const auto n = static_cast<Eigen::Index>(dim());
  return Eigen::Map<const Eigen::MatrixXd>(steps_.data() + i * static_cast<std::size_t>(n * n), n, n);
}

Frame SymplecticPath::frame(std::size_t i) const {
  const auto n = static_cast<Eigen::Index>(dim());
  return Eigen::Map<const Eigen::MatrixXd>(frames_.data() + i * static_cast<std::size_t>(2 * n * n), 2 * n, n);
}

ScaledMat SymplecticPath::gamma_scaled(std::size_t i) const {
  const auto n = static_cast<Eigen::Index>(dim());
  return {Eigen::Map<const Eigen::MatrixXd>(mant_.data() + i * static_cast<std::size_t>(n * n), n, n), expo_[i]};
}

std::size_t SymplecticPath::locate(double t) const {
  require(t >= times_.front() - 1e-12 && t <= times_.back() + 1e-12, ErrorCode::domain,
          "time " + std::to_string(t) + " outside the path domain");
  if (t >= times_.back()) return times_.size() - 2;
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto i = static_cast<std::size_t>(it - times_.begin());
  return i == 0 ? 0 : i - 1;
}

Mat SymplecticPath::local_map(double t, std::size_t& node) const {
  node = locate(t);
  const double h = t - times_[node];
  if (h == 0.0) return Mat::Identity(dim(), dim());
  if (t == times_[node + 1]) return step_map(node);
  return gauss_step(field_, times_[node], h);
}

ScaledMat SymplecticPath::gamma_scaled_at(double t) const {
  std::size_t i = 0;
  const Mat phi = local_map(t, i);
  const ScaledMat g = gamma_scaled(i);
  return renormalized(phi * g.mantissa, g.exponent);
}

Frame SymplecticPath::frame_at(double t) const {
  std::size_t i = 0;
  const Mat phi = local_map(t, i);
  if (t == times_[i]) return frame(i);
  return propagate_frame(frame(i), phi);
}

ScaledMat SymplecticPath::transfer(double s, double t) const {
  require(s <= t, ErrorCode::invalid_argument, "transfer needs s <= t");
  std::size_t i = 0, j = 0;
  const Mat left = local_map(s, i);
  const Mat right = local_map(t, j);
  ScaledMat out{symplectic_inverse(left), 0};
  for (std::size_t k = i; k < j; ++k) out = renormalized(step_map(k) * out.mantissa, out.exponent);
  return renormalized(right * out.mantissa, out.exponent);
}

void SymplecticPath::finalize_residuals() {
  const Mat j = standard_j(dim_half());
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    sympl_residual_ = std::max(sympl_residual_, symplectic_residual(step_map(i)));
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    sympl_residual_ = std::max(sympl_residual_, frame_residual(frame(i), j));
    const ScaledMat g = gamma_scaled(i);
    const double scale = std::ldexp(1.0, -2 * std::min(g.exponent, 500));
    const Mat m = g.mantissa;
    const double num = max_abs(m.transpose() * j * m - scale * j);
    const double den = std::max(scale, max_abs(m) * max_abs(m));
    relative_residual_ = std::max(relative_residual_, num / den);
  }
}

SymplecticPath SymplecticPath::propagate(const SymmetricField& field, double a, double b,
                                         const PropagationControl& control, const Mat* anchor) {
  require(std::isfinite(a) && std::isfinite(b) && a != b, ErrorCode::invalid_argument,
          "propagation interval needs finite distinct endpoints");
  require(control.rel_tol > 0.0 && control.abs_tol > 0.0 && control.sympl_tol > 0.0, ErrorCode::invalid_argument,
          "tolerances must be positive");
  if (b < a) {
    SymplecticPath path = propagate(field.shift(a).reverse(), 0.0, a - b, control, anchor);
    path.backward_ = true;
    path.origin_ = a;
    return path;
  }
  const int n = field.dim();
  const Mat id = Mat::Identity(n, n);
  const Mat g0 = anchor ? *anchor : id;
  require(g0.rows() == n && g0.cols() == n, ErrorCode::invalid_argument, "anchor must be 2d x 2d");
  require(symplectic_residual(g0) <= 1e-8 * std::max(1.0, max_abs(g0) * max_abs(g0)), ErrorCode::invalid_argument,
          "anchor must be symplectic");

  SymplecticPath path(field, control);
  path.anchor_ = g0;
  double hmax = control.max_step > 0.0 ? control.max_step
                                       : std::min(0.25, field.bound() > 0.0 ? 0.4 / field.bound() : 0.25);
  ScaledMat g = renormalized(g0, 0);
  Frame fr = graph_frame(g0);
  path.push_node(a, id, fr, g);

  const double span = b - a;
  const double hmin = 1e-13 * std::max({1.0, std::abs(a), std::abs(b)});
  double t = a;
  double h = std::min(hmax, span);
  double worst = 0.0;
  while (t < b) {
    if (path.times_.size() >= control.max_nodes) {
      throw PropagationError("node budget exhausted at t = " + std::to_string(t), worst);
    }
    double target = std::min(b, t + h);
    if (control.breakpoint_spacing > 0.0) {
      const double k = std::floor((t - a) / control.breakpoint_spacing + 1e-9) + 1.0;
      const double next = a + k * control.breakpoint_spacing;
      if (next < target && next > t) target = next;
    }
    if (b - target < hmin) target = b;
    const double step = target - t;
    const Mat full = gauss_step(field, t, step);
    const Mat left = gauss_step(field, t, 0.5 * step);
    const Mat right = gauss_step(field, t + 0.5 * step, 0.5 * step);
    Mat two = right * left;
    const double err = max_abs(full - two) / 63.0;
    const double tol = control.abs_tol + control.rel_tol * max_abs(two);
    const double growth = max_abs(two - id);
    if ((err > tol || growth > 0.5) && step > hmin) {
      const double factor = err > 0.0 ? std::clamp(0.9 * std::pow(tol / err, 1.0 / 7.0), 0.2, 0.9) : 0.5;
      h = std::max(step * (growth > 0.5 ? 0.5 : factor), hmin);
      continue;
    }
    if (err > tol || growth > 0.5) {
      throw PropagationError("step size underflow at t = " + std::to_string(t), err);
    }
    double res = symplectic_residual(two);
    if (res > 0.5 * control.sympl_tol) {
      two = project_symplectic(two);
      ++path.projections_;
      res = symplectic_residual(two);
    }
    worst = std::max(worst, res);
    if (res > control.sympl_tol) {
      throw PropagationError("symplecticity residual " + std::to_string(res) + " exceeds tolerance at t = " +
                                 std::to_string(t),
                             res);
    }
    g = renormalized(two * g.mantissa, g.exponent);
    fr = propagate_frame(fr, two);
    t = target;
    path.push_node(t, two, fr, g);
    const double grow = err > 0.0 ? std::clamp(0.9 * std::pow(tol / err, 1.0 / 7.0), 0.2, 4.0) : 4.0;
    h = std::min(hmax, step * grow);
  }
  path.finalize_residuals();
  if (path.sympl_residual_ > control.sympl_tol) {
    throw PropagationError("frame residual exceeds tolerance", path.sympl_residual_);
  }
  return path;
}

SymplecticPath SymplecticPath::compose_restart(double s, double end) const {
  require(s >= t0() - 1e-12 && s < t1(), ErrorCode::domain, "restart time outside the path domain");
  require(end > s, ErrorCode::domain, "restart window is empty");
  end = std::min(end, t1());
  // Node times closer than this to the window end are snapped onto it.
  const double snap = 1e-12 * std::max(1.0, std::abs(end));
  const int n = dim();
  const Mat id = Mat::Identity(n, n);
  SymplecticPath out(field_.shift(s), control_);
  out.anchor_ = id;
  out.backward_ = false;
  std::size_t i = locate(s);
  ScaledMat g{id, 0};
  Frame fr = graph_frame(id);
  out.push_node(0.0, id, fr, g);
  double at = s;
  for (; i + 1 < times_.size() && at < end - snap; ++i) {
    const double next = times_[i + 1] < end - snap ? times_[i + 1] : end;
    // Partial intervals at either end of the window get their own Gauss step.
    const bool whole = at == times_[i] && next == times_[i + 1];
    const Mat step = whole ? step_map(i) : gauss_step(out.field_, at - s, next - at);
    g = renormalized(step * g.mantissa, g.exponent);
    fr = propagate_frame(fr, step);
    out.push_node(next - s, step, fr, g);
    at = next;
  }
  out.finalize_residuals();
  return out;
}

SymplecticPath SymplecticPath::compose_reverse_restart(double s, double end) const {
  require(s >= t0() - 1e-12 && s < t1(), ErrorCode::domain, "restart time outside the path domain");
  require(end > s && end <= t1() + 1e-9, ErrorCode::domain, "reverse restart window outside the path");
  end = std::min(end, t1());
  const double snap = 1e-12 * std::max(1.0, std::abs(end));
  // Forward step maps over [s, end], partial intervals recomputed.
  std::vector<double> cuts{s};
  std::vector<Mat> steps;
  for (std::size_t i = locate(s); i + 1 < times_.size() && cuts.back() < end - snap; ++i) {
    const double at = cuts.back();
    const double next = times_[i + 1] < end - snap ? times_[i + 1] : end;
    const bool whole = at == times_[i] && next == times_[i + 1];
    steps.push_back(whole ? step_map(i) : gauss_step(field_, at, next - at));
    cuts.push_back(next);
  }
  const int n = dim();
  const Mat id = Mat::Identity(n, n);
  SymplecticPath out(field_.shift(end).reverse(), control_);
  out.anchor_ = id;
  out.backward_ = false;
  ScaledMat g{id, 0};
  Frame fr = graph_frame(id);
  out.push_node(0.0, id, fr, g);
  for (std::size_t k = steps.size(); k-- > 0;) {
    const Mat step = symplectic_inverse(steps[k]);
    g = renormalized(step * g.mantissa, g.exponent);
    fr = propagate_frame(fr, step);
    out.push_node(end - cuts[k], step, fr, g);
  }
  out.finalize_residuals();
  return out;
}

void SymplecticPath::write_csv(std::ostream& out) const {
  const int n = dim();
  const Mat j = standard_j(dim_half());
  out << "t";
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out << ",g" << r << c;
  out << ",residual\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    const Mat g = gamma(i);
    out << original_time(times_[i]);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) out << ',' << g(r, c);
    out << ',' << frame_residual(frame(i), j) << '\n';
  }
}

SymplecticPath fundamental_solution(const SymmetricField& field, double a, double b, const PropagationControl& control,
                                    const Mat* anchor) {
  return SymplecticPath::propagate(field, a, b, control, anchor);
}

Mat monodromy(const SymmetricField& field, const PropagationControl& control) {
  require(field.is_periodic(), ErrorCode::structure_mismatch, "monodromy needs a periodic field");
  const auto path = SymplecticPath::propagate(field, 0.0, field.period(), control);
  return path.gamma(path.size() - 1);
}

}  // namespace hamidx
