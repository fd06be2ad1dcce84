#include "systems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "errors.hpp"

namespace hamidx {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mode_value(TermMode mode, double arg) {
  switch (mode) {
    case TermMode::constant:
      return 1.0;
    case TermMode::cos:
      return std::cos(arg);
    case TermMode::sin:
      return std::sin(arg);
    case TermMode::gaussian:
      return std::exp(-arg * arg);
  }
  return 0.0;
}

void check_half_dim(int d) {
  require(d >= 1 && d <= kMaxHalfDim, ErrorCode::invalid_argument,
          "half-dimension d must lie in [1, " + std::to_string(kMaxHalfDim) + "], got " + std::to_string(d));
}

int int_param(const ParamMap& params, const std::string& key, int fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  require(std::isfinite(v) && std::floor(v) == v, ErrorCode::invalid_argument, "parameter " + key + " must be an integer");
  return static_cast<int>(v);
}

double real_param(const ParamMap& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  require(std::isfinite(it->second), ErrorCode::invalid_argument, "parameter " + key + " must be finite");
  return it->second;
}

Structure periodic_structure(double period) {
  require(period > 0.0 && std::isfinite(period), ErrorCode::invalid_argument, "period must be positive");
  Structure s;
  s.kind = StructureKind::periodic;
  s.period = period;
  return s;
}

Mat block_diag(const Vec& upper, const Vec& lower) {
  const auto d = upper.size();
  Mat m = Mat::Zero(2 * d, 2 * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    m(i, i) = upper(i);
    m(d + i, d + i) = lower(i);
  }
  return m;
}

}  // namespace

const char* term_mode_name(TermMode mode) {
  switch (mode) {
    case TermMode::constant:
      return "constant";
    case TermMode::cos:
      return "cos";
    case TermMode::sin:
      return "sin";
    case TermMode::gaussian:
      return "gaussian";
  }
  return "?";
}

TermMode term_mode_from_name(const std::string& name) {
  if (name == "constant") return TermMode::constant;
  if (name == "cos") return TermMode::cos;
  if (name == "sin") return TermMode::sin;
  if (name == "gaussian") return TermMode::gaussian;
  fail(ErrorCode::config, "unknown term mode '" + name + "'");
}

const char* structure_kind_name(StructureKind kind) {
  switch (kind) {
    case StructureKind::generic:
      return "generic";
    case StructureKind::periodic:
      return "periodic";
    case StructureKind::quasi_periodic:
      return "quasi_periodic";
    case StructureKind::asymptotic_periodic:
      return "asymptotic_periodic";
  }
  return "?";
}

double Term::weight(double t) const { return mode_value(mode, frequency * (t + offset)); }

Mat TorusField::surface_at(const std::vector<double>& angles, int dim) const {
  Mat out = Mat::Zero(dim, dim);
  for (const auto& term : surface) {
    double arg = 0.0;
    for (int i = 0; i < torus_dim; ++i) arg += term.wavevector[i] * angles[i];
    out += mode_value(term.mode, arg) * term.matrix;
  }
  return out;
}

Mat TorusField::at_time(double t, int dim) const {
  std::vector<double> angles(torus_dim);
  for (int i = 0; i < torus_dim; ++i) angles[i] = base_point[i] + frequency[i] * t;
  return surface_at(angles, dim);
}

std::vector<double> TorusField::translate(double times) const {
  std::vector<double> p(torus_dim);
  for (int i = 0; i < torus_dim; ++i) p[i] = base_point[i] + times * step * frequency[i];
  return p;
}

Mat SymmetricField::sum_terms(const std::vector<Term>& terms, double t, int dim) {
  Mat out = Mat::Zero(dim, dim);
  for (const auto& term : terms) out += term.weight(t) * term.matrix;
  return out;
}

SymmetricField SymmetricField::from_terms(std::string name, int d, double bound, Structure structure,
                                          std::vector<Term> terms) {
  check_half_dim(d);
  require(std::isfinite(bound) && bound >= 0.0, ErrorCode::invalid_argument, "bound K must be finite and >= 0");
  for (const auto& term : terms) {
    require(term.matrix.rows() == 2 * d && term.matrix.cols() == 2 * d, ErrorCode::invalid_argument,
            "term matrix must be 2d x 2d");
    require(term.matrix.allFinite() && std::isfinite(term.frequency) && std::isfinite(term.offset),
            ErrorCode::invalid_argument, "term entries must be finite");
    require(symmetry_residual(term.matrix) <= 1e-12, ErrorCode::invalid_argument, "term matrix is not symmetric");
  }
  if (structure.torus) {
    const auto& tf = *structure.torus;
    require(tf.torus_dim >= 1, ErrorCode::invalid_argument, "torus dimension must be positive");
    require(static_cast<int>(tf.base_point.size()) == tf.torus_dim &&
                static_cast<int>(tf.frequency.size()) == tf.torus_dim,
            ErrorCode::invalid_argument, "torus p and q must have length m");
    require(tf.step > 0.0, ErrorCode::invalid_argument, "torus step u must be positive");
    for (const auto& term : tf.surface) {
      require(static_cast<int>(term.wavevector.size()) == tf.torus_dim, ErrorCode::invalid_argument,
              "surface term wavevector must have length m");
      require(term.matrix.rows() == 2 * d && term.matrix.cols() == 2 * d, ErrorCode::invalid_argument,
              "surface term matrix must be 2d x 2d");
      require(term.mode != TermMode::gaussian, ErrorCode::invalid_argument, "gaussian mode is not periodic on the torus");
      require(symmetry_residual(term.matrix) <= 1e-12, ErrorCode::invalid_argument, "surface term matrix is not symmetric");
    }
  }
  SymmetricField f;
  f.name_ = std::move(name);
  f.d_ = d;
  f.bound_ = bound;
  f.structure_ = std::move(structure);
  f.terms_ = std::move(terms);
  f.validate();
  return f;
}

SymmetricField SymmetricField::from_evaluator(std::string name, int d, double bound, Structure structure,
                                              Evaluator eval) {
  check_half_dim(d);
  require(std::isfinite(bound) && bound >= 0.0, ErrorCode::invalid_argument, "bound K must be finite and >= 0");
  require(static_cast<bool>(eval), ErrorCode::invalid_argument, "evaluator must be callable");
  SymmetricField f;
  f.name_ = std::move(name);
  f.d_ = d;
  f.bound_ = bound;
  f.structure_ = std::move(structure);
  f.eval_ = std::move(eval);
  f.validate();
  return f;
}

SymmetricField SymmetricField::tabulated(std::string name, std::vector<double> times, std::vector<Mat> values) {
  require(times.size() >= 2 && times.size() == values.size(), ErrorCode::invalid_argument,
          "tabulated field needs at least two samples and matching sizes");
  require(std::is_sorted(times.begin(), times.end()) &&
              std::adjacent_find(times.begin(), times.end()) == times.end(),
          ErrorCode::invalid_argument, "tabulated times must be strictly increasing");
  const int dim = static_cast<int>(values.front().rows());
  require(dim % 2 == 0, ErrorCode::invalid_argument, "tabulated matrices must have even dimension");
  double bound = 0.0;
  for (auto& v : values) {
    require(v.rows() == dim && v.cols() == dim, ErrorCode::invalid_argument, "tabulated matrices must share a size");
    require(symmetry_residual(v) <= 1e-12, ErrorCode::invalid_argument, "tabulated matrix is not symmetric");
    v = 0.5 * (v + v.transpose()).eval();
    bound = std::max(bound, operator_norm(v));
  }
  auto eval = [times = std::move(times), values = std::move(values)](double t) -> Mat {
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto i = static_cast<std::size_t>(it - times.begin()) - 1;
    const double w = (t - times[i]) / (times[i + 1] - times[i]);
    return (1.0 - w) * values[i] + w * values[i + 1];
  };
  return from_evaluator(std::move(name), dim / 2, bound * (1.0 + 1e-12), Structure{}, std::move(eval));
}

Mat SymmetricField::evaluate(double t) const {
  require(std::isfinite(t), ErrorCode::invalid_argument, "evaluation time must be finite");
  if (eval_) return eval_(t);
  Mat out = sum_terms(*terms_, t, dim());
  if (structure_.torus) out += structure_.torus->at_time(t, dim());
  return out;
}

SymmetricField SymmetricField::shift(double s) const {
  require(std::isfinite(s), ErrorCode::invalid_argument, "shift must be finite");
  SymmetricField out = *this;
  if (structure_.torus) {
    auto& tf = *out.structure_.torus;
    for (int i = 0; i < tf.torus_dim; ++i) tf.base_point[i] += tf.frequency[i] * s;
  }
  if (structure_.limit) out.structure_.limit = std::make_shared<const SymmetricField>(structure_.limit->shift(s));
  if (terms_) {
    for (auto& term : *out.terms_) term.offset += s;
  } else {
    out.eval_ = [eval = eval_, s](double t) { return eval(t + s); };
  }
  return out;
}

SymmetricField SymmetricField::reverse() const {
  SymmetricField out = *this;
  if (structure_.torus) {
    auto& tf = *out.structure_.torus;
    for (auto& q : tf.frequency) q = -q;
    for (auto& term : tf.surface) term.matrix = -term.matrix;
  }
  if (structure_.limit) out.structure_.limit = std::make_shared<const SymmetricField>(structure_.limit->reverse());
  if (terms_) {
    // -C mode(f(-t + o)) written as C' mode(f(t + o')) with o' = -o.
    for (auto& term : *out.terms_) {
      term.offset = -term.offset;
      if (term.mode != TermMode::sin) term.matrix = -term.matrix;
    }
  } else {
    out.eval_ = [eval = eval_](double t) -> Mat { return -eval(-t); };
  }
  return out;
}

SymmetricField SymmetricField::plus_identity(double c) const {
  require(std::isfinite(c), ErrorCode::invalid_argument, "identity shift must be finite");
  SymmetricField out = *this;
  out.bound_ = bound_ + std::abs(c);
  const Mat add = c * Mat::Identity(dim(), dim());
  if (structure_.limit) {
    out.structure_.limit = std::make_shared<const SymmetricField>(structure_.limit->plus_identity(c));
  }
  if (terms_ && structure_.torus) {
    TorusTerm term;
    term.matrix = add;
    term.wavevector.assign(structure_.torus->torus_dim, 0.0);
    out.structure_.torus->surface.push_back(std::move(term));
  } else if (terms_) {
    Term term;
    term.matrix = add;
    out.terms_->push_back(std::move(term));
  } else {
    out.eval_ = [eval = eval_, add](double t) -> Mat { return eval(t) + add; };
  }
  return out;
}

SymmetricField SymmetricField::plus(const SymmetricField& other, std::optional<Structure> structure) const {
  require(other.d_ == d_, ErrorCode::invalid_argument, "fields must share the half-dimension");
  Structure st;
  if (structure) {
    st = std::move(*structure);
  } else if (is_periodic() && other.is_periodic() && std::abs(period() - other.period()) <= 1e-12 * period()) {
    st = periodic_structure(period());
  }
  const std::string name = name_ + "+" + other.name_;
  const double bound = bound_ + other.bound_;
  if (terms_ && other.terms_ && !structure_.torus && !other.structure_.torus && !st.torus) {
    std::vector<Term> terms = *terms_;
    terms.insert(terms.end(), other.terms_->begin(), other.terms_->end());
    return from_terms(name, d_, bound, std::move(st), std::move(terms));
  }
  return from_evaluator(name, d_, bound, std::move(st),
                        [a = *this, b = other](double t) -> Mat { return a.evaluate(t) + b.evaluate(t); });
}

SymmetricField SymmetricField::renamed(std::string name) const {
  SymmetricField out = *this;
  out.name_ = std::move(name);
  return out;
}

void SymmetricField::validate(int samples) const {
  const double golden = 0.6180339887498949;
  for (int i = 0; i < samples; ++i) {
    const double frac = std::fmod((i + 0.5) / samples + 0.37 * golden, 1.0);
    const double t = -50.0 + 100.0 * frac;
    const Mat b = evaluate(t);
    std::ostringstream where;
    where << " at t = " << t << " (field '" << name_ << "')";
    require(b.rows() == dim() && b.cols() == dim(), ErrorCode::invalid_argument, "evaluator returned wrong size" + where.str());
    require(b.allFinite(), ErrorCode::invalid_argument, "evaluator returned non-finite entries" + where.str());
    require(symmetry_residual(b) <= 1e-12, ErrorCode::invalid_argument, "B(t) is not symmetric" + where.str());
    const double norm = operator_norm(b);
    require(norm <= bound_ * (1.0 + 1e-12) + 1e-12, ErrorCode::invalid_argument,
            "||B(t)|| = " + std::to_string(norm) + " exceeds K = " + std::to_string(bound_) + where.str());
    if (structure_.kind == StructureKind::periodic) {
      require(structure_.period > 0.0, ErrorCode::invalid_argument, "periodic structure needs a positive period");
      const Mat bp = evaluate(t + structure_.period);
      require(max_abs(bp - b) <= 1e-12 * std::max(1.0, bound_), ErrorCode::invalid_argument,
              "B(t + T) != B(t)" + where.str());
    }
  }
  if (structure_.kind == StructureKind::quasi_periodic) {
    require(structure_.torus.has_value(), ErrorCode::invalid_argument, "quasi-periodic structure needs a torus field");
  }
  if (structure_.kind == StructureKind::asymptotic_periodic) {
    require(structure_.limit && structure_.limit->is_periodic(), ErrorCode::invalid_argument,
            "asymptotically periodic structure needs a periodic limit field");
    require(structure_.limit->dim_half() == d_, ErrorCode::invalid_argument, "limit field must share the half-dimension");
  }
}

double example45_psi(double t) {
  const double a = std::abs(t);
  return t * std::sin(std::log1p(a));
}

double example45_psi_dot(double t) {
  const double a = std::abs(t);
  const double l = std::log1p(a);
  return std::sin(l) + a / (1.0 + a) * std::cos(l);
}

std::vector<std::string> catalog_names() {
  return {"constant_k", "rotation_k", "hyperbolic", "periodic_demo", "quasi_periodic_demo", "example_45",
          "asymptotic_blend"};
}

namespace {

SymmetricField make_constant(const std::string& name, int d, const Vec& upper, const Vec& lower, double period) {
  Term term;
  term.matrix = block_diag(upper, lower);
  const double bound = std::max(upper.cwiseAbs().maxCoeff(), lower.cwiseAbs().maxCoeff());
  return SymmetricField::from_terms(name, d, bound, periodic_structure(period), {term});
}

SymmetricField make_hyperbolic(int d, double rate, double period) {
  return make_constant("hyperbolic", d, Vec::Constant(d, rate), Vec::Constant(d, -rate), period);
}

}  // namespace

SymmetricField catalog(const std::string& name, const ParamMap& params) {
  const int d = int_param(params, "d", 1);
  check_half_dim(d);
  if (name == "constant_k") {
    const double k = real_param(params, "k", 1.0);
    return make_constant(name, d, Vec::Constant(d, k), Vec::Constant(d, k), real_param(params, "period", kTwoPi));
  }
  if (name == "rotation_k") {
    Vec k(d);
    const double base = real_param(params, "k", 1.0);
    for (int i = 0; i < d; ++i) k(i) = real_param(params, "k" + std::to_string(i + 1), base);
    return make_constant(name, d, k, k, real_param(params, "period", kTwoPi));
  }
  if (name == "hyperbolic") {
    return make_hyperbolic(d, real_param(params, "c", 1.0), real_param(params, "period", 1.0));
  }
  if (name == "periodic_demo") {
    require(d == 1, ErrorCode::invalid_argument, "periodic_demo is two-dimensional (d = 1)");
    const double a = real_param(params, "a", 1.0);
    const double b = real_param(params, "b", 1.0);
    const double c = real_param(params, "c", 1.0);
    const double w = real_param(params, "frequency", 1.0);
    require(w > 0.0, ErrorCode::invalid_argument, "frequency must be positive");
    Term t0, t1;
    t0.matrix = Mat::Zero(2, 2);
    t0.matrix(0, 0) = a;
    t0.matrix(1, 1) = c;
    t1.matrix = Mat::Zero(2, 2);
    t1.matrix(0, 0) = b;
    t1.mode = TermMode::cos;
    t1.frequency = w;
    return SymmetricField::from_terms(name, 1, std::max(std::abs(a) + std::abs(b), std::abs(c)),
                                      periodic_structure(kTwoPi / w), {t0, t1});
  }
  if (name == "quasi_periodic_demo") {
    require(d == 1, ErrorCode::invalid_argument, "quasi_periodic_demo is two-dimensional (d = 1)");
    const double mean = real_param(params, "mean", 1.5);
    const double amp = real_param(params, "amp", 0.3);
    const double aniso = real_param(params, "aniso", 0.3);
    TorusField tf;
    tf.torus_dim = 2;
    tf.base_point = {real_param(params, "p1", 0.0), real_param(params, "p2", 0.0)};
    tf.frequency = {real_param(params, "q1", 1.0), real_param(params, "q2", std::sqrt(2.0))};
    tf.step = real_param(params, "u", 1.0);
    const Mat id = Mat::Identity(2, 2);
    Mat c1 = Mat::Zero(2, 2), s2 = Mat::Zero(2, 2);
    c1 << 1.0, 0.0, 0.0, -1.0;
    s2 << 0.0, 1.0, 1.0, 0.0;
    tf.surface.push_back({mean * id, TermMode::constant, {0.0, 0.0}});
    tf.surface.push_back({amp * id, TermMode::cos, {1.0, 0.0}});
    tf.surface.push_back({amp * id, TermMode::cos, {0.0, 1.0}});
    if (aniso != 0.0) {
      tf.surface.push_back({aniso * c1, TermMode::cos, {1.0, 0.0}});
      tf.surface.push_back({aniso * s2, TermMode::sin, {0.0, 1.0}});
    }
    Structure st;
    st.kind = StructureKind::quasi_periodic;
    st.torus = std::move(tf);
    const double bound = std::abs(mean) + 2.0 * std::abs(amp) + std::abs(aniso);
    return SymmetricField::from_terms(name, 1, bound, std::move(st), {});
  }
  if (name == "example_45") {
    require(d == 1, ErrorCode::invalid_argument, "example_45 is two-dimensional (d = 1)");
    auto eval = [](double t) -> Mat {
      const double psi = example45_psi(t);
      const double s = std::sin(2.0 * psi), c = std::cos(2.0 * psi);
      const double pd = example45_psi_dot(t);
      Mat b(2, 2);
      b << pd + s, -c, -c, pd - s;
      return b;
    };
    return SymmetricField::from_evaluator(name, 1, 3.0, Structure{}, eval);
  }
  if (name == "asymptotic_blend") {
    const double rate = real_param(params, "c", 1.0);
    const double amp = real_param(params, "amp", 0.5);
    const double width = real_param(params, "width", 1.0);
    require(width > 0.0, ErrorCode::invalid_argument, "width must be positive");
    const auto limit = make_hyperbolic(d, rate, real_param(params, "period", 1.0));
    std::vector<Term> terms = *limit.terms();
    Term transient;
    transient.matrix = amp * Mat::Identity(2 * d, 2 * d);
    transient.mode = TermMode::gaussian;
    transient.frequency = 1.0 / width;
    terms.push_back(transient);
    Structure st;
    st.kind = StructureKind::asymptotic_periodic;
    st.limit = std::make_shared<const SymmetricField>(limit);
    return SymmetricField::from_terms(name, d, std::abs(rate) + std::abs(amp), std::move(st), std::move(terms));
  }
  fail(ErrorCode::catalog_miss, "unknown catalog entry '" + name + "'");
}

SymmetricField random_field(const RandomFieldSpec& spec) {
  check_half_dim(spec.d);
  require(spec.bound > 0.0 && spec.modes >= 1, ErrorCode::invalid_argument, "random field needs bound > 0 and modes >= 1");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> freq(0.3, 2.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::uniform_int_distribution<int> harmonic(1, 3);
  const int n = 2 * spec.d;
  auto random_matrix = [&](bool symmetric) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = unit(rng);
    if (symmetric) m = (0.5 * (m + m.transpose())).eval();
    return m;
  };
  auto draw_frequency = [&]() {
    if (spec.period) return kTwoPi / *spec.period * harmonic(rng);
    return freq(rng);
  };
  Structure st;
  if (spec.period) st = periodic_structure(*spec.period);
  const std::string name = "random_" + std::to_string(spec.seed);

  if (!spec.positive) {
    std::vector<Term> terms;
    double total = 0.0;
    Term c0;
    c0.matrix = random_matrix(true);
    total += operator_norm(c0.matrix);
    terms.push_back(c0);
    for (int j = 0; j < spec.modes; ++j) {
      Term t;
      t.matrix = random_matrix(true);
      t.mode = TermMode::cos;
      t.frequency = draw_frequency();
      t.offset = phase(rng) / t.frequency;
      total += operator_norm(t.matrix);
      terms.push_back(t);
    }
    std::uniform_real_distribution<double> fill(0.5, 1.0);
    const double scale = spec.bound * fill(rng) / total;
    for (auto& t : terms) t.matrix *= scale;
    return SymmetricField::from_terms(name, spec.d, spec.bound, std::move(st), std::move(terms));
  }

  require(spec.floor > 0.0 && spec.floor < spec.bound, ErrorCode::invalid_argument, "positive random field needs 0 < floor < bound");
  std::vector<Mat> q;
  std::vector<double> w, ph;
  double total = 0.0;
  for (int j = 0; j <= spec.modes; ++j) {
    q.push_back(random_matrix(false));
    w.push_back(j == 0 ? 0.0 : draw_frequency());
    ph.push_back(j == 0 ? 0.0 : phase(rng));
    total += operator_norm(q.back());
  }
  const double scale = std::sqrt(spec.bound - spec.floor) / total;
  for (auto& m : q) m *= scale;
  const double floor = spec.floor;
  auto eval = [q, w, ph, floor, n](double t) -> Mat {
    Mat qt = Mat::Zero(n, n);
    for (std::size_t j = 0; j < q.size(); ++j) qt += std::cos(w[j] * t + ph[j]) * q[j];
    Mat b = qt.transpose() * qt;
    b = (0.5 * (b + b.transpose())).eval();
    b.diagonal().array() += floor;
    return b;
  };
  return SymmetricField::from_evaluator(name, spec.d, spec.bound, std::move(st), eval);
}

}  // namespace hamidx
