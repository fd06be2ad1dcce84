#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace hamidx {

enum class TermMode { constant, cos, sin, gaussian };

const char* term_mode_name(TermMode mode);
TermMode term_mode_from_name(const std::string& name);

/// One summand C * mode(frequency * (t + offset)) of a coefficient field.
/// `gaussian` is exp(-(frequency * (t + offset))^2) and only models
/// transients of asymptotically periodic fields.
struct Term {
  Mat matrix;
  TermMode mode = TermMode::constant;
  double frequency = 0.0;
  double offset = 0.0;

  double weight(double t) const;
};

/// One summand C * mode(k . theta) of a torus surface, k an integer vector.
struct TorusTerm {
  Mat matrix;
  TermMode mode = TermMode::constant;
  std::vector<double> wavevector;
};

/// Quasi-periodic coefficient B(t) = S(p + q t) on the m-torus.
struct TorusField {
  int torus_dim = 0;
  std::vector<TorusTerm> surface;
  std::vector<double> base_point;
  std::vector<double> frequency;
  double step = 1.0;  // u with q_1..q_m, 1/u rationally independent (declared)

  Mat surface_at(const std::vector<double>& angles, int dim) const;
  Mat at_time(double t, int dim) const;
  /// P: p -> p + u q.
  std::vector<double> translate(double times) const;
};

enum class StructureKind { generic, periodic, quasi_periodic, asymptotic_periodic };

const char* structure_kind_name(StructureKind kind);

class SymmetricField;

struct Structure {
  StructureKind kind = StructureKind::generic;
  double period = 0.0;
  std::optional<TorusField> torus;
  std::shared_ptr<const SymmetricField> limit;
};

/// A continuous symmetric coefficient t -> B(t) of dimension 2d with a
/// declared operator-norm bound K. Immutable after construction.
class SymmetricField {
 public:
  using Evaluator = std::function<Mat(double)>;

  /// Field given by a list of trigonometric/constant terms (and an optional
  /// torus surface when `structure.kind` is quasi-periodic).
  static SymmetricField from_terms(std::string name, int d, double bound, Structure structure,
                                   std::vector<Term> terms);

  /// Field given by a closed-form evaluator; not serializable.
  static SymmetricField from_evaluator(std::string name, int d, double bound, Structure structure,
                                       Evaluator eval);

  /// Piecewise-linear interpolation of samples; clamped outside the table.
  static SymmetricField tabulated(std::string name, std::vector<double> times, std::vector<Mat> values);

  const std::string& name() const { return name_; }
  int dim_half() const { return d_; }
  int dim() const { return 2 * d_; }
  double bound() const { return bound_; }
  const Structure& structure() const { return structure_; }
  bool is_periodic() const { return structure_.kind == StructureKind::periodic; }
  double period() const { return structure_.period; }
  const std::optional<std::vector<Term>>& terms() const { return terms_; }
  bool serializable() const { return terms_.has_value(); }

  /// B(t); throws invalid-argument for non-finite t.
  Mat evaluate(double t) const;
  Mat operator()(double t) const { return evaluate(t); }

  /// t -> B(s + t).
  SymmetricField shift(double s) const;
  /// t -> -B(-t); its fundamental solution is t -> gamma(-t).
  SymmetricField reverse() const;
  /// B + c I with bound K + |c|; keeps the structure tag.
  SymmetricField plus_identity(double c) const;
  /// B + other. Periodic with the common period when both are periodic with
  /// equal periods, generic otherwise unless `structure` is supplied.
  SymmetricField plus(const SymmetricField& other, std::optional<Structure> structure = std::nullopt) const;

  SymmetricField renamed(std::string name) const;

  /// Spot-checks symmetry, the bound and periodicity on `samples` points in
  /// [-50, 50]; throws invalid-argument on violation.
  void validate(int samples = 64) const;

 private:
  SymmetricField() = default;
  static Mat sum_terms(const std::vector<Term>& terms, double t, int dim);

  std::string name_;
  int d_ = 1;
  double bound_ = 0.0;
  Structure structure_;
  std::optional<std::vector<Term>> terms_;
  Evaluator eval_;
};

using ParamMap = std::map<std::string, double>;

/// Catalog of named example fields. Unknown names raise catalog-miss.
SymmetricField catalog(const std::string& name, const ParamMap& params = {});
std::vector<std::string> catalog_names();

/// psi(t) = t sin(ln(1 + |t|)) used by the `example_45` catalog entry.
double example45_psi(double t);
double example45_psi_dot(double t);

/// Random trigonometric field with ||B|| <= bound; `positive` yields
/// B = Q^T Q + floor I with floor > 0.
struct RandomFieldSpec {
  std::uint64_t seed = 0;
  int d = 1;
  double bound = 1.0;
  int modes = 3;
  bool positive = false;
  double floor = 0.1;
  std::optional<double> period;  // all frequencies multiples of 2 pi / period
};

SymmetricField random_field(const RandomFieldSpec& spec);

}  // namespace hamidx
