#pragma once

#include <limits>

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "linalg.hpp"
#include "systems.hpp"

namespace hamidx {

struct PropagationControl {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  double max_step = 0.0;  // 0 picks min(0.25, 0.4 / K)
  double sympl_tol = 1e-8;
  /// Forces grid nodes at t0 + k * spacing (0 disables).
  double breakpoint_spacing = 0.0;
  std::size_t max_nodes = 20'000'000;
};

/// gamma = mantissa * 2^exponent; long hyperbolic paths overflow doubles.
struct ScaledMat {
  Mat mantissa;
  int exponent = 0;

  Mat value() const;
  double log2_norm() const;
};

/// One Gauss-Legendre (3 stages, order 6) step map of z' = J B(t) z from t to t + h.
Mat gauss_step(const SymmetricField& field, double t, double h);

/// Discretized fundamental solution on a forward time grid. A backward path
/// (b < a) is stored as the forward path tau -> gamma(a - tau) of the
/// reversed field, with original_time(tau) = a - tau.
class SymplecticPath {
 public:
  static SymplecticPath propagate(const SymmetricField& field, double a, double b,
                                  const PropagationControl& control = {}, const Mat* anchor = nullptr);

  const SymmetricField& field() const { return field_; }
  int dim_half() const { return field_.dim_half(); }
  int dim() const { return field_.dim(); }
  double t0() const { return times_.front(); }
  double t1() const { return times_.back(); }
  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  bool backward() const { return backward_; }
  double original_time(double tau) const { return backward_ ? origin_ - tau : tau; }
  const PropagationControl& control() const { return control_; }

  /// Phi(t_{i+1}, t_i).
  Mat step_map(std::size_t i) const;
  /// Orthonormal frame [X; Y] of Gr(gamma(t_i)), det X > 0.
  Frame frame(std::size_t i) const;
  ScaledMat gamma_scaled(std::size_t i) const;
  Mat gamma(std::size_t i) const { return gamma_scaled(i).value(); }
  const Mat& anchor() const { return anchor_; }

  /// Index i of the node with t_i <= t < t_{i+1} (last interval closed).
  std::size_t locate(double t) const;
  /// Phi(t, t_i) for the node i = locate(t), by one local Gauss step.
  Mat local_map(double t, std::size_t& node) const;
  ScaledMat gamma_scaled_at(double t) const;
  Mat gamma_at(double t) const { return gamma_scaled_at(t).value(); }
  Frame frame_at(double t) const;
  Mat field_at(double t) const { return field_.evaluate(t); }

  /// Max residual of the step maps (absolute) and of the stored frames.
  double sympl_residual() const { return sympl_residual_; }
  /// max_i ||gamma^T J gamma - J|| / max(1, ||gamma||^2).
  double relative_residual() const { return relative_residual_; }
  std::size_t projections() const { return projections_; }

  /// Phi(t, s) = gamma(t) gamma(s)^{-1} from the stored step maps, s <= t.
  ScaledMat transfer(double s, double t) const;

  /// t -> gamma(s + t) gamma(s)^{-1} on [0, min(end, t1) - s], anchor I, field shifted by s.
  SymplecticPath compose_restart(double s, double end = std::numeric_limits<double>::infinity()) const;
  /// tau -> gamma(end - tau) gamma(end)^{-1} on [0, end - s]; the field is B(. + end) reversed.
  SymplecticPath compose_reverse_restart(double s, double end) const;

  /// CSV rows t, gamma entries (row-major), residual.
  void write_csv(std::ostream& out) const;

 private:
  SymplecticPath(const SymmetricField& field, const PropagationControl& control) : field_(field), control_(control) {}
  void push_node(double t, const Mat& step, const Frame& frame, const ScaledMat& g);
  void finalize_residuals();

  SymmetricField field_;
  PropagationControl control_;
  bool backward_ = false;
  double origin_ = 0.0;
  Mat anchor_;
  std::vector<double> times_;
  std::vector<double> steps_;   // n*n per interval
  std::vector<double> frames_;  // 2n*n per node
  std::vector<double> mant_;    // n*n per node
  std::vector<int> expo_;
  double sympl_residual_ = 0.0;
  double relative_residual_ = 0.0;
  std::size_t projections_ = 0;
};

SymplecticPath fundamental_solution(const SymmetricField& field, double a, double b,
                                    const PropagationControl& control = {}, const Mat* anchor = nullptr);

/// gamma(T) for a periodic field; structure-mismatch otherwise.
Mat monodromy(const SymmetricField& field, const PropagationControl& control = {});

}  // namespace hamidx
