#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "propagator.hpp"

namespace hamidx {

/// Orthonormal frame [A; C] of Gr(M) for a real symplectic anchor M.
struct AnchorFrame {
  Frame frame;

  static AnchorFrame from_matrix(const Mat& m);
  static AnchorFrame from_frame(const Frame& f) { return {f}; }
  int dim() const { return static_cast<int>(frame.cols()); }
};

struct CrossingRecord {
  double time = 0.0;
  int kernel_dim = 0;
  int signature = 0;
  int positive = 0;
  int negative = 0;
  bool degenerate = false;
  /// Counted contribution: positive at the start, signature inside, -negative at the end.
  int contribution = 0;
  double d_slope = 0.0;
};

struct IndexOptions {
  double kernel_tol = 1e-8;  // singular values of the principal-angle matrix
  double zero_tol = 1e-10;   // minimum counted as an exact touch
  double leaf_width = 1e-9;
  double merge_tol = 1e-8;
  double degeneracy_tol = 1e-9;  // relative to max(K, 1)
  double realness_tol = 1e-9;
  double eps_start = 1e-3;
  int eps_levels = 12;
  bool force_epsilon = false;
  std::size_t max_evaluations = 200'000'000;
};

struct CrossingScan {
  std::vector<CrossingRecord> crossings;
  bool continuum = false;
  bool ambiguous = false;
  double max_imag = 0.0;
  std::size_t evaluations = 0;

  long total() const;
  bool degenerate() const;
};

/// Crossings of e^{-eps J} gamma M^{-1} with {det(. - omega I) = 0} on [a, b].
CrossingScan find_crossings(const SymplecticPath& path, const AnchorFrame& anchor, Complex omega, double epsilon,
                            double a, double b, const IndexOptions& options = {});

struct IndexValue {
  long value = 0;
  Complex omega{1.0, 0.0};
  double epsilon = 0.0;
  std::vector<CrossingRecord> crossings;
  double max_imag = 0.0;
  /// (epsilon, value) pairs evaluated by the stabilization ladder.
  std::vector<std::pair<double, long>> ladder;
};

/// iota(omega M, gamma) over [a, b] with the anchor given as a frame.
IndexValue iota_frame(const SymplecticPath& path, const AnchorFrame& anchor, Complex omega, double a, double b,
                      const IndexOptions& options = {});
IndexValue iota(const Mat& m, const SymplecticPath& path, Complex omega, const IndexOptions& options = {});
IndexValue iota(const Mat& m, const SymplecticPath& path, Complex omega, double a, double b,
                const IndexOptions& options = {});

/// i_omega(gamma) = iota(omega I, gamma) - d [omega = 1]; the path must start at I.
IndexValue i_omega(const SymplecticPath& path, Complex omega, const IndexOptions& options = {});
IndexValue i_omega(const SymplecticPath& path, Complex omega, double a, double b, const IndexOptions& options = {});

/// Sum of dim ker(gamma(xi) M^{-1} - omega) over xi in [a, b), computed from
/// the eigenvalue winding of the Souriau unitary of Gr(gamma). Needs B > 0.
long positive_path_oracle(const SymplecticPath& path, const Mat& m, Complex omega);
long positive_path_oracle(const SymplecticPath& path, const Mat& m, Complex omega, double a, double b);

struct AdditivityReport {
  bool ok = false;
  long whole = 0;
  long left = 0;
  long right = 0;
  long right_restarted = 0;
  std::string detail;
};

/// iota over [a, b] against iota over [a, c] plus [c, b], the right part also
/// recomputed on the restarted path with the transported anchor M gamma(c)^{-1}.
AdditivityReport path_additivity_check(const SymplecticPath& path, double split, const Mat& m, Complex omega,
                                       const IndexOptions& options = {});

struct ComparisonReport {
  bool ok = false;
  long at_end = 0;
  long at_start = 0;
  std::vector<long> values;
  std::string detail;
};

/// iota(gamma(b), gamma) <= iota(M, gamma) <= iota(gamma(a), gamma) and
/// pairwise gaps at most 2d, for omega = 1.
ComparisonReport anchor_comparison_check(const SymplecticPath& path, const std::vector<Mat>& anchors,
                                         const IndexOptions& options = {});

struct DetSample {
  double time = 0.0;
  double value = 0.0;       // Re(conj(omega)^d det(gamma M^{-1} - omega))
  double normalized = 0.0;  // same quantity for orthonormal graph frames
  double imag = 0.0;        // imaginary part of the normalized quantity
};

/// Samples of the real defining function; raises numerical-integrity when the
/// normalized imaginary part exceeds the realness tolerance.
std::vector<DetSample> det_function(const SymplecticPath& path, const Mat& m, Complex omega,
                                    const std::vector<double>& times, double realness_tol = 1e-9);

void write_crossings_csv(std::ostream& out, const std::vector<CrossingRecord>& crossings);

}  // namespace hamidx
