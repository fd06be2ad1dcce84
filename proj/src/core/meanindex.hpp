#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maslov.hpp"
#include "propagator.hpp"
#include "systems.hpp"

namespace hamidx {

struct ThetaGrid {
  int samples = 256;
  double jitter = 1e-6;
  /// Evaluate the index at every grid node instead of once per constant arc.
  bool every_node = false;
};

struct ThetaAverage {
  double value = 0.0;
  /// 2d * jumps / samples.
  double bound = 0.0;
  int jumps = 0;
  std::size_t evaluations = 0;
  double max_imag = 0.0;
};

/// Uniform-grid average of i_{e^{i theta}} over theta for the window [s, s + w]
/// of a path, i.e. of the restarted path gamma(s + .) gamma(s)^{-1}.
ThetaAverage theta_average(const SymplecticPath& path, double s, double w, const ThetaGrid& grid = {},
                           const IndexOptions& options = {});

struct WindowIndices {
  long f = 0;
  long g = 0;
  double h = 0.0;
  double h_bound = 0.0;
  double max_imag = 0.0;
};

/// f = iota(I, .), g = iota(end, .), h = theta average, all for the restarted
/// window path; raises internal-consistency if f >= h >= g >= f - 2d fails.
WindowIndices window_fgh(const SymplecticPath& path, double s, double w, const ThetaGrid& grid = {},
                         const IndexOptions& options = {});
long window_f(const SymplecticPath& path, double s, double w, const IndexOptions& options = {});
long window_g(const SymplecticPath& path, double s, double w, const IndexOptions& options = {});

WindowIndices fgh(const SymmetricField& field, int n, const ThetaGrid& grid = {}, const IndexOptions& options = {},
                  const PropagationControl& control = {});

struct PeriodicMeanIndex {
  double per_period = 0.0;
  double mean_index = 0.0;  // per_period / T
  double bound = 0.0;       // quadrature error bound on per_period
  int jumps = 0;
  double sympl_residual = 0.0;
};

PeriodicMeanIndex mean_index_periodic(const SymmetricField& field, const ThetaGrid& grid = {},
                                      const IndexOptions& options = {}, const PropagationControl& control = {});

enum class Direction { forward, backward };
enum class Scheme { direct, dyadic };

const char* direction_name(Direction d);
const char* scheme_name(Scheme s);

struct EstimateParams {
  Scheme scheme = Scheme::direct;
  double horizon = 500.0;  // direct scheme
  int k = 8;               // dyadic scheme
  int n = 32;
  ThetaGrid theta;
  IndexOptions index;
  PropagationControl control;
  unsigned threads = 0;
};

struct DyadicTable {
  int k = 0;
  int n = 0;
  int d = 1;
  std::vector<long> f, g;
  std::vector<double> h;
  /// Running averages over the first m windows, m = 1..n.
  std::vector<double> f_avg, g_avg, h_avg;
  bool sandwich_ok = true;
};

struct MeanIndexEstimate {
  double lower = 0.0;
  double upper = 0.0;
  Direction direction = Direction::forward;
  Scheme scheme = Scheme::direct;
  double horizon = 0.0;
  int k = 0;
  int n = 0;
  double residual_bound = 0.0;
  bool residual_rigorous = false;
  /// Direct: (l, a_l). Dyadic: (m, H_{k,m} / 2^k).
  std::vector<std::pair<double, double>> trace;
  std::optional<DyadicTable> table;
  /// Dyadic only: F_{k-1,2n} / 2^{k-1} >= F_{k,n} / 2^k on the same horizon.
  bool f_monotone = true;
  double tail_start = 0.0;
  double sympl_residual = 0.0;
  double max_imag = 0.0;
};

MeanIndexEstimate mean_index_interval(const SymmetricField& field, Direction direction,
                                      const EstimateParams& params = {});

/// Direct-scheme tail heuristic (dK/pi + 2d)/l + (dK/pi + 2d/l)/l.
double direct_tail_heuristic(int d, double bound, double l);
/// Smallest integer l with the heuristic at most 0.05, capped at ceil(L/2).
long direct_tail_start(int d, double bound, double horizon);

/// i_1(gamma, [t0, t]) for every t from one crossing scan of a path anchored at I.
class PrefixIndex {
 public:
  PrefixIndex(const SymplecticPath& path, const IndexOptions& options = {});
  long iota_to(double t) const;
  long i1_to(double t) const { return iota_to(t) - d_; }
  double epsilon() const { return epsilon_; }
  double max_imag() const { return max_imag_; }

 private:
  std::vector<CrossingRecord> crossings_;
  double t0_ = 0.0;
  double merge_tol_ = 1e-8;
  int d_ = 1;
  double epsilon_ = 0.0;
  double max_imag_ = 0.0;
};

struct WitnessResult {
  std::vector<long> m;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> errors;
  bool success = false;
  std::string diagnostic;
};

/// Times u m_k with |i_1(gamma, [0, u m_k]) / (u m_k) - v| strictly decreasing.
WitnessResult witness_subsequence(const SymmetricField& field, double v, double u, double horizon,
                                  const EstimateParams& params = {});

struct ShiftComparison {
  double shift = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double diff_lower = 0.0;
  double diff_upper = 0.0;
  double bound = 0.0;
  bool ok = false;
};

struct InvarianceReport {
  MeanIndexEstimate base;
  std::vector<ShiftComparison> entries;
  bool ok = true;
};

/// Direct estimates of B and of B(. + s); envelope (2dKs/pi + 4d)/L plus both residuals.
InvarianceReport translation_invariance_check(const SymmetricField& field, const std::vector<double>& shifts,
                                              double horizon, const EstimateParams& params = {});

/// Estimates of B(. + s) against its periodic limit shifted by s, for each
/// restart origin s; envelope (2dK max(transient - s, 0)/pi + 6d)/L plus residuals.
InvarianceReport asymptotic_invariance_check(const SymmetricField& field, double transient,
                                             const std::vector<double>& origins, double horizon,
                                             const EstimateParams& params = {});

struct AdditivityTable {
  int max_n = 0;
  int checked = 0;
  int f_violations = 0;
  int g_violations = 0;
  std::string detail;
};

/// f(B, n + m) <= f(B, n) + f(S^n B, m) and g(B, n + m) >= g(B, n) + g(S^n B, m)
/// for 1 <= n, m <= max_n.
AdditivityTable subadditivity_check(const SymmetricField& field, int max_n = 16, const IndexOptions& options = {},
                                    const PropagationControl& control = {});

}  // namespace hamidx
