#pragma once

#include <Eigen/Dense>
#include <complex>

namespace hamidx {

// Half-dimension d is capped at 4, so every matrix fits a fixed-capacity
// buffer and small-matrix kernels never touch the heap.
inline constexpr int kMaxHalfDim = 4;
inline constexpr int kMaxDim = 2 * kMaxHalfDim;

using Complex = std::complex<double>;

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using CVec = Eigen::Matrix<Complex, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

// Orthonormal frame of a Lagrangian subspace of R^{2n} x R^{2n}: columns
// stacked as [X; Y], with the graph of M spanned when Y = M X.
using Frame = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2 * kMaxDim, kMaxDim>;
using CFrame = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2 * kMaxDim, kMaxDim>;
using CSquare2 = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2 * kMaxDim, 2 * kMaxDim>;

/// Standard symplectic matrix J = [[0, -I], [I, 0]] of size 2d.
Mat standard_j(int d);

/// e^{angle J}; the block rotation cos(angle) I + sin(angle) J.
Mat exp_j(int d, double angle);

double max_abs(const Mat& m);

/// Max-norm of M^T J M - J.
double symplectic_residual(const Mat& m);

/// Max-norm of M - M^T.
double symmetry_residual(const Mat& m);

/// One or two Newton-type corrections M <- M (I + J E / 2), E = M^T J M - J.
Mat project_symplectic(const Mat& m);

double operator_norm(const Mat& m);

/// Thin orthonormal basis of the column span of f; R has positive diagonal.
Frame orthonormalize(const Frame& f);

/// Frame of Gr(M) = {(x, M x)}.
Frame graph_frame(const Mat& m);

/// Symplectic inverse -J M^T J.
Mat symplectic_inverse(const Mat& m);

/// Symmetric square root of a symmetric positive definite matrix.
Mat spd_sqrt(const Mat& m);

}  // namespace hamidx
