#include "linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

namespace hamidx {

Mat standard_j(int d) {
  Mat j = Mat::Zero(2 * d, 2 * d);
  for (int i = 0; i < d; ++i) {
    j(i, d + i) = -1.0;
    j(d + i, i) = 1.0;
  }
  return j;
}

Mat exp_j(int d, double angle) {
  Mat r = std::cos(angle) * Mat::Identity(2 * d, 2 * d);
  r += std::sin(angle) * standard_j(d);
  return r;
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double symplectic_residual(const Mat& m) {
  const Mat j = standard_j(static_cast<int>(m.rows()) / 2);
  return max_abs(m.transpose() * j * m - j);
}

double symmetry_residual(const Mat& m) { return max_abs(m - m.transpose()); }

Mat project_symplectic(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  const Mat j = standard_j(n / 2);
  Mat out = m;
  for (int it = 0; it < 2; ++it) {
    const Mat e = out.transpose() * j * out - j;
    if (max_abs(e) < 1e-15) break;
    out = out * (Mat::Identity(n, n) + 0.5 * j * e);
  }
  return out;
}

double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

Frame orthonormalize(const Frame& f) {
  Eigen::HouseholderQR<Frame> qr(f);
  const auto cols = f.cols();
  Frame q = qr.householderQ() * Frame::Identity(f.rows(), cols);
  const auto& r = qr.matrixQR();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  }
  return q;
}

Frame graph_frame(const Mat& m) {
  const auto n = m.rows();
  Frame f(2 * n, n);
  f.topRows(n) = Mat::Identity(n, n);
  f.bottomRows(n) = m;
  return orthonormalize(f);
}

Mat symplectic_inverse(const Mat& m) {
  const Mat j = standard_j(static_cast<int>(m.rows()) / 2);
  return -j * m.transpose() * j;
}

Mat spd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  return es.operatorSqrt();
}

}  // namespace hamidx
