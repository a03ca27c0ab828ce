#include "sclc/state_space.hpp"

#include <Eigen/Eigenvalues>
#include <complex>

namespace sclc {

StateSpaceModel::StateSpaceModel(Mat A_, Mat B_, Mat C_, Mat D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
  const auto n = A.rows();
  if (A.cols() != n) throw ModelError("StateSpaceModel: A must be square");
  if (B.rows() != n) throw ModelError("StateSpaceModel: B row count mismatch");
  if (C.cols() != n) throw ModelError("StateSpaceModel: C column count mismatch");
  if (D.rows() != C.rows() || D.cols() != B.cols())
    throw ModelError("StateSpaceModel: D dimension mismatch");
}

StateSpaceModel StateSpaceModel::identity(int m) {
  return StateSpaceModel(Mat::Zero(0, 0), Mat::Zero(0, m), Mat::Zero(m, 0), Mat::Identity(m, m));
}

StateSpaceModel StateSpaceModel::static_gain(const Mat& gain) {
  return StateSpaceModel(Mat::Zero(0, 0), Mat::Zero(0, gain.cols()), Mat::Zero(gain.rows(), 0), gain);
}

bool StateSpaceModel::is_identity() const {
  return order() == 0 && D.rows() == D.cols() && D.isIdentity(0.0);
}

CMat freq_eval(const StateSpaceModel& m, double w) {
  if (m.order() == 0) return m.D.cast<std::complex<double>>();
  const std::complex<double> jw(0.0, w);
  CMat M = -m.A.cast<std::complex<double>>();
  M.diagonal().array() += jw;
  Eigen::FullPivLU<CMat> lu(M);
  if (!lu.isInvertible()) throw PoleOnGridError(w);
  return m.C.cast<std::complex<double>>() * lu.solve(m.B.cast<std::complex<double>>()) +
         m.D.cast<std::complex<double>>();
}

StateSpaceModel series(const StateSpaceModel& first, const StateSpaceModel& second) {
  if (second.inputs() != first.outputs())
    throw ModelError("series: dimension mismatch between stages");
  const int n1 = first.order(), n2 = second.order();
  Mat A = Mat::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = first.A;
  A.bottomLeftCorner(n2, n1) = second.B * first.C;
  A.bottomRightCorner(n2, n2) = second.A;
  Mat B(n1 + n2, first.inputs());
  B.topRows(n1) = first.B;
  B.bottomRows(n2) = second.B * first.D;
  Mat C(second.outputs(), n1 + n2);
  C.leftCols(n1) = second.D * first.C;
  C.rightCols(n2) = second.C;
  return StateSpaceModel(std::move(A), std::move(B), std::move(C), second.D * first.D);
}

bool is_hurwitz(const Mat& A) {
  if (A.rows() == 0) return true;
  if (A.rows() != A.cols()) throw ModelError("is_hurwitz: matrix must be square");
  Eigen::EigenSolver<Mat> es(A, /*computeEigenvectors=*/false);
  return (es.eigenvalues().real().array() < -1e-9).all();
}

Mat jacobian_at_origin(const std::function<Vec(const Vec&)>& f, int n, double h) {
  const Vec f0 = f(Vec::Zero(n));
  if (f0.lpNorm<Eigen::Infinity>() > 1e-12)
    throw ModelError("jacobian_at_origin: f(0) != 0");
  Mat J(n, n);
  for (int j = 0; j < n; ++j) {
    Vec e = Vec::Zero(n);
    e[j] = h;
    J.col(j) = (f(e) - f(-e)) / (2.0 * h);
  }
  return J;
}

}  // namespace sclc
