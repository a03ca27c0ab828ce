#include "sclc/riccati.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Jacobi>
#include <complex>

#include "sclc/state_space.hpp"

namespace sclc {

namespace {

// Swap the diagonal entries at positions (k, k+1) of the complex Schur form
// T by a unitary similarity, accumulating the rotation into U. Standard
// triangular-block exchange: the eigenvector of [[a,b],[0,c]] for c is
// (b, c-a); a Givens rotation aligning it with e1 swaps the eigenvalues.
void swap_schur_entries(CMat& T, CMat& U, Eigen::Index k) {
  const std::complex<double> a = T(k, k), b = T(k, k + 1), c = T(k + 1, k + 1);
  Eigen::JacobiRotation<std::complex<double>> rot;
  rot.makeGivens(b, c - a);
  // makeGivens(p, q) yields G with G^H (p, q)^T = (r, 0)^T; conjugating T by
  // G^H moves eigenvalue c to position k.
  T.applyOnTheLeft(k, k + 1, rot.adjoint());
  T.applyOnTheRight(k, k + 1, rot);
  U.applyOnTheRight(k, k + 1, rot);
  T(k + 1, k) = 0.0;  // restore exact triangularity
}

}  // namespace

CareResult solve_care(const Mat& A, const Mat& B, const Mat& Q, const Mat& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n) throw ModelError("solve_care: dimension mismatch");
  if (Q.rows() != n || Q.cols() != n) throw ModelError("solve_care: Q must be n x n");
  if (R.rows() != B.cols() || R.cols() != B.cols()) throw ModelError("solve_care: R must be m x m");

  Eigen::LLT<Mat> rllt(R);
  if (rllt.info() != Eigen::Success) throw SynthesisError("solve_care: R is not positive definite");
  const Mat BRinvBt = B * rllt.solve(B.transpose());

  Mat H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = A;
  H.topRightCorner(n, n) = -BRinvBt;
  H.bottomLeftCorner(n, n) = -Q;
  H.bottomRightCorner(n, n) = -A.transpose();

  Eigen::ComplexSchur<CMat> schur(H.cast<std::complex<double>>());
  if (schur.info() != Eigen::Success) throw AnalysisError("solve_care: Schur decomposition failed");
  CMat T = schur.matrixT();
  CMat U = schur.matrixU();

  // Reorder: stable eigenvalues first (selection sort by adjacent swaps).
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index j = k;
    while (j < 2 * n && T(j, j).real() >= 0.0) ++j;
    if (j >= 2 * n)
      throw SynthesisError("solve_care: no stabilizing solution ((A,B) not stabilizable?)");
    for (; j > k; --j) swap_schur_entries(T, U, j - 1);
  }
  for (Eigen::Index k = n; k < 2 * n; ++k) {
    if (T(k, k).real() < 0.0)
      throw SynthesisError("solve_care: Hamiltonian has more than n stable eigenvalues");
  }

  const CMat U1 = U.topLeftCorner(n, n);
  const CMat U2 = U.bottomLeftCorner(n, n);
  Eigen::FullPivLU<CMat> lu(U1);
  if (!lu.isInvertible())
    throw SynthesisError("solve_care: singular invariant-subspace basis");
  Mat P = (U2 * lu.inverse()).real();
  P = 0.5 * (P + P.transpose().eval());

  CareResult out;
  out.P = P;
  out.K = rllt.solve(B.transpose() * P);
  const Mat lhs = A.transpose() * P + P * A - P * BRinvBt * P + Q;
  out.residual = lhs.norm();
  const double scale = A.norm() * P.norm() + Q.norm();
  if (out.residual > 1e-8 * std::max(scale, 1.0))
    throw AnalysisError("solve_care: Riccati residual exceeds conditioning bound");
  if (!is_hurwitz(A - B * out.K))
    throw SynthesisError("solve_care: closed loop not Hurwitz");
  return out;
}

}  // namespace sclc
