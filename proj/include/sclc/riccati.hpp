#pragma once

#include "sclc/types.hpp"

namespace sclc {

struct CareResult {
  Mat P;            // stabilizing solution, symmetric PSD
  Mat K;            // K = R^{-1} B^T P; the stabilizing law is u = -K x
  double residual;  // ||A'P + PA - PBR^{-1}B'P + Q||_F
};

/// Continuous-time algebraic Riccati solve via the ordered Schur
/// decomposition of the 2n x 2n Hamiltonian, selecting the stable invariant
/// subspace. Requires (A,B) stabilizable, Q PSD, R PD.
///
/// Throws SynthesisError when no stabilizing solution exists and
/// AnalysisError when the residual exceeds the conditioning bound.
CareResult solve_care(const Mat& A, const Mat& B, const Mat& Q, const Mat& R);

}  // namespace sclc
