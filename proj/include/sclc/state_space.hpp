#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sclc/types.hpp"

namespace sclc {

/// Constant-matrix LTI realization y = C x + D u, x' = A x + B u.
/// n = 0 encodes a static gain D.
struct StateSpaceModel {
  Mat A, B, C, D;
  std::vector<std::string> input_labels, output_labels;

  StateSpaceModel() = default;
  StateSpaceModel(Mat A, Mat B, Mat C, Mat D);

  int order() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(D.cols()); }
  int outputs() const { return static_cast<int>(D.rows()); }

  /// n = 0, D = I_m ("no compensator" fast path).
  static StateSpaceModel identity(int m);
  static StateSpaceModel static_gain(const Mat& gain);

  bool is_identity() const;
};

/// G(jw) = C (jwI - A)^{-1} B + D by linear solve (no explicit inverse).
/// Throws PoleOnGridError when jwI - A is singular; callers perturb the
/// grid point.
CMat freq_eval(const StateSpaceModel& model, double w);

/// series(first, second): u -> first -> second -> y.
StateSpaceModel series(const StateSpaceModel& first, const StateSpaceModel& second);

/// true iff all eigenvalues have real part < -1e-9. A 0x0 matrix is Hurwitz.
bool is_hurwitz(const Mat& A);

/// Central finite differences at the origin; requires f(0) = 0 within 1e-12.
Mat jacobian_at_origin(const std::function<Vec(const Vec&)>& f, int n, double h = 1e-6);

}  // namespace sclc
