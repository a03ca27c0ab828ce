#pragma once

#include <functional>
#include <string>
#include <utility>

#include "sclc/state_space.hpp"
#include "sclc/types.hpp"

namespace sclc {

/// x' = A x + f(x) + B mu with f(0) = 0.
struct NonlinearPlant {
  Mat A, B;
  std::function<Vec(const Vec&)> f;
  std::string name;
  Mat prestab_gain;  // k0 applied inside: total physical input is mu - k0 x

  NonlinearPlant(Mat A_, Mat B_, std::function<Vec(const Vec&)> f_, std::string name_ = "plant")
      : A(std::move(A_)), B(std::move(B_)), f(std::move(f_)), name(std::move(name_)) {
    if (A.rows() != A.cols() || B.rows() != A.rows())
      throw ModelError("NonlinearPlant: inconsistent dimensions");
    const Vec f0 = f(Vec::Zero(A.rows()));
    if (f0.size() != A.rows()) throw ModelError("NonlinearPlant: f output dimension mismatch");
    if (f0.lpNorm<Eigen::Infinity>() > 1e-12) throw ModelError("NonlinearPlant: f(0) != 0");
    prestab_gain = Mat::Zero(B.cols(), A.rows());
  }

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
};

/// Stability-margin gauge at the plant input: mu = (I + Delta) u.
struct Perturbation {
  enum class Kind { None, Gain, Delay };
  Kind kind = Kind::None;
  Vec values;  // per-channel gamma_i or tau_i

  static Perturbation none() { return {}; }
  static Perturbation gain(Vec g) {
    if (!g.allFinite()) throw ModelError("Perturbation: gain entries must be finite");
    return {Kind::Gain, std::move(g)};
  }
  static Perturbation delay(Vec tau) {
    if ((tau.array() < 0.0).any()) throw ModelError("Perturbation: delays must be >= 0");
    return {Kind::Delay, std::move(tau)};
  }
  /// Uniform value on every channel.
  static Perturbation uniform_gain(double g, int m) { return gain(Vec::Constant(m, g)); }
  static Perturbation uniform_delay(double tau, int m) { return delay(Vec::Constant(m, tau)); }
};

/// Wrap an unstable plant with an inner loop k0 so the design model
/// A - B k0 is Hurwitz. The returned plant accumulates k0 so callers can
/// reconstruct the physically applied input.
NonlinearPlant prestabilize(const NonlinearPlant& plant, const Mat& k0);

}  // namespace sclc
