#pragma once

#include <functional>
#include <string>
#include <utility>

#include "sclc/plant.hpp"
#include "sclc/state_space.hpp"
#include "sclc/types.hpp"

namespace sclc {

/// Secondary control law u_s = L(xp_hat, xs_hat). Must vanish at the origin.
struct SecondaryLaw {
  std::string name;
  std::function<Vec(const Vec& xp_hat, const Vec& xs_hat)> fn;

  SecondaryLaw() = default;
  SecondaryLaw(std::string name_, std::function<Vec(const Vec&, const Vec&)> fn_, int n)
      : name(std::move(name_)), fn(std::move(fn_)) {
    const Vec z = Vec::Zero(n);
    if (fn(z, z).lpNorm<Eigen::Infinity>() > 1e-12)
      throw ModelError("SecondaryLaw: L(0,0) != 0");
  }
};

/// Composed controller: primary u_p = -H(K xp_hat) through the series
/// compensator H(s) plus the secondary law, driven by the additive-state
/// observer. The minus sign is the artifact's convention; the stored K is
/// the positive LQR gain.
struct SclcController {
  Mat K;               // m x n primary feedback gain
  StateSpaceModel H;   // m x m stable compensator; identity() short-circuits
  SecondaryLaw secondary;

  SclcController(Mat K_, StateSpaceModel H_, SecondaryLaw law)
      : K(std::move(K_)), H(std::move(H_)), secondary(std::move(law)) {
    if (H.order() > 0 && !is_hurwitz(H.A)) throw ModelError("SclcController: H(s) must be stable");
    if (H.inputs() != K.rows() || H.outputs() != K.rows())
      throw ModelError("SclcController: H dimension mismatch with K");
  }

  int n() const { return static_cast<int>(K.cols()); }
  int m() const { return static_cast<int>(K.rows()); }
};

/// Baseline: LQR on the Jacobian linearization at the origin, u = -K x.
struct LinearLaw {
  Mat K;
};

LinearLaw jlc_controller(const NonlinearPlant& plant, const Mat& Q, const Mat& R);

}  // namespace sclc
