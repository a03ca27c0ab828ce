#include "sclc/plant.hpp"

#include "sclc/controller.hpp"
#include "sclc/riccati.hpp"

namespace sclc {

NonlinearPlant prestabilize(const NonlinearPlant& plant, const Mat& k0) {
  if (k0.rows() != plant.m() || k0.cols() != plant.n())
    throw ModelError("prestabilize: k0 must be m x n");
  const Mat Abar = plant.A - plant.B * k0;
  if (!is_hurwitz(Abar)) throw SynthesisError("prestabilize: A - B k0 is not Hurwitz");
  NonlinearPlant out(Abar, plant.B, plant.f, plant.name + "+prestab");
  out.prestab_gain = plant.prestab_gain + k0;
  return out;
}

LinearLaw jlc_controller(const NonlinearPlant& plant, const Mat& Q, const Mat& R) {
  const Mat A_lin = plant.A + jacobian_at_origin(plant.f, plant.n());
  return LinearLaw{solve_care(A_lin, plant.B, Q, R).K};
}

}  // namespace sclc
