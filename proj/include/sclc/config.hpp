#pragma once

#include <optional>
#include <string>

#include "sclc/controller.hpp"
#include "sclc/margin.hpp"
#include "sclc/plant.hpp"

namespace sclc {

/// Declarative description of a study case: plant matrices, registered
/// nonlinearity and secondary law with their parameter map, LQR weights,
/// optional prestabilizing gain, initial state, horizons and sweep settings.
struct ExampleConfig {
  int example_id = 0;  // 1..3 for the shipped cases, 0 for custom files
  std::string name = "custom";

  Mat A, B;
  std::string nonlinearity = "saturating_square";  // f_ch = v^2 / (1 + a v^2)
  int nl_channel = 0;                              // 0-based state index feeding f
  double nl_a = 0.0;                               // a = 0 degenerates to v^2

  std::string law = "backstepping";  // "backstepping" | "lyapunov"
  double c1 = 0.0, c2 = 0.0, c = 0.0;

  Mat Q, R;
  std::optional<Mat> k0;  // prestabilizing gain, applied before the SCLC design

  Vec x0;
  double T = 20.0;
  double dt = 1e-3;

  SweepConfig sweep;
  TheoreticalSearchConfig theory;
  double eps3 = 0.05, eps4 = 0.05;
};

/// The three shipped configurations.
ExampleConfig example_config(int id);

ExampleConfig parse_config(const std::string& json_text);
ExampleConfig load_config_file(const std::string& path);
std::string serialize_config(const ExampleConfig& cfg);

/// Instantiate the design-model plant (prestabilized when k0 is present).
NonlinearPlant build_plant(const ExampleConfig& cfg);
/// The unprestabilized plant (the JLC baseline designs against this one).
NonlinearPlant build_original_plant(const ExampleConfig& cfg);
/// LQR synthesis on the design model plus the registered secondary law.
SclcController build_controller(const ExampleConfig& cfg, const NonlinearPlant& plant);

}  // namespace sclc
