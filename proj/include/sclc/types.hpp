#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace sclc {

using Vec  = Eigen::VectorXd;
using Mat  = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// State norm beyond which a trajectory is declared divergent.
inline constexpr double kDivergenceThreshold = 1e8;

/// Configuration / input-file problems (CLI exit code 3).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical analysis failures: singular resolvents, failed syntheses,
/// unstable wirings (CLI exit code 2).
class AnalysisError : public std::runtime_error {
 public:
  explicit AnalysisError(const std::string& what) : std::runtime_error(what) {}
};

class PoleOnGridError : public AnalysisError {
 public:
  explicit PoleOnGridError(double omega)
      : AnalysisError("pole on grid: resolvent singular at omega = " + std::to_string(omega)),
        omega(omega) {}
  double omega;
};

class SynthesisError : public AnalysisError {
 public:
  explicit SynthesisError(const std::string& what) : AnalysisError(what) {}
};

class ModelError : public AnalysisError {
 public:
  explicit ModelError(const std::string& what) : AnalysisError(what) {}
};

}  // namespace sclc
