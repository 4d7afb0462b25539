#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pure {

// Row-major so embedding rows are contiguous and bind to Ref<const Vec> via transpose().
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Probabilities are clamped to [1e-12, 1 - 1e-12] before any log.
constexpr double kProbFloor = 1e-12;

inline double log_prob(double p) { return std::log(p < kProbFloor ? kProbFloor : p); }

inline double clamp_prob(double p) {
  if (p < kProbFloor) return kProbFloor;
  if (p > 1.0 - kProbFloor) return 1.0 - kProbFloor;
  return p;
}

}  // namespace pure
