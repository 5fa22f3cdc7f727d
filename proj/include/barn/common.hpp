#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace barn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Every stochastic routine takes its generator explicitly so runs are
/// reproducible from a single seed.
using Rng = std::mt19937_64;

/// Raised when matrix/vector shapes disagree. Carries both sizes.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
      : std::invalid_argument(what + ": expected " + std::to_string(expected) + ", got " +
                              std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

inline void require_size(const char* what, Index expected, Index actual) {
  if (expected != actual) {
    throw DimensionError(what, static_cast<std::size_t>(expected),
                         static_cast<std::size_t>(actual));
  }
}

}  // namespace barn
