#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace fbrrt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box, used for control bounds and regions of interest.
struct Box {
  Vector lower;
  Vector upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vector& x) const;
  Vector center() const { return 0.5 * (lower + upper); }
  Vector half_width() const { return 0.5 * (upper - lower); }
  /// Throws std::invalid_argument unless lower <= upper componentwise.
  void validate() const;
};

using Rng = std::mt19937_64;

/// Independent stream seed for (base, stream); splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

inline Rng make_rng(std::uint64_t base, std::uint64_t stream) {
  return Rng(derive_seed(base, stream));
}

}  // namespace fbrrt
