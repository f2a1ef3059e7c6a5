#include "fbrrt/types.hpp"

#include <stdexcept>

namespace fbrrt {

bool Box::contains(const Vector& x) const {
  if (x.size() != lower.size()) return false;
  return ((x.array() >= lower.array()) && (x.array() <= upper.array())).all();
}

void Box::validate() const {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw std::invalid_argument("box bounds must be nonempty and of equal size");
  }
  if (!lower.allFinite() || !upper.allFinite()) {
    throw std::invalid_argument("box bounds must be finite");
  }
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("box lower bound exceeds upper bound");
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace fbrrt
