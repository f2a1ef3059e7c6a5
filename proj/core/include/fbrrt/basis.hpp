#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fbrrt/types.hpp"

namespace fbrrt {

/**
 * Second-order multivariate Chebyshev features on normalized inputs
 * z_j = (x_j - offset_j) / scale_j.
 *
 * Feature order: constant, z_1..z_n, 2 z_1^2 - 1 .. 2 z_n^2 - 1, then the
 * cross products z_i z_j for i < j in lexicographic order.
 */
class ChebyshevBasis {
 public:
  ChebyshevBasis(Vector offset, Vector scale);

  /// Maps the region of interest onto [-1, 1]^n.
  static ChebyshevBasis from_region(const Box& region);
  static int feature_count(int state_dim) {
    return 1 + 2 * state_dim + state_dim * (state_dim - 1) / 2;
  }

  int state_dim() const { return static_cast<int>(offset_.size()); }
  int num_features() const { return feature_count(state_dim()); }
  const Vector& offset() const { return offset_; }
  const Vector& scale() const { return scale_; }

  Vector features(const Vector& x) const;
  /// Writes features of x into row `row` of `out` (no allocation).
  void features_into(const Vector& x, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) const;
  double value(const Vector& alpha, const Vector& x) const;
  /// d/dx of features(x) . alpha, including the 1/scale normalization factor.
  Vector gradient(const Vector& alpha, const Vector& x) const;

  std::vector<std::string> feature_names() const;

 private:
  Vector offset_;
  Vector scale_;
};

/// Per-time-step coefficient vectors alpha_0..alpha_N over one basis.
class ValueModel {
 public:
  ValueModel(ChebyshevBasis basis, int num_steps);

  const ChebyshevBasis& basis() const { return basis_; }
  int num_steps() const { return static_cast<int>(coefficients_.size()) - 1; }
  bool defined(int i) const;
  /// True when no time index holds coefficients.
  bool empty() const;

  void set(int i, Vector alpha);
  void clear(int i);
  const Vector& coefficients(int i) const;

  double value(int i, const Vector& x) const;
  Vector gradient(int i, const Vector& x) const;

 private:
  void check_index(int i) const;

  ChebyshevBasis basis_;
  std::vector<std::optional<Vector>> coefficients_;
};

/// CSV with `#`-prefixed normalization lines, a feature header, then one row per fitted step.
void write_model_csv(std::ostream& out, const ValueModel& model);
ValueModel read_model_csv(std::istream& in);

}  // namespace fbrrt
