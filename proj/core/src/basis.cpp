#include "fbrrt/basis.hpp"

#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fbrrt {

ChebyshevBasis::ChebyshevBasis(Vector offset, Vector scale)
    : offset_(std::move(offset)), scale_(std::move(scale)) {
  if (offset_.size() == 0 || offset_.size() != scale_.size()) {
    throw std::invalid_argument("basis offset and scale must be nonempty and of equal size");
  }
  if (!offset_.allFinite() || !scale_.allFinite() || (scale_.array() <= 0.0).any()) {
    throw std::invalid_argument("basis scale must be finite and strictly positive");
  }
}

ChebyshevBasis ChebyshevBasis::from_region(const Box& region) {
  region.validate();
  return ChebyshevBasis(region.center(), region.half_width());
}

void ChebyshevBasis::features_into(const Vector& x,
                                   Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) const {
  const int n = state_dim();
  if (x.size() != n) throw std::invalid_argument("features: state has wrong dimension");
  if (!x.allFinite()) throw std::invalid_argument("features: non-finite state");
  const Vector z = (x - offset_).cwiseQuotient(scale_);
  out(0) = 1.0;
  for (int j = 0; j < n; ++j) {
    out(1 + j) = z(j);
    out(1 + n + j) = 2.0 * z(j) * z(j) - 1.0;
  }
  int col = 1 + 2 * n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) out(col++) = z(i) * z(j);
  }
}

Vector ChebyshevBasis::features(const Vector& x) const {
  Eigen::RowVectorXd row(num_features());
  features_into(x, row);
  return row.transpose();
}

double ChebyshevBasis::value(const Vector& alpha, const Vector& x) const {
  return features(x).dot(alpha);
}

Vector ChebyshevBasis::gradient(const Vector& alpha, const Vector& x) const {
  const int n = state_dim();
  if (alpha.size() != num_features()) {
    throw std::invalid_argument("gradient: coefficient vector has wrong length");
  }
  if (x.size() != n || !x.allFinite()) {
    throw std::invalid_argument("gradient: state must be finite with matching dimension");
  }
  const Vector z = (x - offset_).cwiseQuotient(scale_);
  Vector dz(n);
  for (int j = 0; j < n; ++j) dz(j) = alpha(1 + j) + 4.0 * z(j) * alpha(1 + n + j);
  int col = 1 + 2 * n;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      dz(i) += alpha(col) * z(j);
      dz(j) += alpha(col) * z(i);
      ++col;
    }
  }
  return dz.cwiseQuotient(scale_);
}

std::vector<std::string> ChebyshevBasis::feature_names() const {
  const int n = state_dim();
  std::vector<std::string> names{"1"};
  for (int j = 0; j < n; ++j) names.push_back("z" + std::to_string(j + 1));
  for (int j = 0; j < n; ++j) names.push_back("T2(z" + std::to_string(j + 1) + ")");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      names.push_back("z" + std::to_string(i + 1) + "*z" + std::to_string(j + 1));
    }
  }
  return names;
}

ValueModel::ValueModel(ChebyshevBasis basis, int num_steps)
    : basis_(std::move(basis)), coefficients_(static_cast<std::size_t>(num_steps) + 1) {
  if (num_steps < 1) throw std::invalid_argument("value model needs at least one step");
}

void ValueModel::check_index(int i) const {
  if (i < 0 || i > num_steps()) {
    throw std::out_of_range("value model: time index " + std::to_string(i) + " out of range");
  }
}

bool ValueModel::defined(int i) const {
  return i >= 0 && i <= num_steps() && coefficients_[static_cast<std::size_t>(i)].has_value();
}

bool ValueModel::empty() const {
  for (const auto& c : coefficients_) {
    if (c) return false;
  }
  return true;
}

void ValueModel::set(int i, Vector alpha) {
  check_index(i);
  if (alpha.size() != basis_.num_features()) {
    throw std::invalid_argument("value model: coefficient vector has wrong length");
  }
  if (!alpha.allFinite()) {
    throw std::invalid_argument("value model: non-finite coefficients at step " +
                                std::to_string(i));
  }
  coefficients_[static_cast<std::size_t>(i)] = std::move(alpha);
}

void ValueModel::clear(int i) {
  check_index(i);
  coefficients_[static_cast<std::size_t>(i)].reset();
}

const Vector& ValueModel::coefficients(int i) const {
  check_index(i);
  const auto& c = coefficients_[static_cast<std::size_t>(i)];
  if (!c) {
    throw std::out_of_range("value model: no coefficients at time index " + std::to_string(i));
  }
  return *c;
}

double ValueModel::value(int i, const Vector& x) const {
  return basis_.value(coefficients(i), x);
}

Vector ValueModel::gradient(int i, const Vector& x) const {
  return basis_.gradient(coefficients(i), x);
}

namespace {

void write_row(std::ostream& out, const std::string& label, const Vector& v) {
  out << label;
  for (Eigen::Index j = 0; j < v.size(); ++j) out << ',' << v(j);
}

std::vector<double> parse_doubles(const std::string& line, std::size_t skip_fields) {
  std::vector<double> values;
  std::stringstream ss(line);
  std::string field;
  std::size_t index = 0;
  while (std::getline(ss, field, ',')) {
    if (index++ < skip_fields) continue;
    values.push_back(std::stod(field));
  }
  return values;
}

Vector to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void write_model_csv(std::ostream& out, const ValueModel& model) {
  const auto precision = out.precision(std::numeric_limits<double>::max_digits10);
  const ChebyshevBasis& basis = model.basis();
  write_row(out, "#offset", basis.offset());
  out << '\n';
  write_row(out, "#scale", basis.scale());
  out << '\n';
  out << "#steps," << model.num_steps() << '\n';
  out << "step";
  for (const auto& name : basis.feature_names()) out << ',' << name;
  out << '\n';
  for (int i = 0; i <= model.num_steps(); ++i) {
    if (!model.defined(i)) continue;
    write_row(out, std::to_string(i), model.coefficients(i));
    out << '\n';
  }
  out.precision(precision);
}

ValueModel read_model_csv(std::istream& in) {
  std::string line;
  std::optional<Vector> offset, scale;
  int steps = -1;
  while (in.peek() == '#' && std::getline(in, line)) {
    if (line.rfind("#offset,", 0) == 0) offset = to_vector(parse_doubles(line, 1));
    if (line.rfind("#scale,", 0) == 0) scale = to_vector(parse_doubles(line, 1));
    if (line.rfind("#steps,", 0) == 0) steps = std::stoi(line.substr(7));
  }
  if (!offset || !scale || steps < 1) {
    throw std::runtime_error("model csv: missing #offset, #scale or #steps line");
  }
  ValueModel model(ChebyshevBasis(*offset, *scale), steps);
  if (!std::getline(in, line) || line.rfind("step", 0) != 0) {
    throw std::runtime_error("model csv: missing feature header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const int step = std::stoi(line.substr(0, comma));
    model.set(step, to_vector(parse_doubles(line, 1)));
  }
  return model;
}

}  // namespace fbrrt
