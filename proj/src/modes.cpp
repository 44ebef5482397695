#include "bfdyn/modes.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "bfdyn/errors.hpp"

namespace bfdyn {

int Momentum::max_norm() const {
  return std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2])});
}

std::string Momentum::to_string(int dim) const {
  std::string out = "(";
  for (int i = 0; i < dim; ++i) {
    if (i > 0) out += ",";
    out += std::to_string(c[i]);
  }
  return out + ")";
}

double kinetic_energy(const Momentum& k) {
  return 4.0 * std::numbers::pi * std::numbers::pi * k.norm_sq();
}

ModeSet::ModeSet(int dim, int cutoff, std::size_t mode_limit) : dim_(dim), cutoff_(cutoff) {
  if (dim < 1 || dim > kMaxDimension) {
    throw InputError("spatial dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  if (cutoff < 0) throw InputError("mode cutoff must be nonnegative");
  const double count = std::pow(2.0 * cutoff + 1.0, dim);
  if (count > static_cast<double>(mode_limit)) {
    throw DimensionLimitError("mode set of " + std::to_string(static_cast<long long>(count)) +
                                  " modes exceeds the limit " + std::to_string(mode_limit),
                              count);
  }

  const int side = 2 * cutoff + 1;
  const std::size_t n = static_cast<std::size_t>(count);
  modes_.reserve(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    Momentum k;
    std::size_t rest = idx;
    for (int axis = dim - 1; axis >= 0; --axis) {
      k.c[axis] = static_cast<int>(rest % side) - cutoff;
      rest /= side;
    }
    if (k.is_zero()) zero_index_ = idx;
    modes_.push_back(k);
  }
}

std::optional<std::size_t> ModeSet::index_of(const Momentum& k) const {
  const int side = 2 * cutoff_ + 1;
  std::size_t idx = 0;
  for (int axis = 0; axis < kMaxDimension; ++axis) {
    if (axis >= dim_) {
      if (k.c[axis] != 0) return std::nullopt;
      continue;
    }
    if (std::abs(k.c[axis]) > cutoff_) return std::nullopt;
    idx = idx * side + static_cast<std::size_t>(k.c[axis] + cutoff_);
  }
  return idx;
}

std::vector<std::size_t> ModeSet::excited_modes() const {
  std::vector<std::size_t> out;
  out.reserve(modes_.size() - 1);
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (i != zero_index_) out.push_back(i);
  }
  return out;
}

std::string ModeSet::descriptor() const {
  std::ostringstream os;
  os << "modes(d=" << dim_ << ",cutoff=" << cutoff_ << ")";
  return os.str();
}

ModeSetPtr build_mode_set(int dim, int cutoff, std::size_t mode_limit) {
  return std::make_shared<const ModeSet>(dim, cutoff, mode_limit);
}

double ModelParams::tracer_coupling() const { return 1.0 / std::sqrt(static_cast<double>(n_bosons)); }

void ModelParams::validate() const {
  if (n_bosons < 1) throw InputError("boson number must be positive");
  if (!(tracer_mass > 0.0) || !std::isfinite(tracer_mass)) {
    throw InputError("tracer mass must be positive and finite");
  }
  if (tracer_cutoff < 0) throw InputError("tracer cutoff must be nonnegative");
}

}  // namespace bfdyn
