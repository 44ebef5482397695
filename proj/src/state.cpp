#include "bfdyn/state.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bfdyn/errors.hpp"

namespace bfdyn {

StateVector::StateVector(JointBasisPtr basis, ComplexVector amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (!basis_) throw std::invalid_argument("state needs a basis");
  if (static_cast<std::size_t>(amplitudes_.size()) != basis_->dimension()) {
    throw BasisMismatchError("amplitude count " + std::to_string(amplitudes_.size()) +
                             " does not match basis dimension " +
                             std::to_string(basis_->dimension()));
  }
}

StateVector StateVector::zero(JointBasisPtr basis) {
  const auto n = static_cast<Eigen::Index>(basis->dimension());
  return StateVector(std::move(basis), ComplexVector::Zero(n));
}

StateVector StateVector::basis_state(JointBasisPtr basis, std::size_t index) {
  StateVector out = zero(std::move(basis));
  out.amplitudes_(static_cast<Eigen::Index>(index)) = 1.0;
  return out;
}

bool StateVector::same_basis(const StateVector& other) const {
  return basis_ == other.basis_ || basis_->hash() == other.basis_->hash();
}

void StateVector::require_same_basis(const StateVector& other) const {
  if (!same_basis(other)) {
    throw BasisMismatchError("states live on different bases: " + basis_->descriptor() +
                             " vs " + other.basis_->descriptor());
  }
}

Complex inner(const StateVector& a, const StateVector& b) {
  a.require_same_basis(b);
  return a.amplitudes().dot(b.amplitudes());
}

double distance(const StateVector& a, const StateVector& b) {
  a.require_same_basis(b);
  return (a.amplitudes() - b.amplitudes()).norm();
}

namespace {

JointBasisPtr shifted_sector(const JointBasis& basis, int delta) {
  const auto& bosons = basis.bosons();
  const int n = bosons.total() + delta;
  if (n < 0) throw InputError("cannot annihilate from the zero-boson sector");
  return make_joint_basis(basis.tracer_modes_ptr(), FockBasis::sector(bosons.modes_ptr(), n));
}

StateVector apply_ladder(const StateVector& state, std::size_t mode, JointBasisPtr target,
                         bool create) {
  const auto& basis = state.basis();
  const auto& bosons = basis.bosons();
  if (mode >= bosons.modes().size()) throw std::out_of_range("mode index out of range");
  if (!bosons.tracks_mode(mode)) {
    throw InputError("mode " + std::to_string(mode) + " is not part of this boson basis");
  }
  if (!target) {
    target = bosons.kind() == FockKind::sector ? shifted_sector(basis, create ? 1 : -1)
                                               : state.basis_ptr();
  }
  if (target->bosons().modes().descriptor() != bosons.modes().descriptor() ||
      target->tracer_modes().descriptor() != basis.tracer_modes().descriptor()) {
    throw BasisMismatchError("ladder target must share tracer and boson modes");
  }

  StateVector out = StateVector::zero(target);
  std::vector<int> occ(bosons.modes().size());
  const std::size_t tracer_count = basis.tracer_modes().size();
  for (std::size_t b = 0; b < bosons.dimension(); ++b) {
    bosons.full_occupation(b, occ);
    const int n = occ[mode];
    if (!create && n == 0) continue;
    occ[mode] = create ? n + 1 : n - 1;
    const double factor = std::sqrt(static_cast<double>(create ? n + 1 : n));
    const auto row = target->bosons().rank(occ);
    for (std::size_t q = 0; q < tracer_count; ++q) {
      const Complex amp = state.amplitudes()(static_cast<Eigen::Index>(basis.index(q, b)));
      if (amp == Complex{}) continue;
      if (!row) {
        throw InputError("ladder operator target leaves the basis (excitation cap reached)");
      }
      out.amplitudes()(static_cast<Eigen::Index>(target->index(q, *row))) += factor * amp;
    }
  }
  return out;
}

}  // namespace

StateVector apply_annihilate(const StateVector& state, std::size_t mode, JointBasisPtr target) {
  return apply_ladder(state, mode, std::move(target), false);
}

StateVector apply_create(const StateVector& state, std::size_t mode, JointBasisPtr target) {
  return apply_ladder(state, mode, std::move(target), true);
}

std::vector<double> number_operator(const JointBasis& basis) {
  std::vector<double> out(basis.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = basis.excitation_count(i);
  return out;
}

std::vector<Momentum> total_momentum(const JointBasis& basis) {
  std::vector<Momentum> out(basis.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = basis.total_momentum(i);
  return out;
}

double expected_excitations(const StateVector& state) {
  double sum = 0.0;
  const auto& basis = state.basis();
  for (std::size_t i = 0; i < state.size(); ++i) {
    sum += basis.excitation_count(i) * std::norm(state.amplitudes()(static_cast<Eigen::Index>(i)));
  }
  return sum;
}

double excitation_weight(const StateVector& state) {
  double sum = 0.0;
  const auto& basis = state.basis();
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double f = basis.excitation_count(i) + 1.0;
    sum += f * f * std::norm(state.amplitudes()(static_cast<Eigen::Index>(i)));
  }
  return sum;
}

std::array<double, kMaxDimension> expected_momentum(const StateVector& state) {
  std::array<double, kMaxDimension> out{};
  const auto& basis = state.basis();
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double w = std::norm(state.amplitudes()(static_cast<Eigen::Index>(i)));
    if (w == 0.0) continue;
    const Momentum p = basis.total_momentum(i);
    for (int a = 0; a < kMaxDimension; ++a) out[a] += w * p.c[a];
  }
  return out;
}

StateVector embed(const StateVector& state, JointBasisPtr target, bool drop_missing) {
  const auto& src = state.basis();
  const auto& src_bosons = src.bosons();
  if (src_bosons.modes().descriptor() != target->bosons().modes().descriptor()) {
    throw BasisMismatchError("embedding requires the same boson mode set");
  }
  StateVector out = StateVector::zero(target);
  std::vector<int> occ(src_bosons.modes().size());
  std::vector<std::optional<std::size_t>> tracer_map(src.tracer_modes().size());
  for (std::size_t q = 0; q < tracer_map.size(); ++q) {
    tracer_map[q] = target->tracer_modes().index_of(src.tracer_modes()[q]);
  }
  for (std::size_t b = 0; b < src_bosons.dimension(); ++b) {
    src_bosons.full_occupation(b, occ);
    const auto row = target->bosons().rank(occ);
    for (std::size_t q = 0; q < tracer_map.size(); ++q) {
      const Complex amp = state.amplitudes()(static_cast<Eigen::Index>(src.index(q, b)));
      if (amp == Complex{}) continue;
      if (!row || !tracer_map[q]) {
        if (drop_missing) continue;
        throw BasisMismatchError("state has weight outside the target basis");
      }
      out.amplitudes()(static_cast<Eigen::Index>(target->index(*tracer_map[q], *row))) = amp;
    }
  }
  return out;
}

void write_state(std::ostream& out, const StateVector& state) {
  out << "bfdyn-state 1\n";
  out << "basis " << hex64(state.basis().hash()) << ' ' << state.basis().descriptor() << '\n';
  out << "dimension " << state.size() << '\n';
  char buf[96];
  for (std::size_t i = 0; i < state.size(); ++i) {
    const Complex a = state.amplitudes()(static_cast<Eigen::Index>(i));
    std::snprintf(buf, sizeof buf, "%a %a\n", a.real(), a.imag());
    out << buf;
  }
}

StateVector read_state(std::istream& in, JointBasisPtr basis) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "bfdyn-state" || version != 1) throw InputError("not a version-1 state checkpoint");
  std::string key, hash;
  in >> key >> hash;
  if (key != "basis") throw InputError("state checkpoint: missing basis line");
  std::string descriptor;
  std::getline(in, descriptor);
  if (hash != hex64(basis->hash())) {
    throw BasisMismatchError("state checkpoint basis hash " + hash + " does not match " +
                             hex64(basis->hash()));
  }
  std::size_t n = 0;
  in >> key >> n;
  if (key != "dimension" || n != basis->dimension()) {
    throw InputError("state checkpoint: dimension mismatch");
  }
  ComplexVector amps(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::string re, im;
    if (!(in >> re >> im)) throw InputError("state checkpoint: truncated amplitude list");
    amps(static_cast<Eigen::Index>(i)) = {std::strtod(re.c_str(), nullptr),
                                          std::strtod(im.c_str(), nullptr)};
  }
  return StateVector(std::move(basis), std::move(amps));
}

}  // namespace bfdyn
