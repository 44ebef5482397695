#pragma once

#include <Eigen/Core>
#include <complex>
#include <iosfwd>
#include <vector>

#include "bfdyn/fock_basis.hpp"

namespace bfdyn {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

/// Complex amplitudes over a JointBasis. Binary operations require both
/// operands to carry the same basis descriptor.
class StateVector {
 public:
  StateVector(JointBasisPtr basis, ComplexVector amplitudes);

  static StateVector zero(JointBasisPtr basis);
  static StateVector basis_state(JointBasisPtr basis, std::size_t index);

  const JointBasis& basis() const { return *basis_; }
  const JointBasisPtr& basis_ptr() const { return basis_; }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  ComplexVector& amplitudes() { return amplitudes_; }
  std::size_t size() const { return static_cast<std::size_t>(amplitudes_.size()); }

  double norm() const { return amplitudes_.norm(); }
  bool same_basis(const StateVector& other) const;
  void require_same_basis(const StateVector& other) const;

 private:
  JointBasisPtr basis_;
  ComplexVector amplitudes_;
};

Complex inner(const StateVector& a, const StateVector& b);
double distance(const StateVector& a, const StateVector& b);

/// a_k applied to every boson component. For a sector basis the result lives
/// in the (N-1)-boson sector; an excitation basis maps into itself. `mode`
/// is a ModeSet index and must be tracked by the basis.
StateVector apply_annihilate(const StateVector& state, std::size_t mode,
                             JointBasisPtr target = nullptr);

/// a_k^dagger. For a sector basis the result lives in the (N+1) sector. In an
/// excitation basis a nonzero component that would exceed the cap is an error.
StateVector apply_create(const StateVector& state, std::size_t mode,
                         JointBasisPtr target = nullptr);

/// Diagonal of the excitation number operator over the joint basis.
std::vector<double> number_operator(const JointBasis& basis);
/// Total momentum of every joint basis element.
std::vector<Momentum> total_momentum(const JointBasis& basis);

/// <psi, N+ psi> and ||(N+ + 1) psi||^2.
double expected_excitations(const StateVector& state);
double excitation_weight(const StateVector& state);
/// Expectation of the total momentum vector.
std::array<double, kMaxDimension> expected_momentum(const StateVector& state);

/// Re-expresses a state in another basis over the same modes (for example
/// a larger excitation cap). Components absent from the target must vanish
/// unless `drop_missing` is set, in which case they are discarded.
StateVector embed(const StateVector& state, JointBasisPtr target, bool drop_missing = false);

/// Checkpoint format, version 1:
///   bfdyn-state 1
///   basis <hash> <descriptor>
///   dimension <n>
///   <re> <im>            (n lines, hexadecimal floating point)
void write_state(std::ostream& out, const StateVector& state);
StateVector read_state(std::istream& in, JointBasisPtr basis);

}  // namespace bfdyn
