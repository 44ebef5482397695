#pragma once

#include <Eigen/SparseCore>

#include "bfdyn/state.hpp"

namespace bfdyn {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Entries with modulus below this are removed after every assembly step.
inline constexpr double kPruneThreshold = 1e-15;

double max_abs_entry(const SparseMatrix& m);
double frobenius_norm(const SparseMatrix& m);
/// ||a - b||_F / max(||a||_F, ||b||_F), or 0 when both vanish.
double relative_frobenius_deviation(const SparseMatrix& a, const SparseMatrix& b);

/// Sparse linear map between two joint bases.
class SparseOperator {
 public:
  SparseOperator(JointBasisPtr domain, JointBasisPtr codomain, SparseMatrix matrix);
  static SparseOperator zero(JointBasisPtr basis);
  static SparseOperator identity(JointBasisPtr basis);

  const JointBasis& domain() const { return *domain_; }
  const JointBasis& codomain() const { return *codomain_; }
  const JointBasisPtr& domain_ptr() const { return domain_; }
  const JointBasisPtr& codomain_ptr() const { return codomain_; }
  const SparseMatrix& matrix() const { return matrix_; }
  std::size_t nonzeros() const { return static_cast<std::size_t>(matrix_.nonZeros()); }
  bool is_square() const { return domain_->hash() == codomain_->hash(); }

  StateVector apply(const StateVector& state) const;
  SparseOperator adjoint() const;

  SparseOperator& operator+=(const SparseOperator& other);
  SparseOperator& operator-=(const SparseOperator& other);
  SparseOperator& operator*=(Complex factor);

  friend SparseOperator operator+(SparseOperator a, const SparseOperator& b) { return a += b; }
  friend SparseOperator operator-(SparseOperator a, const SparseOperator& b) { return a -= b; }
  friend SparseOperator operator*(Complex s, SparseOperator a) { return a *= s; }
  /// Composition: (a * b) applies b first.
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);

 private:
  void require_compatible(const SparseOperator& other) const;

  JointBasisPtr domain_;
  JointBasisPtr codomain_;
  SparseMatrix matrix_;
};

/// [a, b] = ab - ba for square operators on one basis.
SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);

/// Square operator whose Hermiticity was certified at construction.
class SparseHermitianOperator {
 public:
  static constexpr double kHermiticityTolerance = 1e-12;

  /// Throws HermiticityError if max |A - A^dagger| exceeds the tolerance.
  explicit SparseHermitianOperator(SparseOperator op);

  const JointBasis& basis() const { return op_.domain(); }
  const JointBasisPtr& basis_ptr() const { return op_.domain_ptr(); }
  const SparseMatrix& matrix() const { return op_.matrix(); }
  const SparseOperator& as_operator() const { return op_; }
  std::size_t dimension() const { return op_.domain().dimension(); }
  double hermiticity_deviation() const { return deviation_; }

  StateVector apply(const StateVector& state) const { return op_.apply(state); }
  double expectation(const StateVector& state) const;

 private:
  SparseOperator op_;
  double deviation_;
};

}  // namespace bfdyn
