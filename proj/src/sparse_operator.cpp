#include "bfdyn/sparse_operator.hpp"

#include <cmath>

#include "bfdyn/errors.hpp"

namespace bfdyn {

namespace {

void prune(SparseMatrix& m) {
  m.prune([](Eigen::Index, Eigen::Index, const Complex& v) {
    return std::abs(v) >= kPruneThreshold;
  });
  m.makeCompressed();
}

}  // namespace

double max_abs_entry(const SparseMatrix& m) {
  double out = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

double frobenius_norm(const SparseMatrix& m) {
  double sum = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) sum += std::norm(it.value());
  }
  return std::sqrt(sum);
}

double relative_frobenius_deviation(const SparseMatrix& a, const SparseMatrix& b) {
  const SparseMatrix diff = a - b;
  const double scale = std::max(frobenius_norm(a), frobenius_norm(b));
  const double dev = frobenius_norm(diff);
  if (scale == 0.0) return dev;
  return dev / scale;
}

SparseOperator::SparseOperator(JointBasisPtr domain, JointBasisPtr codomain, SparseMatrix matrix)
    : domain_(std::move(domain)), codomain_(std::move(codomain)), matrix_(std::move(matrix)) {
  if (static_cast<std::size_t>(matrix_.cols()) != domain_->dimension() ||
      static_cast<std::size_t>(matrix_.rows()) != codomain_->dimension()) {
    throw BasisMismatchError("operator shape does not match its bases");
  }
  prune(matrix_);
}

SparseOperator SparseOperator::zero(JointBasisPtr basis) {
  const auto n = static_cast<Eigen::Index>(basis->dimension());
  return SparseOperator(basis, basis, SparseMatrix(n, n));
}

SparseOperator SparseOperator::identity(JointBasisPtr basis) {
  const auto n = static_cast<Eigen::Index>(basis->dimension());
  SparseMatrix m(n, n);
  m.setIdentity();
  return SparseOperator(basis, basis, std::move(m));
}

StateVector SparseOperator::apply(const StateVector& state) const {
  if (state.basis().hash() != domain_->hash()) {
    throw BasisMismatchError("operator domain " + domain_->descriptor() +
                             " does not match state basis " + state.basis().descriptor());
  }
  return StateVector(codomain_, matrix_ * state.amplitudes());
}

SparseOperator SparseOperator::adjoint() const {
  return SparseOperator(codomain_, domain_, SparseMatrix(matrix_.adjoint()));
}

void SparseOperator::require_compatible(const SparseOperator& other) const {
  if (domain_->hash() != other.domain_->hash() || codomain_->hash() != other.codomain_->hash()) {
    throw BasisMismatchError("operators act between different bases");
  }
}

SparseOperator& SparseOperator::operator+=(const SparseOperator& other) {
  require_compatible(other);
  matrix_ += other.matrix_;
  prune(matrix_);
  return *this;
}

SparseOperator& SparseOperator::operator-=(const SparseOperator& other) {
  require_compatible(other);
  matrix_ -= other.matrix_;
  prune(matrix_);
  return *this;
}

SparseOperator& SparseOperator::operator*=(Complex factor) {
  matrix_ *= factor;
  prune(matrix_);
  return *this;
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  if (a.domain_->hash() != b.codomain_->hash()) {
    throw BasisMismatchError("composition of operators with mismatched bases");
  }
  SparseMatrix product = a.matrix_ * b.matrix_;
  return SparseOperator(b.domain_, a.codomain_, std::move(product));
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) {
  return a * b - b * a;
}

SparseHermitianOperator::SparseHermitianOperator(SparseOperator op) : op_(std::move(op)) {
  if (!op_.is_square()) throw BasisMismatchError("Hermitian operator must be square");
  const SparseMatrix diff = op_.matrix() - SparseMatrix(op_.matrix().adjoint());
  deviation_ = max_abs_entry(diff);
  if (deviation_ > kHermiticityTolerance) {
    throw HermiticityError("assembled operator is not Hermitian (max |A - A^dagger| = " +
                               std::to_string(deviation_) + ")",
                           deviation_);
  }
}

double SparseHermitianOperator::expectation(const StateVector& state) const {
  return inner(state, apply(state)).real();
}

}  // namespace bfdyn
