#pragma once

#include "bfdyn/blocks.hpp"

namespace bfdyn {

struct PropagationConfig {
  double time = 0.0;
  double tolerance = 1e-9;  // per unit time
  int krylov_dim = 40;
  int max_substeps = 100000;

  void validate() const;
};

struct PropagationStats {
  int substeps = 0;
  long matvecs = 0;
  double error_estimate = 0.0;  // accumulated local estimates
};

/// psi(t) = exp(-iHt) psi0 by short-iterative Lanczos with adaptive substeps.
StateVector evolve(const SparseHermitianOperator& h, const StateVector& psi0,
                   const PropagationConfig& cfg, PropagationStats* stats = nullptr);

/// Same on a raw Hermitian matrix; used for blocks and random test operators.
ComplexVector evolve_vector(const SparseMatrix& h, const ComplexVector& psi0,
                            const PropagationConfig& cfg, PropagationStats* stats = nullptr);

/// Dense oracle: full eigendecomposition, then phases. Dimension <= 4000.
inline constexpr std::size_t kDenseLimit = 4000;
StateVector dense_expm(const SparseHermitianOperator& h, const StateVector& psi0, double t);
ComplexVector dense_expm_vector(const SparseMatrix& h, const ComplexVector& psi0, double t);

/// Evolves each momentum block separately and recombines.
StateVector evolve_blocked(const BlockDecomposition& blocks, const StateVector& psi0,
                           const PropagationConfig& cfg, PropagationStats* stats = nullptr);

}  // namespace bfdyn
