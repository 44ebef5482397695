#pragma once

#include <vector>

#include "bfdyn/ladder_words.hpp"
#include "bfdyn/potential.hpp"

namespace bfdyn {

/// Everything that defines one truncated tracer-plus-bosons model.
struct Model {
  ModeSetPtr modes;         // boson plane waves
  ModeSetPtr tracer_modes;  // tracer plane waves
  Potential pair;           // V
  Potential tracer;         // W
  ModelParams params;

  static Model make(ModeSetPtr modes, Potential pair, Potential tracer, ModelParams params);
  Model with_bosons(int n) const;
  int n_bosons() const { return params.n_bosons; }
};

/// L2(T^d) (x) symmetric N-boson space.
JointBasisPtr sector_space(const Model& model);
/// L2(T^d) (x) excitation Fock space capped at `cap` excitations.
JointBasisPtr excitation_space(const Model& model, int cap);

/// Individual second-quantized building blocks. None of them carries a
/// coupling constant; plane-wave matrix elements are
///   V_{jklm} = V^(k_j - k_m) delta(k_j + k_k = k_l + k_m),
///   (W_x)_{jk} = W^(k_k - k_j) exp(2 pi i (k_k - k_j) x).
/// Sums run over the modes the basis tracks (all modes for a sector basis,
/// nonzero modes for an excitation basis).
namespace terms {

/// -(1/2m) Laplacian on the tracer plus dGamma(-Laplacian).
SparseOperator kinetic(const JointBasisPtr& basis, double tracer_mass);
/// Tracer kinetic energy only.
SparseOperator tracer_kinetic(const JointBasisPtr& basis, double tracer_mass);
/// dGamma(-Laplacian) only.
SparseOperator boson_kinetic(const JointBasisPtr& basis);

/// sum_{jklm} V_{jklm} a_j^* a_k^* a_l a_m.
std::vector<OperatorWord> pair_interaction_words(const FockBasis& bosons, const Potential& v);
SparseOperator pair_interaction(const JointBasisPtr& basis, const Potential& v);

/// sum_{jk} (W_x)_{jk} a_j^* a_k.
std::vector<OperatorWord> tracer_interaction_words(const FockBasis& bosons, const Potential& w);
SparseOperator tracer_interaction(const JointBasisPtr& basis, const Potential& w);

enum class ExchangeOrdering {
  printed,          // 2 sum V_{j0k0} a_j^* (N - N+) a_k
  normal_ordered,   // 2 sum V_{j0k0} a_j^* (N - N+ - 1) a_k, the exact conjugate
};

// Excitation-space terms; `n_bosons` enters only through condensate factors.
SparseOperator condensate_exchange(const JointBasisPtr& basis, const Potential& v, int n_bosons,
                                   ExchangeOrdering ordering, CondensateFactors factors = CondensateFactors::exact);
/// sum V_{jk00} a_j^* sqrt(N-N+) a_k^* sqrt(N-N+); without factors when n_bosons == 0.
SparseOperator pair_creation(const JointBasisPtr& basis, const Potential& v, int n_bosons,
                             CondensateFactors factors = CondensateFactors::exact);
/// sum V_{00jk} sqrt(N-N+) a_j sqrt(N-N+) a_k; without factors when n_bosons == 0.
SparseOperator pair_annihilation(const JointBasisPtr& basis, const Potential& v, int n_bosons,
                                 CondensateFactors factors = CondensateFactors::exact);
/// 2 sum V_{jkl0} a_j^* sqrt(N-N+) a_k^* a_l.
SparseOperator cubic_creation(const JointBasisPtr& basis, const Potential& v, int n_bosons);
/// 2 sum V_{0jkl} a_j^* a_k sqrt(N-N+) a_l.
SparseOperator cubic_annihilation(const JointBasisPtr& basis, const Potential& v, int n_bosons);
/// sum over excited modes V_{jklm} a_j^* a_k^* a_l a_m.
SparseOperator quartic(const JointBasisPtr& basis, const Potential& v);
/// a^*(W_x) sqrt(N-N+); plain a^*(W_x) when n_bosons == 0.
SparseOperator field_creation(const JointBasisPtr& basis, const Potential& w, int n_bosons,
                              CondensateFactors factors = CondensateFactors::exact);
/// sqrt(N-N+) a(W_x); plain a(W_x) when n_bosons == 0.
SparseOperator field_annihilation(const JointBasisPtr& basis, const Potential& w, int n_bosons,
                                  CondensateFactors factors = CondensateFactors::exact);
/// dGamma(Q W_x Q).
SparseOperator field_scattering(const JointBasisPtr& basis, const Potential& w);
/// 2 sum V_{j0k0} a_j^* a_k, the mean-field exchange of the quadratic theory.
SparseOperator mean_field_exchange(const JointBasisPtr& basis, const Potential& v);

/// N+ and the total-momentum components as diagonal operators.
SparseOperator excitation_number(const JointBasisPtr& basis);
SparseOperator momentum_component(const JointBasisPtr& basis, int axis);

}  // namespace terms

/// Full N-boson Hamiltonian with tracer on the sector space.
SparseHermitianOperator assemble_full(const Model& model);

/// Coefficient-preserving relabeling from the N-sector to excitations <= N.
SparseOperator assemble_u_map(const JointBasisPtr& sector, const JointBasisPtr& excitations);

/// Quadratic auxiliary Hamiltonian on excitations <= N, condensate factors
/// placed as in its defining expression. With frozen factors every
/// sqrt(1 - N+/N) is replaced by one.
SparseHermitianOperator assemble_aux(const Model& model, CondensateFactors factors = CondensateFactors::exact);

/// Quadratic Bogoliubov Hamiltonian on excitations <= cap. A tracer mode set
/// may be supplied; the default is a single tracer momentum q = 0.
SparseHermitianOperator assemble_bog(const ModeSetPtr& modes, const Potential& v, int cap,
                                     ModeSetPtr tracer_modes = nullptr);

/// Bogoliubov-Froehlich Hamiltonian on excitations <= cap.
SparseHermitianOperator assemble_bf(const Model& model, int cap);

/// dGamma(Q W_x Q) on any excitation joint basis.
SparseHermitianOperator assemble_dgamma_w(const Potential& w, const JointBasisPtr& basis);

}  // namespace bfdyn
