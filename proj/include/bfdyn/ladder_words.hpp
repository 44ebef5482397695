#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bfdyn/sparse_operator.hpp"

namespace bfdyn {

enum class Step : std::uint8_t {
  create,                // a_k^dagger
  annihilate,            // a_k
  sqrt_condensate,       // sqrt(N - N+), zero when N+ > N
  condensate,            // N - N+
  condensate_minus_one,  // N - N+ - 1
};

struct LadderStep {
  Step kind;
  std::uint16_t mode = 0;  // ModeSet index, ignored for condensate factors
};

/// coefficient * T(shift) * s_1 s_2 ... s_n, where T shifts the tracer
/// momentum. Steps are written in operator order and act right to left.
/// N+ inside condensate factors is the excitation count of the occupation
/// the factor acts on.
struct OperatorWord {
  Complex coefficient;
  Momentum tracer_shift;
  std::vector<LadderStep> steps;
};

inline LadderStep cr(std::size_t mode) { return {Step::create, static_cast<std::uint16_t>(mode)}; }
inline LadderStep an(std::size_t mode) {
  return {Step::annihilate, static_cast<std::uint16_t>(mode)};
}
inline constexpr LadderStep kSqrtCondensate{Step::sqrt_condensate, 0};
inline constexpr LadderStep kCondensate{Step::condensate, 0};
inline constexpr LadderStep kCondensateMinusOne{Step::condensate_minus_one, 0};

/// How condensate factors are evaluated: on the actual excitation count, or
/// frozen at N+ = 0 (sqrt(N - N+) -> sqrt(N), N - N+ -> N).
enum class CondensateFactors : std::uint8_t { exact, frozen };

/// Matrix of the sum of words from `domain` to `codomain`. Any image that
/// leaves the codomain (mode cutoff, excitation cap, tracer cutoff, or wrong
/// boson number) is dropped; applied uniformly to a Hermitian word sum this
/// drops each term together with its conjugate. `n_bosons` is the N used in
/// condensate factors.
SparseOperator assemble_words(const JointBasisPtr& domain, const JointBasisPtr& codomain,
                              std::span<const OperatorWord> words, int n_bosons = 0,
                              CondensateFactors factors = CondensateFactors::exact);

/// Diagonal operator with entries value(i).
SparseOperator assemble_diagonal(const JointBasisPtr& basis,
                                 const std::function<double(std::size_t)>& value);

}  // namespace bfdyn
