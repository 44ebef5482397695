#pragma once

#include <vector>

#include "bfdyn/sparse_operator.hpp"

namespace bfdyn {

/// Split of a Hamiltonian into total-momentum blocks.
class BlockDecomposition {
 public:
  struct Block {
    Momentum momentum;
    std::vector<std::size_t> indices;  // joint-basis indices, ascending
    SparseMatrix matrix;               // restriction of the operator
  };

  /// Throws std::logic_error if the operator couples different momenta.
  explicit BlockDecomposition(const SparseHermitianOperator& op);

  const JointBasisPtr& basis_ptr() const { return basis_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t block_of(std::size_t index) const { return block_of_[index]; }
  std::size_t local_index(std::size_t index) const { return local_[index]; }

 private:
  JointBasisPtr basis_;
  std::vector<Block> blocks_;
  std::vector<std::size_t> block_of_;
  std::vector<std::size_t> local_;
};

/// Largest |entry| joining two different total momenta (exactly 0 for every
/// translation-invariant operator).
double off_block_magnitude(const SparseOperator& op);

/// Max |[H, P_a]| entry over momentum components a.
double momentum_commutator_magnitude(const SparseOperator& op);

}  // namespace bfdyn
