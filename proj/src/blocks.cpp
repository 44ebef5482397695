#include "bfdyn/blocks.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace bfdyn {

BlockDecomposition::BlockDecomposition(const SparseHermitianOperator& op)
    : basis_(op.basis_ptr()) {
  const auto& basis = *basis_;
  const std::size_t n = basis.dimension();
  block_of_.resize(n);
  local_.resize(n);

  std::map<Momentum, std::size_t> lookup;
  for (std::size_t i = 0; i < n; ++i) {
    const Momentum p = basis.total_momentum(i);
    auto [it, inserted] = lookup.try_emplace(p, blocks_.size());
    if (inserted) blocks_.push_back({p, {}, {}});
    auto& block = blocks_[it->second];
    block_of_[i] = it->second;
    local_[i] = block.indices.size();
    block.indices.push_back(i);
  }

  std::vector<std::vector<Eigen::Triplet<Complex>>> triplets(blocks_.size());
  const SparseMatrix& m = op.matrix();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    const auto row = static_cast<std::size_t>(r);
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      const auto col = static_cast<std::size_t>(it.col());
      if (block_of_[col] != block_of_[row]) {
        throw std::logic_error("operator couples different total momenta");
      }
      triplets[block_of_[row]].emplace_back(static_cast<Eigen::Index>(local_[row]),
                                            static_cast<Eigen::Index>(local_[col]), it.value());
    }
  }
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto size = static_cast<Eigen::Index>(blocks_[b].indices.size());
    blocks_[b].matrix.resize(size, size);
    blocks_[b].matrix.setFromTriplets(triplets[b].begin(), triplets[b].end());
  }
}

double off_block_magnitude(const SparseOperator& op) {
  const auto& from = op.domain();
  const auto& to = op.codomain();
  double out = 0.0;
  const SparseMatrix& m = op.matrix();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    const Momentum p_row = to.total_momentum(static_cast<std::size_t>(r));
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (from.total_momentum(static_cast<std::size_t>(it.col())) != p_row) {
        out = std::max(out, std::abs(it.value()));
      }
    }
  }
  return out;
}

double momentum_commutator_magnitude(const SparseOperator& op) {
  double out = 0.0;
  const int dim = op.domain().tracer_modes().dim();
  const auto& basis = op.domain_ptr();
  const SparseMatrix& m = op.matrix();
  for (int a = 0; a < dim; ++a) {
    // [H, P]_{rc} = H_{rc} (P_c - P_r) for diagonal P.
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
      const int p_row = basis->total_momentum(static_cast<std::size_t>(r)).c[a];
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
        const int p_col = basis->total_momentum(static_cast<std::size_t>(it.col())).c[a];
        out = std::max(out, std::abs(it.value() * static_cast<double>(p_col - p_row)));
      }
    }
  }
  return out;
}

}  // namespace bfdyn
