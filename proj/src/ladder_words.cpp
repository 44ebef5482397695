#include "bfdyn/ladder_words.hpp"

#include <algorithm>
#include <cmath>

#include "bfdyn/errors.hpp"

namespace bfdyn {

namespace {

struct Entry {
  std::size_t row;
  Complex value;
};

// Applies one word to an occupation in place. Returns false when the word
// annihilates the state.
bool apply_word(const OperatorWord& word, std::vector<int>& occ, int& n_plus,
                std::size_t zero_mode, int n_bosons, bool frozen, Complex& amp) {
  for (auto it = word.steps.rbegin(); it != word.steps.rend(); ++it) {
    switch (it->kind) {
      case Step::annihilate: {
        const int n = occ[it->mode];
        if (n == 0) return false;
        amp *= std::sqrt(static_cast<double>(n));
        occ[it->mode] = n - 1;
        if (it->mode != zero_mode) --n_plus;
        break;
      }
      case Step::create: {
        const int n = occ[it->mode];
        amp *= std::sqrt(static_cast<double>(n + 1));
        occ[it->mode] = n + 1;
        if (it->mode != zero_mode) ++n_plus;
        break;
      }
      case Step::sqrt_condensate: {
        const int c = n_bosons - (frozen ? 0 : n_plus);
        if (c <= 0) return false;
        amp *= std::sqrt(static_cast<double>(c));
        break;
      }
      case Step::condensate: {
        const int c = n_bosons - (frozen ? 0 : n_plus);
        if (c == 0) return false;
        amp *= static_cast<double>(c);
        break;
      }
      case Step::condensate_minus_one: {
        const int c = n_bosons - (frozen ? 0 : n_plus) - 1;
        if (c == 0) return false;
        amp *= static_cast<double>(c);
        break;
      }
    }
  }
  return true;
}

SparseMatrix from_columns(std::size_t rows, std::size_t cols,
                          const std::vector<std::vector<Entry>>& columns) {
  std::vector<Eigen::Triplet<Complex>> triplets;
  std::size_t total = 0;
  for (const auto& c : columns) total += c.size();
  triplets.reserve(total);
  for (std::size_t col = 0; col < columns.size(); ++col) {
    for (const auto& e : columns[col]) {
      triplets.emplace_back(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(col),
                            e.value);
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace

SparseOperator assemble_words(const JointBasisPtr& domain, const JointBasisPtr& codomain,
                              std::span<const OperatorWord> words, int n_bosons,
                              CondensateFactors factors) {
  const auto& src = *domain;
  const auto& dst = *codomain;
  if (src.bosons().modes().descriptor() != dst.bosons().modes().descriptor() ||
      src.tracer_modes().dim() != dst.tracer_modes().dim()) {
    throw BasisMismatchError("word assembly requires bases over one mode set");
  }
  const std::size_t n_modes = src.bosons().modes().size();
  const std::size_t zero_mode = src.bosons().modes().zero_index();
  const bool frozen = factors == CondensateFactors::frozen;
  for (const auto& w : words) {
    for (const auto& s : w.steps) {
      if ((s.kind == Step::create || s.kind == Step::annihilate) && s.mode >= n_modes) {
        throw std::out_of_range("operator word refers to a mode outside the mode set");
      }
    }
  }

  // Each column is generated independently and merged by row in generation
  // order, so the matrix does not depend on thread scheduling.
  const std::size_t cols = src.dimension();
  std::vector<std::vector<Entry>> columns(cols);
  const std::size_t boson_dim = src.bosons().dimension();
  const std::size_t tracer_dim = src.tracer_modes().size();

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t bb = 0; bb < static_cast<std::ptrdiff_t>(boson_dim); ++bb) {
    const auto b = static_cast<std::size_t>(bb);
    std::vector<int> base(n_modes), occ(n_modes);
    src.bosons().full_occupation(b, base);
    const int base_plus = src.bosons().excitation_count(b);
    std::vector<Entry> scratch;
    for (std::size_t q = 0; q < tracer_dim; ++q) {
      scratch.clear();
      const Momentum q_mom = src.tracer_modes()[q];
      for (const auto& w : words) {
        const auto q_new = dst.tracer_modes().index_of(q_mom + w.tracer_shift);
        if (!q_new) continue;
        occ = base;
        int n_plus = base_plus;
        Complex amp = w.coefficient;
        if (!apply_word(w, occ, n_plus, zero_mode, n_bosons, frozen, amp)) continue;
        const auto b_new = dst.bosons().rank(occ);
        if (!b_new) continue;
        scratch.push_back({dst.index(*q_new, *b_new), amp});
      }
      std::stable_sort(scratch.begin(), scratch.end(),
                       [](const Entry& a, const Entry& b) { return a.row < b.row; });
      auto& col = columns[src.index(q, b)];
      for (const auto& e : scratch) {
        if (!col.empty() && col.back().row == e.row) {
          col.back().value += e.value;
        } else {
          col.push_back(e);
        }
      }
    }
  }
  return SparseOperator(domain, codomain, from_columns(dst.dimension(), cols, columns));
}

SparseOperator assemble_diagonal(const JointBasisPtr& basis,
                                 const std::function<double(std::size_t)>& value) {
  const std::size_t n = basis->dimension();
  std::vector<std::vector<Entry>> columns(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = value(i);
    if (v != 0.0) columns[i].push_back({i, Complex(v, 0.0)});
  }
  return SparseOperator(basis, basis, from_columns(n, n, columns));
}

}  // namespace bfdyn
