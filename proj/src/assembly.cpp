#include "bfdyn/assembly.hpp"

#include <cmath>

#include "bfdyn/errors.hpp"

namespace bfdyn {

Model Model::make(ModeSetPtr modes, Potential pair, Potential tracer, ModelParams params) {
  params.validate();
  if (!modes) throw InputError("model needs a mode set");
  if (pair.kind() != PotentialKind::pair || tracer.kind() != PotentialKind::tracer) {
    throw InputError("model expects a pair potential V and a tracer potential W");
  }
  if (pair.dim() != modes->dim() || tracer.dim() != modes->dim()) {
    throw InputError("potential dimension does not match the mode set");
  }
  auto tracer_modes = build_mode_set(modes->dim(), params.tracer_cutoff);
  return Model{std::move(modes), std::move(tracer_modes), std::move(pair), std::move(tracer),
               params};
}

Model Model::with_bosons(int n) const {
  Model out = *this;
  out.params.n_bosons = n;
  out.params.validate();
  return out;
}

JointBasisPtr sector_space(const Model& model) {
  return make_joint_basis(model.tracer_modes, FockBasis::sector(model.modes, model.n_bosons()));
}

JointBasisPtr excitation_space(const Model& model, int cap) {
  return make_joint_basis(model.tracer_modes, FockBasis::excitations(model.modes, cap));
}

namespace terms {

namespace {

const ModeSet& modes_of(const JointBasisPtr& basis) { return basis->bosons().modes(); }

std::vector<std::size_t> tracked_modes(const FockBasis& bosons) {
  return {bosons.slots().begin(), bosons.slots().end()};
}

// Index of momentum p if it is an excited mode of the set.
std::optional<std::size_t> excited_index(const ModeSet& modes, const Momentum& p) {
  if (p.is_zero()) return std::nullopt;
  return modes.index_of(p);
}

void push(std::vector<OperatorWord>& words, Complex c, Momentum shift,
          std::vector<LadderStep> steps) {
  if (c == Complex{}) return;
  words.push_back({c, shift, std::move(steps)});
}

std::vector<LadderStep> with_factor(std::vector<LadderStep> steps, int n_bosons,
                                    std::initializer_list<std::size_t> positions) {
  // Inserts sqrt(N - N+) before the listed step positions (descending order).
  if (n_bosons == 0) return steps;
  for (const auto pos : positions) {
    steps.insert(steps.begin() + static_cast<std::ptrdiff_t>(pos), kSqrtCondensate);
  }
  return steps;
}

}  // namespace

SparseOperator tracer_kinetic(const JointBasisPtr& basis, double tracer_mass) {
  const auto& b = *basis;
  return assemble_diagonal(basis, [&](std::size_t i) {
    return kinetic_energy(b.tracer_modes()[b.tracer_index(i)]) / (2.0 * tracer_mass);
  });
}

SparseOperator boson_kinetic(const JointBasisPtr& basis) {
  const auto& bosons = basis->bosons();
  std::vector<double> per_boson(bosons.dimension());
  for (std::size_t b = 0; b < bosons.dimension(); ++b) {
    const auto occ = bosons.occupation(b);
    double e = 0.0;
    for (std::size_t s = 0; s < occ.size(); ++s) {
      if (occ[s] != 0) e += occ[s] * kinetic_energy(bosons.modes()[bosons.slots()[s]]);
    }
    per_boson[b] = e;
  }
  const auto& jb = *basis;
  return assemble_diagonal(basis, [&](std::size_t i) { return per_boson[jb.boson_index(i)]; });
}

SparseOperator kinetic(const JointBasisPtr& basis, double tracer_mass) {
  return tracer_kinetic(basis, tracer_mass) + boson_kinetic(basis);
}

std::vector<OperatorWord> pair_interaction_words(const FockBasis& bosons, const Potential& v) {
  const auto& modes = bosons.modes();
  const auto tracked = tracked_modes(bosons);
  std::vector<OperatorWord> words;
  for (const auto j : tracked) {
    for (const auto l : tracked) {
      for (const auto m : tracked) {
        const auto k = modes.index_of(modes[l] + modes[m] - modes[j]);
        if (!k || !bosons.tracks_mode(*k)) continue;
        push(words, v(modes[j] - modes[m]), {}, {cr(j), cr(*k), an(l), an(m)});
      }
    }
  }
  return words;
}

SparseOperator pair_interaction(const JointBasisPtr& basis, const Potential& v) {
  const auto words = pair_interaction_words(basis->bosons(), v);
  return assemble_words(basis, basis, words);
}

std::vector<OperatorWord> tracer_interaction_words(const FockBasis& bosons, const Potential& w) {
  const auto& modes = bosons.modes();
  const auto tracked = tracked_modes(bosons);
  std::vector<OperatorWord> words;
  for (const auto j : tracked) {
    for (const auto k : tracked) {
      const Momentum shift = modes[k] - modes[j];
      push(words, w(shift), shift, {cr(j), an(k)});
    }
  }
  return words;
}

SparseOperator tracer_interaction(const JointBasisPtr& basis, const Potential& w) {
  const auto words = tracer_interaction_words(basis->bosons(), w);
  return assemble_words(basis, basis, words);
}

SparseOperator condensate_exchange(const JointBasisPtr& basis, const Potential& v, int n_bosons,
                                   ExchangeOrdering ordering, CondensateFactors factors) {
  const auto& modes = modes_of(basis);
  const LadderStep factor =
      ordering == ExchangeOrdering::printed ? kCondensate : kCondensateMinusOne;
  std::vector<OperatorWord> words;
  for (const auto j : modes.excited_modes()) {
    push(words, 2.0 * v(modes[j]), {}, {cr(j), factor, an(j)});
  }
  return assemble_words(basis, basis, words, n_bosons, factors);
}

SparseOperator pair_creation(const JointBasisPtr& basis, const Potential& v, int n_bosons,
                             CondensateFactors factors) {
  const auto& modes = modes_of(basis);
  std::vector<OperatorWord> words;
  for (const auto j : modes.excited_modes()) {
    const auto k = modes.negated(j);
    push(words, v(modes[j]), {}, with_factor({cr(j), cr(k)}, n_bosons, {2, 1}));
  }
  return assemble_words(basis, basis, words, n_bosons, factors);
}

SparseOperator pair_annihilation(const JointBasisPtr& basis, const Potential& v, int n_bosons,
                                 CondensateFactors factors) {
  const auto& modes = modes_of(basis);
  std::vector<OperatorWord> words;
  for (const auto j : modes.excited_modes()) {
    const auto k = modes.negated(j);
    push(words, v(-modes[k]), {}, with_factor({an(j), an(k)}, n_bosons, {1, 0}));
  }
  return assemble_words(basis, basis, words, n_bosons, factors);
}

SparseOperator cubic_creation(const JointBasisPtr& basis, const Potential& v, int n_bosons) {
  const auto& modes = modes_of(basis);
  std::vector<OperatorWord> words;
  for (const auto j : modes.excited_modes()) {
    for (const auto k : modes.excited_modes()) {
      const auto l = excited_index(modes, modes[j] + modes[k]);
      if (!l) continue;
      push(words, 2.0 * v(modes[j]), {}, with_factor({cr(j), cr(k), an(*l)}, n_bosons, {1}));
    }
  }
  return assemble_words(basis, basis, words, n_bosons);
}

SparseOperator cubic_annihilation(const JointBasisPtr& basis, const Potential& v, int n_bosons) {
  const auto& modes = modes_of(basis);
  std::vector<OperatorWord> words;
  for (const auto k : modes.excited_modes()) {
    for (const auto l : modes.excited_modes()) {
      const auto j = excited_index(modes, modes[k] + modes[l]);
      if (!j) continue;
      push(words, 2.0 * v(-modes[l]), {}, with_factor({cr(*j), an(k), an(l)}, n_bosons, {2}));
    }
  }
  return assemble_words(basis, basis, words, n_bosons);
}

SparseOperator quartic(const JointBasisPtr& basis, const Potential& v) {
  const auto& modes = modes_of(basis);
  const auto excited = modes.excited_modes();
  std::vector<OperatorWord> words;
  for (const auto j : excited) {
    for (const auto l : excited) {
      for (const auto m : excited) {
        const auto k = excited_index(modes, modes[l] + modes[m] - modes[j]);
        if (!k) continue;
        push(words, v(modes[j] - modes[m]), {}, {cr(j), cr(*k), an(l), an(m)});
      }
    }
  }
  return assemble_words(basis, basis, words);
}

SparseOperator field_creation(const JointBasisPtr& basis, const Potential& w, int n_bosons,
                              CondensateFactors factors) {
  const auto& modes = modes_of(basis);
  std::vector<OperatorWord> words;
  for (const auto k : modes.excited_modes()) {
    push(words, w(-modes[k]), -modes[k], with_factor({cr(k)}, n_bosons, {1}));
  }
  return assemble_words(basis, basis, words, n_bosons, factors);
}

SparseOperator field_annihilation(const JointBasisPtr& basis, const Potential& w, int n_bosons,
                                  CondensateFactors factors) {
  const auto& modes = modes_of(basis);
  std::vector<OperatorWord> words;
  for (const auto k : modes.excited_modes()) {
    push(words, w(modes[k]), modes[k], with_factor({an(k)}, n_bosons, {0}));
  }
  return assemble_words(basis, basis, words, n_bosons, factors);
}

SparseOperator field_scattering(const JointBasisPtr& basis, const Potential& w) {
  const auto& modes = modes_of(basis);
  std::vector<OperatorWord> words;
  for (const auto j : modes.excited_modes()) {
    for (const auto k : modes.excited_modes()) {
      const Momentum shift = modes[k] - modes[j];
      push(words, w(shift), shift, {cr(j), an(k)});
    }
  }
  return assemble_words(basis, basis, words);
}

SparseOperator mean_field_exchange(const JointBasisPtr& basis, const Potential& v) {
  const auto& modes = modes_of(basis);
  std::vector<OperatorWord> words;
  for (const auto j : modes.excited_modes()) push(words, 2.0 * v(modes[j]), {}, {cr(j), an(j)});
  return assemble_words(basis, basis, words);
}

SparseOperator excitation_number(const JointBasisPtr& basis) {
  const auto& b = *basis;
  return assemble_diagonal(basis, [&](std::size_t i) { return b.excitation_count(i); });
}

SparseOperator momentum_component(const JointBasisPtr& basis, int axis) {
  const auto& b = *basis;
  return assemble_diagonal(basis, [&](std::size_t i) { return b.total_momentum(i).c[axis]; });
}

}  // namespace terms

SparseHermitianOperator assemble_full(const Model& model) {
  const auto basis = sector_space(model);
  SparseOperator h = terms::kinetic(basis, model.params.tracer_mass);
  h += Complex(model.params.boson_coupling()) * terms::pair_interaction(basis, model.pair);
  h += Complex(model.params.tracer_coupling()) * terms::tracer_interaction(basis, model.tracer);
  return SparseHermitianOperator(std::move(h));
}

SparseOperator assemble_u_map(const JointBasisPtr& sector, const JointBasisPtr& excitations) {
  const auto& from = sector->bosons();
  const auto& to = excitations->bosons();
  if (from.kind() != FockKind::sector || to.kind() != FockKind::excitation) {
    throw InputError("excitation map goes from a sector basis to an excitation basis");
  }
  if (to.total() != from.total()) {
    throw InputError("excitation map needs cap = N (cap " + std::to_string(to.total()) +
                     ", N " + std::to_string(from.total()) + ")");
  }
  if (from.modes().descriptor() != to.modes().descriptor() ||
      sector->tracer_modes().descriptor() != excitations->tracer_modes().descriptor()) {
    throw BasisMismatchError("excitation map needs matching mode sets");
  }
  const std::size_t zero = from.modes().zero_index();
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(sector->dimension());
  std::vector<int> occ(from.modes().size());
  for (std::size_t b = 0; b < from.dimension(); ++b) {
    from.full_occupation(b, occ);
    occ[zero] = 0;
    const auto target = to.rank(occ);
    if (!target) throw std::logic_error("sector state without excitation image");
    for (std::size_t q = 0; q < sector->tracer_modes().size(); ++q) {
      triplets.emplace_back(static_cast<Eigen::Index>(excitations->index(q, *target)),
                            static_cast<Eigen::Index>(sector->index(q, b)), Complex(1.0));
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(excitations->dimension()),
                 static_cast<Eigen::Index>(sector->dimension()));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseOperator(sector, excitations, std::move(m));
}

SparseHermitianOperator assemble_aux(const Model& model, CondensateFactors factors) {
  const int n = model.n_bosons();
  const auto basis = excitation_space(model, n);
  const double inv_n = model.params.boson_coupling();
  const double inv_sqrt_n = model.params.tracer_coupling();
  SparseOperator h = terms::kinetic(basis, model.params.tracer_mass);
  h += Complex(inv_n) * terms::condensate_exchange(basis, model.pair, n,
                                                   terms::ExchangeOrdering::printed, factors);
  h += Complex(inv_n) * terms::pair_creation(basis, model.pair, n, factors);
  h += Complex(inv_n) * terms::pair_annihilation(basis, model.pair, n, factors);
  h += Complex(inv_sqrt_n) * terms::field_creation(basis, model.tracer, n, factors);
  h += Complex(inv_sqrt_n) * terms::field_annihilation(basis, model.tracer, n, factors);
  return SparseHermitianOperator(std::move(h));
}

SparseHermitianOperator assemble_bog(const ModeSetPtr& modes, const Potential& v, int cap,
                                     ModeSetPtr tracer_modes) {
  if (!tracer_modes) tracer_modes = build_mode_set(modes->dim(), 0);
  const auto basis = make_joint_basis(tracer_modes, FockBasis::excitations(modes, cap));
  SparseOperator h = terms::boson_kinetic(basis);
  h += terms::mean_field_exchange(basis, v);
  h += terms::pair_creation(basis, v, 0);
  h += terms::pair_annihilation(basis, v, 0);
  return SparseHermitianOperator(std::move(h));
}

SparseHermitianOperator assemble_bf(const Model& model, int cap) {
  const auto basis = excitation_space(model, cap);
  SparseOperator h = terms::kinetic(basis, model.params.tracer_mass);
  h += terms::mean_field_exchange(basis, model.pair);
  h += terms::pair_creation(basis, model.pair, 0);
  h += terms::pair_annihilation(basis, model.pair, 0);
  h += terms::field_creation(basis, model.tracer, 0);
  h += terms::field_annihilation(basis, model.tracer, 0);
  return SparseHermitianOperator(std::move(h));
}

SparseHermitianOperator assemble_dgamma_w(const Potential& w, const JointBasisPtr& basis) {
  if (basis->bosons().kind() != FockKind::excitation) {
    throw InputError("dGamma(QWQ) acts on an excitation basis");
  }
  return SparseHermitianOperator(terms::field_scattering(basis, w));
}

}  // namespace bfdyn
