#include "bfdyn/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "bfdyn/errors.hpp"

namespace bfdyn {

// ---------------------------------------------------------------- identities

const std::vector<IdentityInfo>& identity_inventory() {
  static const std::vector<IdentityInfo> list = {
      {"v_exchange",
       "U (V_{jklm} terms with one condensate creator and one condensate annihilator) U^* "
       "= 2 sum V_{j0k0} a_j^* (N - N+ - 1) a_k"},
      {"v_exchange_printed_offset",
       "2 sum V_{j0k0} a_j^* (N - N+) a_k minus the exchange image = 2 sum V_{j0k0} a_j^* a_k"},
      {"v_pair_creation",
       "U (sum V_{jk00} a_j^* a_k^* a_0 a_0) U^* = sum V_{jk00} a_j^* sqrt(N-N+) a_k^* sqrt(N-N+)"},
      {"v_pair_annihilation",
       "U (sum V_{00jk} a_0^* a_0^* a_j a_k) U^* = sum V_{00jk} sqrt(N-N+) a_j sqrt(N-N+) a_k"},
      {"v_cubic_creation",
       "U (terms with a single condensate annihilator) U^* = 2 sum V_{jkl0} a_j^* sqrt(N-N+) "
       "a_k^* a_l"},
      {"v_cubic_annihilation",
       "U (terms with a single condensate creator) U^* = 2 sum V_{0jkl} a_j^* a_k sqrt(N-N+) a_l"},
      {"v_quartic", "U (terms without condensate index) U^* = sum_{jklm>=1} V_{jklm} a*a*aa"},
      {"v_remainder", "terms with three or four condensate indices vanish"},
      {"v_total", "U (sum V_{jklm} a*a*aa) U^* = sum of the exchange, pair, cubic and quartic terms"},
      {"w_annihilation", "U (sum_k (W_x)_{0k} a_0^* a_k) U^* = sqrt(N-N+) a(W_x)"},
      {"w_creation", "U (sum_j (W_x)_{j0} a_j^* a_0) U^* = a^*(W_x) sqrt(N-N+)"},
      {"w_scattering", "U (sum_{jk>=1} (W_x)_{jk} a_j^* a_k) U^* = dGamma(Q W_x Q)"},
      {"w_total", "U (sum_n W(x - y_n)) U^* = sqrt(N-N+) a(W_x) + a^*(W_x) sqrt(N-N+) + "
                  "dGamma(Q W_x Q)"},
      {"hamiltonian_decomposition",
       "U H_N U^* = H^aux + N^{-1/2} dGamma(Q W_x Q) + N^{-1} (cubic + quartic) "
       "- (2/N) sum V_{j0k0} a_j^* a_k"},
      {"aux_bf_replacement", "H^aux with sqrt(1 - N+/N) replaced by one equals H^BF at cap N"},
      {"ladder_creation", "U a_k^* a_0 U^* = a_k^* sqrt(N - N+) for every excited mode k"},
      {"ladder_annihilation", "U a_0^* a_k U^* = sqrt(N - N+) a_k for every excited mode k"},
      {"condensate_number", "U a_0^* a_0 U^* = N - N+"},
      {"commutator_pair_creation", "[N+, sum V_{jk00} a_j^* a_k^*] = 2 sum V_{jk00} a_j^* a_k^*"},
      {"commutator_pair_annihilation", "[N+, sum V_{00jk} a_j a_k] = -2 sum V_{00jk} a_j a_k"},
      {"commutator_cubic_creation", "[N+, cubic creation term] = + cubic creation term"},
      {"commutator_cubic_annihilation", "[N+, cubic annihilation term] = - cubic annihilation term"},
      {"excitation_map_unitary", "U^* U = 1 and U U^* = 1"},
      {"momentum_conservation", "[H, P] = 0 for H_N, H^aux, H^BF and dGamma(Q W_x Q)"},
      {"hermiticity", "every assembled Hamiltonian is Hermitian to 1e-12 entrywise"},
      {"parseval_pair", "||(V_{jk00})||_l2 <= ||V||_L2"},
      {"parseval_exchange", "||(V_{j0k0})||_l2 <= ||V||_L2"},
  };
  return list;
}

bool IdentityReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

double IdentityReport::max_deviation() const {
  double out = 0.0;
  for (const auto& c : checks) out = std::max(out, c.deviation);
  return out;
}

namespace {

enum class PairPiece { exchange, pair_creation, pair_annihilation, cubic_creation,
                       cubic_annihilation, quartic, remainder };

PairPiece classify(const OperatorWord& w, std::size_t zero) {
  const int zc = (w.steps[0].mode == zero) + (w.steps[1].mode == zero);
  const int za = (w.steps[2].mode == zero) + (w.steps[3].mode == zero);
  if (zc == 1 && za == 1) return PairPiece::exchange;
  if (zc == 0 && za == 2) return PairPiece::pair_creation;
  if (zc == 2 && za == 0) return PairPiece::pair_annihilation;
  if (zc == 0 && za == 1) return PairPiece::cubic_creation;
  if (zc == 1 && za == 0) return PairPiece::cubic_annihilation;
  if (zc == 0 && za == 0) return PairPiece::quartic;
  return PairPiece::remainder;
}

enum class FieldPiece { annihilation, creation, scattering, remainder };

FieldPiece classify_field(const OperatorWord& w, std::size_t zero) {
  const bool j0 = w.steps[0].mode == zero;
  const bool k0 = w.steps[1].mode == zero;
  if (j0 && !k0) return FieldPiece::annihilation;
  if (!j0 && k0) return FieldPiece::creation;
  if (!j0 && !k0) return FieldPiece::scattering;
  return FieldPiece::remainder;
}

template <class Pred>
SparseOperator sector_piece(const JointBasisPtr& sector, const std::vector<OperatorWord>& words,
                            Pred keep) {
  std::vector<OperatorWord> chosen;
  for (const auto& w : words) {
    if (keep(w)) chosen.push_back(w);
  }
  return assemble_words(sector, sector, chosen);
}

class SuiteRecorder {
 public:
  explicit SuiteRecorder(IdentityReport& report) : report_(report) {}

  void equal(const std::string& name, int n, const SparseOperator& a, const SparseOperator& b) {
    record(name, n, relative_frobenius_deviation(a.matrix(), b.matrix()));
  }
  void bound(const std::string& name, int n, double lhs, double rhs) {
    const double excess = lhs <= rhs ? 0.0 : (lhs - rhs) / std::max(rhs, 1e-300);
    record(name, n, excess);
  }
  void record(const std::string& name, int n, double deviation) {
    report_.checks.push_back(
        {name, n, deviation, kIdentityTolerance,
         std::isfinite(deviation) && deviation <= kIdentityTolerance});
  }

 private:
  IdentityReport& report_;
};

double parseval_pair_norm(const Model& model) {
  const auto basis = excitation_space(model, 2);
  const auto b0 = terms::pair_creation(basis, model.pair, 0);
  const auto& bosons = basis->bosons();
  const auto& modes = bosons.modes();
  const std::size_t q0 = *basis->tracer_modes().index_of(Momentum{});
  const auto vac = *bosons.rank(std::vector<int>(modes.size(), 0));
  const SparseMatrix& m = b0.matrix();
  double sum = 0.0;
  for (const auto j : modes.excited_modes()) {
    for (const auto k : modes.excited_modes()) {
      if (k < j) continue;
      std::vector<int> occ(modes.size(), 0);
      ++occ[j];
      ++occ[k];
      const auto row = basis->index(q0, *bosons.rank(occ));
      const Complex e = m.coeff(static_cast<Eigen::Index>(row),
                                static_cast<Eigen::Index>(basis->index(q0, vac)));
      // <1_j 1_k| B |vac> = V_{jk00} + V_{kj00} for j != k and sqrt(2) V_{jj00}.
      sum += (j == k) ? std::norm(e / std::sqrt(2.0)) : 2.0 * std::norm(e / 2.0);
    }
  }
  return std::sqrt(sum);
}

double parseval_exchange_norm(const Model& model) {
  const auto basis = excitation_space(model, 1);
  const auto a = terms::mean_field_exchange(basis, model.pair);
  const auto& bosons = basis->bosons();
  const auto& modes = bosons.modes();
  const std::size_t q0 = *basis->tracer_modes().index_of(Momentum{});
  double sum = 0.0;
  for (const auto j : modes.excited_modes()) {
    for (const auto k : modes.excited_modes()) {
      std::vector<int> oj(modes.size(), 0), ok(modes.size(), 0);
      ++oj[j];
      ++ok[k];
      const Complex e =
          a.matrix().coeff(static_cast<Eigen::Index>(basis->index(q0, *bosons.rank(oj))),
                           static_cast<Eigen::Index>(basis->index(q0, *bosons.rank(ok))));
      sum += std::norm(e / 2.0);  // <1_j| 2 sum V a^* a |1_k> = 2 V_{j0k0}
    }
  }
  return std::sqrt(sum);
}

SparseOperator scaled(double s, SparseOperator op) { return Complex(s) * std::move(op); }

void check_one_n(const Model& base, int n, SuiteRecorder& rec) {
  const Model model = base.with_bosons(n);
  const auto& v = model.pair;
  const auto& w = model.tracer;
  const auto sector = sector_space(model);
  const auto ex = excitation_space(model, n);
  const auto u = assemble_u_map(sector, ex);
  const auto ud = u.adjoint();
  auto conj = [&](const SparseOperator& x) { return u * x * ud; };
  const std::size_t zero = model.modes->zero_index();

  rec.equal("excitation_map_unitary", n, ud * u, SparseOperator::identity(sector));
  rec.record("excitation_map_unitary", n,
             relative_frobenius_deviation((u * ud).matrix(),
                                          SparseOperator::identity(ex).matrix()));

  // Pair interaction, term by term.
  const auto pair_words = terms::pair_interaction_words(sector->bosons(), v);
  auto piece = [&](PairPiece p) {
    return conj(sector_piece(sector, pair_words,
                             [&](const OperatorWord& wd) { return classify(wd, zero) == p; }));
  };
  using terms::ExchangeOrdering;
  const auto exchange_exact = terms::condensate_exchange(ex, v, n, ExchangeOrdering::normal_ordered);
  const auto exchange_printed = terms::condensate_exchange(ex, v, n, ExchangeOrdering::printed);
  const auto b = terms::pair_creation(ex, v, n);
  const auto c = terms::pair_annihilation(ex, v, n);
  const auto d = terms::cubic_creation(ex, v, n);
  const auto e = terms::cubic_annihilation(ex, v, n);
  const auto f = terms::quartic(ex, v);

  const auto exchange_image = piece(PairPiece::exchange);
  rec.equal("v_exchange", n, exchange_image, exchange_exact);
  rec.equal("v_exchange_printed_offset", n, exchange_printed - exchange_image,
            terms::mean_field_exchange(ex, v));
  rec.equal("v_pair_creation", n, piece(PairPiece::pair_creation), b);
  rec.equal("v_pair_annihilation", n, piece(PairPiece::pair_annihilation), c);
  rec.equal("v_cubic_creation", n, piece(PairPiece::cubic_creation), d);
  rec.equal("v_cubic_annihilation", n, piece(PairPiece::cubic_annihilation), e);
  rec.equal("v_quartic", n, piece(PairPiece::quartic), f);
  rec.equal("v_remainder", n, piece(PairPiece::remainder), SparseOperator::zero(ex));
  const auto v_image = conj(assemble_words(sector, sector, pair_words));
  rec.equal("v_total", n, v_image, exchange_exact + b + c + d + e + f);

  // Tracer interaction.
  const auto field_words = terms::tracer_interaction_words(sector->bosons(), w);
  auto field_piece = [&](FieldPiece p) {
    return conj(sector_piece(sector, field_words, [&](const OperatorWord& wd) {
      return classify_field(wd, zero) == p;
    }));
  };
  const auto w_ann = terms::field_annihilation(ex, w, n);
  const auto w_cre = terms::field_creation(ex, w, n);
  const auto w_sca = terms::field_scattering(ex, w);
  rec.equal("w_annihilation", n, field_piece(FieldPiece::annihilation), w_ann);
  rec.equal("w_creation", n, field_piece(FieldPiece::creation), w_cre);
  rec.equal("w_scattering", n, field_piece(FieldPiece::scattering), w_sca);
  rec.equal("w_total", n, conj(assemble_words(sector, sector, field_words)), w_ann + w_cre + w_sca);

  // Whole Hamiltonian.
  const auto h = assemble_full(model);
  const auto aux = assemble_aux(model);
  const double inv_n = model.params.boson_coupling();
  const double inv_sqrt_n = model.params.tracer_coupling();
  auto rhs = aux.as_operator();
  rhs += scaled(inv_sqrt_n, w_sca);
  rhs += scaled(inv_n, d + e + f);
  rhs -= scaled(inv_n, terms::mean_field_exchange(ex, v));
  rec.equal("hamiltonian_decomposition", n, conj(h.as_operator()), rhs);

  const auto frozen = assemble_aux(model, CondensateFactors::frozen);
  const auto bf = assemble_bf(model, n);
  rec.equal("aux_bf_replacement", n, frozen.as_operator(), bf.as_operator());

  // Single ladder identities, one excited mode at a time.
  double lc = 0.0, la = 0.0;
  for (const auto k : model.modes->excited_modes()) {
    const std::vector<OperatorWord> s_cre{{Complex(1.0), {}, {cr(k), an(zero)}}};
    const std::vector<OperatorWord> e_cre{{Complex(1.0), {}, {cr(k), kSqrtCondensate}}};
    const std::vector<OperatorWord> s_ann{{Complex(1.0), {}, {cr(zero), an(k)}}};
    const std::vector<OperatorWord> e_ann{{Complex(1.0), {}, {kSqrtCondensate, an(k)}}};
    lc = std::max(lc, relative_frobenius_deviation(
                          conj(assemble_words(sector, sector, s_cre)).matrix(),
                          assemble_words(ex, ex, e_cre, n).matrix()));
    la = std::max(la, relative_frobenius_deviation(
                          conj(assemble_words(sector, sector, s_ann)).matrix(),
                          assemble_words(ex, ex, e_ann, n).matrix()));
  }
  rec.record("ladder_creation", n, lc);
  rec.record("ladder_annihilation", n, la);
  const std::vector<OperatorWord> s_num{{Complex(1.0), {}, {cr(zero), an(zero)}}};
  const std::vector<OperatorWord> e_num{{Complex(1.0), {}, {kCondensate}}};
  rec.equal("condensate_number", n, conj(assemble_words(sector, sector, s_num)),
            assemble_words(ex, ex, e_num, n));

  // Commutators with N+.
  const auto n_plus = terms::excitation_number(ex);
  const auto b0 = terms::pair_creation(ex, v, 0);
  const auto c0 = terms::pair_annihilation(ex, v, 0);
  rec.equal("commutator_pair_creation", n, commutator(n_plus, b0), scaled(2.0, b0));
  rec.equal("commutator_pair_annihilation", n, commutator(n_plus, c0), scaled(-2.0, c0));
  rec.equal("commutator_cubic_creation", n, commutator(n_plus, d), d);
  rec.equal("commutator_cubic_annihilation", n, commutator(n_plus, e), scaled(-1.0, e));

  const auto dgw = assemble_dgamma_w(w, ex);
  double drift = 0.0;
  for (const auto* op : {&h, &aux, &bf, &dgw}) {
    drift = std::max(drift, momentum_commutator_magnitude(op->as_operator()));
  }
  rec.record("momentum_conservation", n, drift);
  double herm = 0.0;
  for (const auto* op : {&h, &aux, &bf, &dgw, &frozen}) {
    herm = std::max(herm, op->hermiticity_deviation());
  }
  // Certified at construction against 1e-12 absolute; reported as is.
  rec.record("hermiticity", n, herm);
}

}  // namespace

IdentityReport run_identity_suite(const Model& base, std::span<const int> n_list) {
  IdentityReport report;
  SuiteRecorder rec(report);
  for (const int n : n_list) {
    if (n < 1) throw InputError("identity suite needs N >= 1");
    try {
      check_one_n(base, n, rec);
    } catch (const HermiticityError& e) {
      // A broken potential can make a Hamiltonian non-Hermitian; the checks
      // recorded before that point stay in the report.
      rec.record("hermiticity", n, e.deviation());
    }
  }
  const double l2 = std::sqrt(base.pair.l2_norm_squared());
  rec.bound("parseval_pair", 0, parseval_pair_norm(base), l2);
  rec.bound("parseval_exchange", 0, parseval_exchange_norm(base), l2);
  return report;
}

// ------------------------------------------------------------ random forms

namespace {

ComplexVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector out(static_cast<Eigen::Index>(n));
  for (auto& z : out) z = Complex(g(rng), g(rng));
  return out;
}

}  // namespace

RandomFormReport check_quadratic_forms(const JointBasisPtr& excitations, int samples,
                                       std::mt19937_64& rng) {
  const auto& basis = *excitations;
  if (basis.bosons().kind() != FockKind::excitation) {
    throw InputError("quadratic form checks run on an excitation basis");
  }
  const int cap = basis.bosons().total();
  if (cap < 2) throw InputError("quadratic form checks need cap >= 2");
  const auto excited = basis.bosons().modes().excited_modes();
  const std::size_t dim = basis.dimension();
  const auto counts = number_operator(basis);

  RandomFormReport report;
  report.samples = samples;
  std::normal_distribution<double> g;
  for (int s = 0; s < samples; ++s) {
    StateVector psi(excitations, random_vector(dim, rng));
    psi.amplitudes() /= psi.norm();

    // Sum_{jk} ||a_j a_k psi||^2 = <psi, N+(N+ - 1) psi>.
    double lhs = 0.0;
    std::vector<StateVector> once;
    for (const auto k : excited) once.push_back(apply_annihilate(psi, k));
    for (const auto& ak : once) {
      for (const auto j : excited) lhs += std::pow(apply_annihilate(ak, j).norm(), 2);
    }
    double rhs = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      rhs += std::norm(psi.amplitudes()(static_cast<Eigen::Index>(i))) * counts[i] *
             (counts[i] - 1.0);
    }
    report.max_number_identity_deviation =
        std::max(report.max_number_identity_deviation,
                 std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));

    // Random coefficient matrix.
    Eigen::MatrixXcd m(excited.size(), excited.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = Complex(g(rng), g(rng));
    }
    const double m_norm = m.norm();

    // ||sum M_jk a_j a_k phi|| <= ||M|| ||N+ phi||.
    StateVector lowered = StateVector::zero(excitations);
    for (std::size_t kk = 0; kk < excited.size(); ++kk) {
      const auto ak = apply_annihilate(psi, excited[kk]);
      for (std::size_t jj = 0; jj < excited.size(); ++jj) {
        lowered.amplitudes() += m(static_cast<Eigen::Index>(jj), static_cast<Eigen::Index>(kk)) *
                                apply_annihilate(ak, excited[jj]).amplitudes();
      }
    }
    double nplus_norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      nplus_norm += std::norm(psi.amplitudes()(static_cast<Eigen::Index>(i)) * counts[i]);
    }
    nplus_norm = std::sqrt(nplus_norm);
    const double ann_ratio = lowered.norm() / (m_norm * nplus_norm);
    report.max_annihilation_ratio = std::max(report.max_annihilation_ratio, ann_ratio);
    if (lowered.norm() > m_norm * nplus_norm * (1.0 + 1e-12)) ++report.annihilation_bound_violations;

    // Creation case on a state with two units of headroom.
    StateVector phi = psi;
    for (std::size_t i = 0; i < dim; ++i) {
      if (counts[i] > cap - 2) phi.amplitudes()(static_cast<Eigen::Index>(i)) = 0.0;
    }
    phi.amplitudes() /= phi.norm();
    StateVector raised = StateVector::zero(excitations);
    for (std::size_t kk = 0; kk < excited.size(); ++kk) {
      const auto ck = apply_create(phi, excited[kk]);
      for (std::size_t jj = 0; jj < excited.size(); ++jj) {
        raised.amplitudes() += m(static_cast<Eigen::Index>(jj), static_cast<Eigen::Index>(kk)) *
                               apply_create(ck, excited[jj]).amplitudes();
      }
    }
    double shifted_norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      shifted_norm += std::norm(phi.amplitudes()(static_cast<Eigen::Index>(i)) * (counts[i] + 2.0));
    }
    shifted_norm = std::sqrt(shifted_norm);
    const double cre_ratio = raised.norm() / (m_norm * shifted_norm);
    report.max_creation_ratio = std::max(report.max_creation_ratio, cre_ratio);
    if (raised.norm() > m_norm * shifted_norm * (1.0 + 1e-12)) ++report.creation_bound_violations;
  }
  return report;
}

TailReport check_truncation_tail(const StateVector& phi) {
  const auto& basis = phi.basis();
  if (basis.bosons().kind() != FockKind::excitation) {
    throw InputError("truncation tails are defined on excitation bases");
  }
  double nplus_norm = 0.0;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    nplus_norm += std::norm(phi.amplitudes()(static_cast<Eigen::Index>(i)) *
                            static_cast<double>(basis.excitation_count(i)));
  }
  nplus_norm = std::sqrt(nplus_norm);
  TailReport report;
  const auto& tracer = basis.tracer_modes_ptr();
  for (int n = 0; n < basis.bosons().total(); ++n) {
    const auto small = make_joint_basis(tracer, FockBasis::excitations(basis.bosons().modes_ptr(), n));
    const auto truncated = embed(embed(phi, small, true), phi.basis_ptr());
    const double tail = distance(phi, truncated);
    const double bound = nplus_norm / (n + 1.0);
    if (tail > 0.0) report.max_ratio = std::max(report.max_ratio, tail / bound);
    if (tail > bound * (1.0 + 1e-12)) report.passed = false;
  }
  return report;
}

// ---------------------------------------------------------------- propagation

SparseMatrix random_hermitian(std::size_t dim, int per_row, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::size_t> pick(0, dim - 1);
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (std::size_t r = 0; r < dim; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    triplets.emplace_back(ri, ri, Complex(g(rng), 0.0));
    for (int k = 0; k < per_row / 2; ++k) {
      const auto c = static_cast<Eigen::Index>(pick(rng));
      if (c == ri) continue;
      const Complex z(g(rng), g(rng));
      triplets.emplace_back(ri, c, z);
      triplets.emplace_back(c, ri, std::conj(z));
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

namespace {

double energy_of(const SparseMatrix& h, const ComplexVector& psi) {
  return psi.dot(h * psi).real();
}

}  // namespace

PropagationCheck check_propagation(const SparseMatrix& h, const ComplexVector& psi0,
                                   const PropagationConfig& cfg, bool with_oracle) {
  PropagationCheck out;
  const ComplexVector fwd = evolve_vector(h, psi0, cfg);
  PropagationConfig back = cfg;
  back.time = -cfg.time;
  const ComplexVector returned = evolve_vector(h, fwd, back);
  out.norm_drift = std::abs(fwd.norm() - psi0.norm());
  out.energy_drift = std::abs(energy_of(h, fwd) - energy_of(h, psi0));
  out.reversal_error = (returned - psi0).norm();
  out.oracle_deviation = with_oracle ? (fwd - dense_expm_vector(h, psi0, cfg.time)).norm()
                                     : std::numeric_limits<double>::quiet_NaN();
  out.blocked_deviation = std::numeric_limits<double>::quiet_NaN();
  out.momentum_drift = std::numeric_limits<double>::quiet_NaN();
  return out;
}

PropagationCheck check_propagation(const SparseHermitianOperator& h, const StateVector& psi0,
                                   const PropagationConfig& cfg, bool with_oracle) {
  PropagationCheck out = check_propagation(h.matrix(), psi0.amplitudes(), cfg, with_oracle);
  const BlockDecomposition blocks(h);
  const StateVector blocked = evolve_blocked(blocks, psi0, cfg);
  const StateVector plain = evolve(h, psi0, cfg);
  out.blocked_deviation = distance(blocked, plain);
  const auto p0 = expected_momentum(psi0);
  const auto p1 = expected_momentum(blocked);
  out.momentum_drift = 0.0;
  for (std::size_t a = 0; a < p0.size(); ++a) {
    out.momentum_drift = std::max(out.momentum_drift, std::abs(p1[a] - p0[a]));
  }
  return out;
}

// ------------------------------------------------------------ initial states

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::vacuum_gaussian: return "vacuum-gaussian";
    case InitialKind::single: return "single";
    case InitialKind::pair: return "pair";
  }
  return "?";
}

InitialKind parse_initial_kind(const std::string& name) {
  if (name == "vacuum-gaussian") return InitialKind::vacuum_gaussian;
  if (name == "single") return InitialKind::single;
  if (name == "pair") return InitialKind::pair;
  throw InputError("unknown initial state kind '" + name + "'");
}

InitialState make_initial_state(InitialKind kind, const Model& model, int cap, Momentum p,
                                Momentum q, double width) {
  const auto basis = excitation_space(model, cap);
  const auto& bosons = basis->bosons();
  const auto& modes = *model.modes;
  const auto& tracer = *model.tracer_modes;
  InitialState out{StateVector::zero(basis), kind, 0, 0.0, 0.0};

  const int needed = kind == InitialKind::vacuum_gaussian ? 0 : (kind == InitialKind::single ? 1 : 2);
  if (needed > cap) {
    throw InputError("initial state has " + std::to_string(needed) +
                     " excitations but the cap is " + std::to_string(cap));
  }
  out.support = needed;
  std::vector<int> occ(modes.size(), 0);
  if (kind != InitialKind::vacuum_gaussian) {
    const auto pi = modes.index_of(p);
    if (!pi || p.is_zero()) throw InputError("excitation momentum must be a nonzero mode");
    ++occ[*pi];
    if (kind == InitialKind::pair) ++occ[modes.negated(*pi)];
  }
  const auto b = bosons.rank(occ);
  if (!b) throw InputError("initial state outside the excitation basis");

  if (kind == InitialKind::vacuum_gaussian) {
    if (!(width > 0.0)) throw InputError("Gaussian width must be positive");
    for (std::size_t t = 0; t < tracer.size(); ++t) {
      const double r2 = (tracer[t] - q).norm_sq();
      out.phi.amplitudes()(static_cast<Eigen::Index>(basis->index(t, *b))) =
          std::exp(-r2 / (2.0 * width * width));
    }
  } else {
    const auto t = tracer.index_of(q);
    if (!t) throw InputError("tracer momentum outside the tracer cutoff");
    out.phi.amplitudes()(static_cast<Eigen::Index>(basis->index(*t, *b))) = 1.0;
  }
  out.phi.amplitudes() /= out.phi.norm();

  const auto h0 = terms::kinetic(basis, model.params.tracer_mass);
  out.h0_norm = h0.apply(out.phi).norm();
  out.weight_norm = std::sqrt(excitation_weight(out.phi));
  return out;
}

// ------------------------------------------------------------------ dynamics

std::string to_string(Flavor flavor) {
  switch (flavor) {
    case Flavor::full: return "full";
    case Flavor::aux: return "aux";
    case Flavor::bf: return "bf";
  }
  return "?";
}

Flavor parse_flavor(const std::string& name) {
  if (name == "full") return Flavor::full;
  if (name == "aux") return Flavor::aux;
  if (name == "bf") return Flavor::bf;
  throw InputError("unknown flavor '" + name + "'");
}

namespace {

// States at every time, evolving outward from t = 0 in both directions.
std::vector<StateVector> evolve_on_grid(const BlockDecomposition& blocks, const StateVector& start,
                                        std::span<const double> times,
                                        const PropagationConfig& cfg, PropagationStats& stats) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::vector<StateVector> out(times.size(), start);

  auto sweep = [&](auto begin, auto end) {
    StateVector current = start;
    double t_now = 0.0;
    for (auto it = begin; it != end; ++it) {
      const double t = times[*it];
      if (t != t_now) {
        PropagationConfig step = cfg;
        step.time = t - t_now;
        current = evolve_blocked(blocks, current, step, &stats);
        t_now = t;
      }
      out[*it] = current;
    }
  };
  const auto split = std::partition_point(order.begin(), order.end(),
                                          [&](std::size_t i) { return times[i] < 0.0; });
  sweep(split, order.end());
  sweep(std::make_reverse_iterator(split), std::make_reverse_iterator(order.begin()));
  return out;
}

}  // namespace

FlavorRun run_flavor(Flavor flavor, const Model& model, const StateVector& phi,
                     std::span<const double> times, const PropagationConfig& cfg, int bf_cap) {
  cfg.validate();
  FlavorRun run{flavor, 0, {times.begin(), times.end()}, {}, {}, {}};
  const int n = model.n_bosons();
  switch (flavor) {
    case Flavor::full: {
      const auto h = assemble_full(model);
      const auto ex = excitation_space(model, n);
      const auto u = assemble_u_map(h.basis_ptr(), ex);
      const auto ud = u.adjoint();
      const auto start = ud.apply(embed(phi, ex, true));
      const auto states = evolve_on_grid(BlockDecomposition(h), start, times, cfg, run.stats);
      run.cap = n;
      for (const auto& s : states) {
        run.energies.push_back(h.expectation(s));
        run.states.push_back(u.apply(s));
      }
      break;
    }
    case Flavor::aux:
    case Flavor::bf: {
      const bool aux = flavor == Flavor::aux;
      const auto h = aux ? assemble_aux(model) : assemble_bf(model, bf_cap);
      const auto start = embed(phi, h.basis_ptr(), aux);
      run.states = evolve_on_grid(BlockDecomposition(h), start, times, cfg, run.stats);
      run.cap = aux ? n : bf_cap;
      for (const auto& s : run.states) run.energies.push_back(h.expectation(s));
      break;
    }
  }
  return run;
}

AlphaTrace alpha_trace(const FlavorRun& run, int n_bosons) {
  AlphaTrace trace{run.flavor, n_bosons, run.times, {}, {}};
  for (const auto& s : run.states) {
    trace.alpha.push_back(excitation_weight(s));
    trace.norm.push_back(s.norm());
  }
  return trace;
}

namespace {

double alpha_at_zero(const AlphaTrace& trace) {
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    if (trace.times[i] == 0.0) return trace.alpha[i];
  }
  throw InputError("alpha trace must include t = 0");
}

}  // namespace

double fit_growth_rate(std::span<const AlphaTrace> traces) {
  double v = 0.0;
  for (const auto& tr : traces) {
    const double a0 = alpha_at_zero(tr);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      const double t = std::abs(tr.times[i]);
      if (t == 0.0 || tr.alpha[i] <= a0) continue;
      v = std::max(v, std::log(tr.alpha[i] / a0) / t);
    }
  }
  return v;
}

double envelope_ratio(std::span<const AlphaTrace> traces, double v) {
  double worst = 0.0;
  for (const auto& tr : traces) {
    const double a0 = alpha_at_zero(tr);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      worst = std::max(worst, tr.alpha[i] / (a0 * std::exp(v * std::abs(tr.times[i]))));
    }
  }
  return worst;
}

std::vector<double> uniform_grid(double start, double stop, int points) {
  if (points < 1) throw InputError("time grid needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = start;
    return out;
  }
  for (int i = 0; i < points; ++i) {
    out[static_cast<std::size_t>(i)] = start + (stop - start) * i / (points - 1);
  }
  return out;
}

// -------------------------------------------------------------- convergence

BfReference bf_reference(const Model& base, const StateVector& phi, double t,
                         const PropagationConfig& cfg, int start_cap, double cap_tolerance,
                         int max_cap) {
  int support = 0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (phi.amplitudes()(static_cast<Eigen::Index>(i)) != Complex{}) {
      support = std::max(support, phi.basis().excitation_count(i));
    }
  }
  int cap = std::max(start_cap, std::max(support, 1));
  const double times[] = {t};
  auto run = [&](int m) { return run_flavor(Flavor::bf, base, phi, times, cfg, m).states[0]; };

  BfReference ref{run(cap), cap, 0.0, {cap}};
  while (true) {
    const int next = 2 * cap;
    if (next > max_cap) {
      throw PropagationError("excitation cap for the BF reference did not converge",
                             ref.cap_difference);
    }
    StateVector larger = run(next);
    ref.caps_tried.push_back(next);
    ref.cap_difference = distance(embed(ref.state, larger.basis_ptr()), larger);
    ref.state = std::move(larger);
    ref.cap = next;
    cap = next;
    if (ref.cap_difference <= cap_tolerance) return ref;
  }
}

ConvergenceCell convergence_cell(const Model& base, const StateVector& phi,
                                 const BfReference& reference, double t, int n_bosons,
                                 const PropagationConfig& cfg) {
  const Model model = base.with_bosons(n_bosons);
  const double times[] = {t};
  const auto full = run_flavor(Flavor::full, model, phi, times, cfg, 0);
  const auto aux = run_flavor(Flavor::aux, model, phi, times, cfg, 0);
  const auto& psi = full.states[0];
  const auto& chi = aux.states[0];

  const int cap = std::max(n_bosons, reference.cap);
  const auto common = excitation_space(model, std::max(cap, phi.basis().bosons().total()));
  const auto ref = embed(reference.state, common);

  ConvergenceCell cell;
  cell.n_bosons = n_bosons;
  cell.total = distance(embed(psi, common), ref);
  cell.aux_gap = distance(psi, chi);
  cell.aux_bf_gap = distance(embed(chi, common), ref);
  const auto cut = excitation_space(model, n_bosons);
  cell.tail = distance(embed(embed(phi, cut, true), common), embed(phi, common));
  cell.sector_dimension = sector_space(model)->dimension();
  cell.excitation_dimension = cut->dimension();
  cell.matvecs = full.stats.matvecs + aux.stats.matvecs;
  return cell;
}

RateFit fit_rate(std::span<const int> n_values, std::span<const double> errors,
                 double noise_floor) {
  RateFit fit;
  std::size_t start = 0;
  while (start < errors.size() && errors[start] <= 10.0 * noise_floor) ++start;
  fit.window_start = start;
  std::vector<double> xs, ys;
  for (std::size_t i = start; i < errors.size(); ++i) {
    if (errors[i] <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(n_values[i])));
    ys.push_back(std::log(errors[i]));
  }
  if (xs.size() < 2) return fit;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.prefactor = std::exp(my - fit.slope * mx);
  fit.valid = true;
  return fit;
}

ErrorCurve make_error_curve(std::string name, std::span<const int> n_values,
                            std::span<const double> errors, double noise_floor) {
  if (n_values.size() != errors.size() || n_values.empty()) {
    throw InputError("error curve needs one error per N");
  }
  for (std::size_t i = 1; i < n_values.size(); ++i) {
    if (n_values[i] <= n_values[i - 1]) throw InputError("N values must increase strictly");
  }
  ErrorCurve curve;
  curve.name = std::move(name);
  curve.n_values.assign(n_values.begin(), n_values.end());
  curve.errors.assign(errors.begin(), errors.end());
  curve.fit = fit_rate(n_values, errors, noise_floor);

  const double n0 = n_values.front();
  const double e0 = errors.front();
  const double slack = 10.0 * noise_floor;
  curve.bound_prefactor = e0 * std::pow(n0, 0.25);
  curve.bound_ok = true;
  curve.monotone_ok = true;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double bound = e0 * std::pow(n0 / n_values[i], 0.25);
    if (errors[i] > bound * (1.0 + 1e-12) + slack) curve.bound_ok = false;
    if (i > 0 && errors[i] > 1.1 * errors[i - 1] + slack) curve.monotone_ok = false;
  }
  return curve;
}

bool triangle_consistent(std::span<const ConvergenceCell> cells, double noise_floor) {
  return std::all_of(cells.begin(), cells.end(), [&](const ConvergenceCell& c) {
    return c.total <= c.aux_gap + c.aux_bf_gap + 10.0 * noise_floor;
  });
}

// ------------------------------------------------------------------ spectrum

double DispersionOracle::omega(const Momentum& p) const {
  for (const auto& l : levels) {
    if (l.p == p) return l.omega;
  }
  throw InputError("momentum " + p.to_string(kMaxDimension) + " is not an excited mode");
}

double DispersionOracle::lowest_excitation(const Momentum& total, int max_particles) const {
  if (!stable) return std::numeric_limits<double>::quiet_NaN();
  // Cheapest multiset of quasiparticles reaching each total momentum with
  // exactly k particles, then the best over k >= 1.
  std::map<Momentum, double> layer{{Momentum{}, 0.0}};
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= max_particles; ++k) {
    std::map<Momentum, double> next;
    for (const auto& [p, e] : layer) {
      for (const auto& l : levels) {
        const Momentum q = p + l.p;
        const double cost = e + l.omega;
        auto [it, inserted] = next.try_emplace(q, cost);
        if (!inserted) it->second = std::min(it->second, cost);
      }
    }
    layer = std::move(next);
    if (auto it = layer.find(total); it != layer.end()) best = std::min(best, it->second);
  }
  return best;
}

DispersionOracle bogoliubov_oracle(const ModeSet& modes, const Potential& v) {
  DispersionOracle oracle;
  for (const auto j : modes.excited_modes()) {
    PairLevel level;
    level.p = modes[j];
    level.epsilon = kinetic_energy(level.p);
    level.vhat = v(level.p).real();
    const double disc = level.epsilon * (level.epsilon + 4.0 * level.vhat);
    if (level.epsilon + 4.0 * level.vhat < 0.0) {
      oracle.stable = false;
      level.omega = std::numeric_limits<double>::quiet_NaN();
    } else {
      level.omega = std::sqrt(disc);
    }
    oracle.levels.push_back(level);
  }
  if (oracle.stable) {
    // Each unordered pair {p, -p} contributes omega - eps - 2 V^ once.
    for (const auto& l : oracle.levels) {
      if (l.p > -l.p) oracle.ground_energy += l.omega - l.epsilon - 2.0 * l.vhat;
    }
  } else {
    oracle.ground_energy = std::numeric_limits<double>::quiet_NaN();
  }
  return oracle;
}

bool SpectrumReport::passed(double tolerance) const {
  return stable() && ground_energy_deviation <= tolerance && max_lowest_deviation <= tolerance &&
         max_single_level_gap <= tolerance;
}

SpectrumReport bogoliubov_spectrum_check(const ModeSetPtr& modes, const Potential& v,
                                         std::span<const int> caps) {
  SpectrumReport report;
  report.oracle = bogoliubov_oracle(*modes, v);
  if (!report.oracle.stable) return report;

  for (const int cap : caps) {
    const auto h = assemble_bog(modes, v, cap);
    const BlockDecomposition blocks(h);
    std::map<Momentum, Eigen::VectorXd> spectra;
    for (const auto& b : blocks.blocks()) {
      if (b.indices.size() > kDenseLimit) {
        throw DimensionLimitError("spectrum block exceeds the dense limit",
                                  static_cast<double>(b.indices.size()));
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(Eigen::MatrixXcd(b.matrix),
                                                          Eigen::EigenvaluesOnly);
      spectra[b.momentum] = eig.eigenvalues();
    }
    SpectrumCapResult result;
    result.cap = cap;
    result.ground_energy = spectra.at(Momentum{})(0);
    for (const auto j : modes->excited_modes()) {
      const Momentum p = (*modes)[j];
      const auto it = spectra.find(p);
      if (it == spectra.end()) continue;
      SpectrumBlockResult block;
      block.momentum = p;
      block.lowest_excitation = it->second(0) - result.ground_energy;
      block.oracle_lowest = report.oracle.lowest_excitation(p, 8);
      const double level = result.ground_energy + report.oracle.omega(p);
      block.single_level_gap = (it->second.array() - level).abs().minCoeff();
      result.blocks.push_back(block);
    }
    report.caps.push_back(std::move(result));
  }

  if (!report.caps.empty()) {
    const auto& last = report.caps.back();
    report.ground_energy_deviation = std::abs(last.ground_energy - report.oracle.ground_energy);
    for (const auto& b : last.blocks) {
      report.max_lowest_deviation =
          std::max(report.max_lowest_deviation, std::abs(b.lowest_excitation - b.oracle_lowest));
      report.max_single_level_gap = std::max(report.max_single_level_gap, b.single_level_gap);
    }
    for (std::size_t c = 1; c < report.caps.size(); ++c) {
      const std::size_t shared =
          std::min(report.caps[c].blocks.size(), report.caps[c - 1].blocks.size());
      for (std::size_t b = 0; b < shared; ++b) {
        const auto err = [&](std::size_t i) {
          const auto& blk = report.caps[i].blocks[b];
          return std::abs(blk.lowest_excitation - blk.oracle_lowest);
        };
        if (err(c) > err(c - 1) + 1e-9) report.monotone = false;  // roundoff slack
      }
    }
  }
  return report;
}

}  // namespace bfdyn
