#include <doctest.h>

#include <cmath>
#include <random>

#include "bfdyn/blocks.hpp"
#include "bfdyn/errors.hpp"
#include "oracles.hpp"

using namespace bfdyn;

namespace {

Model make_model(int n, const std::string& v, const std::string& w, int tracer_cutoff = 1,
                 double v0 = 1.0, double w0 = 1.0, int dim = 1, int cutoff = 1) {
  const auto modes = build_mode_set(dim, cutoff);
  ModelParams p;
  p.n_bosons = n;
  p.tracer_cutoff = tracer_cutoff;
  p.tracer_mass = 0.7;
  return Model::make(modes, preset_potential(v, PotentialKind::pair, *modes, v0),
                     preset_potential(w, PotentialKind::tracer, *modes, w0), p);
}

std::size_t joint(const JointBasis& b, const Momentum& q, std::vector<int> occ) {
  const auto t = b.tracer_modes().index_of(q);
  const auto r = b.bosons().rank(occ);
  REQUIRE(t.has_value());
  REQUIRE(r.has_value());
  return b.index(*t, *r);
}

Complex entry(const SparseHermitianOperator& h, std::size_t row, std::size_t col) {
  return h.matrix().coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
}

const Momentum q0{};
Momentum m1(int a) { return {{a, 0, 0}}; }

}  // namespace

TEST_CASE("free model: H_N is the diagonal kinetic energy") {
  const auto model = make_model(3, "zero", "zero", 2);
  const auto h = assemble_full(model);
  const auto& b = h.basis();
  std::vector<int> occ(3);
  for (std::size_t i = 0; i < b.dimension(); ++i) {
    b.bosons().full_occupation(b.boson_index(i), occ);
    double e = kinetic_energy(b.tracer_modes()[b.tracer_index(i)]) / (2.0 * 0.7);
    for (std::size_t k = 0; k < 3; ++k) e += kinetic_energy((*model.modes)[k]) * occ[k];
    CHECK(std::abs(entry(h, i, i) - e) < 1e-12);
  }
  for (Eigen::Index k = 0; k < h.matrix().outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(h.matrix(), k); it; ++it) CHECK(it.row() == it.col());
  }
}

TEST_CASE("H_N pair-scattering element at N = 2 is sqrt(2) V(1)") {
  const auto model = make_model(2, "soft", "zero");
  const auto h = assemble_full(model);
  const auto& b = h.basis();
  const Complex expect = std::sqrt(2.0) * model.pair(m1(1));
  CHECK(std::abs(entry(h, joint(b, q0, {1, 0, 1}), joint(b, q0, {0, 2, 0})) - expect) < 1e-14);
  // Same value from the first-quantized construction.
  const auto fq = oracle::first_quantized_hamiltonian(model);
  CHECK(std::abs(fq(static_cast<Eigen::Index>(joint(b, q0, {1, 0, 1})),
                    static_cast<Eigen::Index>(joint(b, q0, {0, 2, 0}))) - expect) < 1e-14);
}

TEST_CASE("H_N agrees with the first-quantized Hamiltonian projected on symmetric states") {
  struct Case {
    int n;
    std::string v, w;
    int dim, cutoff, tracer_cutoff;
  };
  const Case cases[] = {{2, "soft", "soft", 1, 1, 1},  {3, "soft", "skew", 1, 1, 2},
                        {4, "gauss", "skew", 1, 1, 1}, {2, "soft", "skew", 1, 2, 1},
                        {2, "gauss", "soft", 2, 1, 1}};
  for (const auto& c : cases) {
    CAPTURE(c.n);
    CAPTURE(c.dim);
    const auto model = make_model(c.n, c.v, c.w, c.tracer_cutoff, 1.3, 0.8, c.dim, c.cutoff);
    const auto h = oracle::dense(assemble_full(model).matrix());
    const auto fq = oracle::first_quantized_hamiltonian(model);
    REQUIRE(h.rows() == fq.rows());
    CHECK((h - fq).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("every Hamiltonian is exactly block-diagonal in total momentum") {
  const auto model = make_model(4, "soft", "skew", 2);
  const auto full = assemble_full(model);
  const auto aux = assemble_aux(model);
  const auto bf = assemble_bf(model, 5);
  const auto bog = assemble_bog(model.modes, model.pair, 5);
  for (const auto* h : {&full, &aux, &bf, &bog}) {
    CHECK(off_block_magnitude(h->as_operator()) == 0.0);
    CHECK(momentum_commutator_magnitude(h->as_operator()) == 0.0);
    CHECK(h->hermiticity_deviation() <= SparseHermitianOperator::kHermiticityTolerance);
    const BlockDecomposition blocks(*h);
    std::size_t total = 0;
    for (const auto& blk : blocks.blocks()) total += blk.indices.size();
    CHECK(total == h->dimension());
  }
}

TEST_CASE("free-model blocks are one-dimensional on momentum-definite states") {
  const auto modes = build_mode_set(1, 1);
  const auto bog = assemble_bog(modes, preset_potential("zero", PotentialKind::pair, *modes, 0.0), 2);
  const BlockDecomposition blocks(bog);
  // excitation vacuum, |1_1>, |1_-1>, |2_1>, |2_-1>, |1_1 1_-1>: momenta 0, 1, -1, 2, -2, 0
  CHECK(blocks.blocks().size() == 5);
  for (const auto& blk : blocks.blocks()) {
    CHECK(blk.matrix.rows() == static_cast<Eigen::Index>(blk.indices.size()));
  }
}

TEST_CASE("U_N is a unit-coefficient relabeling") {
  for (int n = 1; n <= 20; ++n) {
    const auto model = make_model(n, "soft", "soft");
    const auto sector = sector_space(model);
    const auto ex = excitation_space(model, n);
    const auto u = assemble_u_map(sector, ex);
    const auto uu = oracle::dense((u.adjoint() * u).matrix());
    CHECK((uu - oracle::Dense::Identity(uu.rows(), uu.cols())).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(u.matrix().nonZeros() == static_cast<Eigen::Index>(sector->dimension()));
    for (Eigen::Index k = 0; k < u.matrix().outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(u.matrix(), k); it; ++it) CHECK(it.value() == Complex(1.0));
    }
  }
  const auto model = make_model(6, "soft", "soft");
  const auto sector = sector_space(model);
  const auto ex = excitation_space(model, 6);
  const auto u = assemble_u_map(sector, ex);
  auto at = [&](std::vector<int> so, std::vector<int> eo) {
    return u.matrix().coeff(static_cast<Eigen::Index>(joint(*ex, q0, eo)),
                            static_cast<Eigen::Index>(joint(*sector, q0, so)));
  };
  CHECK(at({0, 6, 0}, {0, 0, 0}) == Complex(1.0));
  CHECK(at({1, 4, 1}, {1, 0, 1}) == Complex(1.0));
  CHECK_THROWS(assemble_u_map(sector, excitation_space(model, 5)));
}

TEST_CASE("H^aux pair-creation entry is 2 V(p) sqrt((N-1) N) / N") {
  for (int n : {2, 3, 5}) {
    const auto model = make_model(n, "soft", "zero");
    const auto aux = assemble_aux(model);
    const auto& b = aux.basis();
    const Complex expect = 2.0 * model.pair(m1(1)) * std::sqrt((n - 1.0) * n) / double(n);
    CHECK(std::abs(entry(aux, joint(b, q0, {0, 0, 0}), joint(b, q0, {1, 0, 1})) - expect) < 1e-14);
    CHECK(std::abs(entry(aux, joint(b, q0, {1, 0, 1}), joint(b, q0, {0, 0, 0})) - expect) < 1e-14);
  }
}

TEST_CASE("H^aux with V = 0 couples vacuum and one excitation with sqrt(N - N+) weights") {
  const int n = 4;
  const auto model = make_model(n, "zero", "skew", 2);
  const auto aux = assemble_aux(model);
  const auto& b = aux.basis();
  // a(W_x) sqrt(N - N+) / sqrt(N) from q with one excitation at p to q + p with vacuum:
  // the excitation is absorbed, W^(p) appears, condensate factor sqrt(N - 0)/sqrt(N) = 1.
  for (int p : {-1, 1}) {
    for (int q = -2; q <= 2; ++q) {
      if (std::abs(q - p) > 2) continue;
      std::vector<int> one(3, 0);
      one[static_cast<std::size_t>(p + 1)] = 1;
      const auto row = joint(b, m1(q), {0, 0, 0});
      const auto col = joint(b, m1(q - p), one);
      CHECK(std::abs(entry(aux, row, col) - model.tracer(m1(p))) < 1e-14);
      CHECK(std::abs(entry(aux, col, row) - std::conj(model.tracer(m1(p)))) < 1e-14);
    }
  }
  const auto idx = joint(b, m1(1), {1, 0, 0});
  CHECK(std::abs(entry(aux, idx, idx) - (kinetic_energy(m1(1)) / 1.4 + kinetic_energy(m1(1)))) < 1e-12);
}

TEST_CASE("H^Bog pair-creation entry is 2 V(p) and V = 0 leaves dGamma(-Laplacian)") {
  const auto modes = build_mode_set(1, 2);
  const auto v = preset_potential("soft", PotentialKind::pair, *modes, 3.0);
  const auto bog = assemble_bog(modes, v, 4);
  const auto& b = bog.basis();
  for (int p : {1, 2}) {
    std::vector<int> occ(5, 0);
    occ[static_cast<std::size_t>(2 + p)] = 1;
    occ[static_cast<std::size_t>(2 - p)] = 1;
    CHECK(std::abs(entry(bog, joint(b, q0, occ), joint(b, q0, {0, 0, 0, 0, 0})) - 2.0 * v(m1(p))) < 1e-14);
  }
  const auto free = assemble_bog(modes, preset_potential("zero", PotentialKind::pair, *modes, 0), 3);
  for (Eigen::Index k = 0; k < free.matrix().outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(free.matrix(), k); it; ++it) CHECK(it.row() == it.col());
  }
}

TEST_CASE("H^BF field-creation entry is W(-p) with the tracer recoiling by -p") {
  const auto model = make_model(3, "zero", "skew", 2);
  const auto bf = assemble_bf(model, 3);
  const auto& b = bf.basis();
  for (int p : {-1, 1}) {
    for (int q : {-1, 0, 1}) {
      std::vector<int> one(3, 0);
      one[static_cast<std::size_t>(p + 1)] = 1;
      const auto row = joint(b, m1(q - p), one);
      const auto col = joint(b, m1(q), {0, 0, 0});
      CHECK(std::abs(entry(bf, row, col) - model.tracer(m1(-p))) < 1e-14);
    }
  }
  // W = 0: tracer kinetic energy plus H^Bog, no tracer-boson coupling.
  const auto decoupled = make_model(3, "soft", "zero", 1);
  const auto bf0 = assemble_bf(decoupled, 3);
  const auto bog = assemble_bog(decoupled.modes, decoupled.pair, 3, decoupled.tracer_modes);
  const auto tk = terms::tracer_kinetic(bog.basis_ptr(), decoupled.params.tracer_mass);
  const oracle::Dense diff = oracle::dense(bf0.matrix()) - oracle::dense(bog.matrix()) - oracle::dense(tk.matrix());
  CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("frozen condensate factors turn H^aux into H^BF at cap N") {
  for (int n = 2; n <= 6; ++n) {
    const auto model = make_model(n, "soft", "skew", 2, 2.0, 1.5);
    const auto frozen = assemble_aux(model, CondensateFactors::frozen);
    const auto bf = assemble_bf(model, n);
    CHECK(relative_frobenius_deviation(frozen.matrix(), bf.matrix()) < 1e-14);
  }
}

TEST_CASE("dGamma(Q W Q) on one excitation is the one-particle matrix with tracer shifts") {
  const auto model = make_model(3, "zero", "skew", 2);
  const auto ex = excitation_space(model, 2);
  const auto dg = assemble_dgamma_w(model.tracer, ex);
  CHECK(dg.hermiticity_deviation() <= 1e-12);
  // |q, 1_k> -> |q + (k - j), 1_j> with W^(k - j), j, k excited modes.
  for (int j : {-1, 1}) {
    for (int k : {-1, 1}) {
      std::vector<int> oj(3, 0), ok(3, 0);
      oj[static_cast<std::size_t>(j + 1)] = 1;
      ok[static_cast<std::size_t>(k + 1)] = 1;
      const auto col = joint(*ex, q0, ok);
      const auto row = joint(*ex, m1(k - j), oj);
      CHECK(std::abs(entry(dg, row, col) - model.tracer(m1(k - j))) < 1e-14);
    }
  }
  CHECK(assemble_dgamma_w(preset_potential("zero", PotentialKind::tracer, *model.modes, 0), ex)
            .matrix()
            .nonZeros() == 0);
}

TEST_CASE("a pair potential that is not real in position space fails the Hermiticity certificate") {
  // A real but non-even table still gives Hermitian operators (only V(p) + V(-p)
  // enters each word sum); breaking realness does not.
  const auto modes = build_mode_set(1, 1);
  const PotentialEntry raw[] = {{m1(1), {0.3, 0.2}}, {m1(-1), {0.3, 0.2}}};
  const auto bad = Potential::unchecked(PotentialKind::pair, 1, 2, raw);
  ModelParams p;
  p.n_bosons = 3;
  const auto model = Model::make(modes, bad, preset_potential("soft", PotentialKind::tracer, *modes, 1), p);
  CHECK_THROWS_AS(assemble_full(model), HermiticityError);
}
