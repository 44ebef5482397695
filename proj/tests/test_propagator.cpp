#include <doctest.h>

#include <cmath>
#include <random>

#include "bfdyn/diagnostics.hpp"
#include "bfdyn/errors.hpp"
#include "oracles.hpp"

using namespace bfdyn;

namespace {

ComplexVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(static_cast<Eigen::Index>(n));
  for (auto& z : v) z = Complex(g(rng), g(rng));
  return v / v.norm();
}

// exp(-iHt) psi from a dense eigendecomposition computed here, not by the library.
ComplexVector reference_expm(const SparseMatrix& h, const ComplexVector& psi, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{oracle::Dense(h)};
  const ComplexVector c = es.eigenvectors().adjoint() * psi;
  ComplexVector phased = c;
  for (Eigen::Index i = 0; i < c.size(); ++i) phased(i) *= std::polar(1.0, -es.eigenvalues()(i) * t);
  return es.eigenvectors() * phased;
}

Model soft_model(int n) {
  const auto modes = build_mode_set(1, 1);
  ModelParams p;
  p.n_bosons = n;
  p.tracer_cutoff = 2;
  return Model::make(modes, preset_potential("soft", PotentialKind::pair, *modes, 5.0),
                     preset_potential("soft", PotentialKind::tracer, *modes, 5.0), p);
}

}  // namespace

TEST_CASE("eigenstates of a diagonal operator pick up a phase") {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (int i = 0; i < 8; ++i) trip.emplace_back(i, i, Complex(0.7 * i - 2.0));
  SparseMatrix h(8, 8);
  h.setFromTriplets(trip.begin(), trip.end());
  for (int i = 0; i < 8; ++i) {
    ComplexVector e = ComplexVector::Zero(8);
    e(i) = 1.0;
    PropagationConfig cfg;
    cfg.time = 1.7;
    const auto out = evolve_vector(h, e, cfg);
    CHECK(std::abs(out(i) - std::polar(1.0, -(0.7 * i - 2.0) * 1.7)) < 1e-12);
    CHECK(std::abs(out.norm() - 1.0) < 1e-14);
  }
}

TEST_CASE("zero time is the identity") {
  std::mt19937_64 rng(1);
  const auto h = random_hermitian(50, 5, rng);
  const auto psi = random_vector(50, rng);
  PropagationConfig cfg;
  cfg.time = 0.0;
  CHECK((evolve_vector(h, psi, cfg) - psi).norm() == 0.0);
  CHECK((dense_expm_vector(h, psi, 0.0) - psi).norm() < 1e-14);
}

TEST_CASE("Krylov and dense propagation agree on random Hermitian operators") {
  std::mt19937_64 rng(2);
  for (const std::size_t dim : {2u, 17u, 200u, 600u}) {
    const auto h = random_hermitian(dim, 8, rng);
    const auto psi = random_vector(dim, rng);
    for (double t : {-2.0, 0.3, 2.0}) {
      PropagationConfig cfg;
      cfg.time = t;
      const auto k = evolve_vector(h, psi, cfg);
      const auto ref = reference_expm(h, psi, t);
      CHECK((k - ref).norm() <= 1e-8);
      CHECK((dense_expm_vector(h, psi, t) - ref).norm() <= 1e-11);
      CHECK(std::abs(k.norm() - 1.0) <= 1e-9 * (1 + std::abs(t)));
    }
  }
}

TEST_CASE("time reversal and conservation on physical Hamiltonians") {
  const auto model = soft_model(4);
  const auto h = assemble_full(model);
  std::mt19937_64 rng(3);
  const StateVector psi(h.basis_ptr(), random_vector(h.dimension(), rng));
  for (double t : {-2.0, 1.0, 2.0}) {
    PropagationConfig cfg;
    cfg.time = t;
    const auto pc = check_propagation(h, psi, cfg, true);
    CHECK(pc.oracle_deviation <= 1e-8);
    CHECK(pc.norm_drift <= 1e-9 * (1 + std::abs(t)));
    CHECK(pc.energy_drift <= 1e-9 * (1 + std::abs(t)));
    CHECK(pc.reversal_error <= 1e-8);
    CHECK(pc.blocked_deviation <= 1e-9);
    CHECK(pc.momentum_drift <= 1e-10);
  }
}

TEST_CASE("blocked evolution matches unblocked evolution on random states") {
  const auto model = soft_model(5);
  const auto h = assemble_aux(model);
  const BlockDecomposition blocks(h);
  CHECK(blocks.blocks().size() > 1);
  std::mt19937_64 rng(4);
  const StateVector psi(h.basis_ptr(), random_vector(h.dimension(), rng));
  PropagationConfig cfg;
  cfg.time = 1.3;
  CHECK(distance(evolve_blocked(blocks, psi, cfg), evolve(h, psi, cfg)) <= 1e-9);
  CHECK(distance(evolve_blocked(blocks, psi, cfg), dense_expm(h, psi, 1.3)) <= 1e-9);
}

TEST_CASE("free model evolves by analytic phases") {
  const auto modes = build_mode_set(1, 1);
  ModelParams p;
  p.n_bosons = 3;
  p.tracer_cutoff = 1;
  const auto zero_v = preset_potential("zero", PotentialKind::pair, *modes, 0);
  const auto zero_w = preset_potential("zero", PotentialKind::tracer, *modes, 0);
  const auto h = assemble_full(Model::make(modes, zero_v, zero_w, p));
  std::mt19937_64 rng(5);
  const StateVector psi(h.basis_ptr(), random_vector(h.dimension(), rng));
  PropagationConfig cfg;
  cfg.time = 0.9;
  const auto out = evolve_blocked(BlockDecomposition(h), psi, cfg);
  for (std::size_t i = 0; i < h.dimension(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double e = h.matrix().coeff(ii, ii).real();
    CHECK(std::abs(out.amplitudes()(ii) - psi.amplitudes()(ii) * std::polar(1.0, -e * 0.9)) < 1e-10);
  }
}

TEST_CASE("propagation reports failure when the substep budget is exhausted") {
  std::mt19937_64 rng(6);
  SparseMatrix h = random_hermitian(300, 8, rng) * Complex(1e4);
  PropagationConfig cfg;
  cfg.time = 5.0;
  cfg.krylov_dim = 4;
  cfg.max_substeps = 3;
  CHECK_THROWS_AS(evolve_vector(h, random_vector(300, rng), cfg), PropagationError);

  PropagationConfig bad;
  bad.tolerance = 0.0;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad.tolerance = 1e-9;
  bad.krylov_dim = 1;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("dense oracle refuses oversized operators and foreign states") {
  SparseMatrix big(kDenseLimit + 1, kDenseLimit + 1);
  CHECK_THROWS_AS(dense_expm_vector(big, ComplexVector::Zero(kDenseLimit + 1), 1.0), DimensionLimitError);
  const auto model = soft_model(2);
  const auto h = assemble_full(model);
  const auto other = excitation_space(model, 2);
  PropagationConfig cfg;
  cfg.time = 1.0;
  CHECK_THROWS_AS(evolve(h, StateVector::zero(other), cfg), BasisMismatchError);
}
