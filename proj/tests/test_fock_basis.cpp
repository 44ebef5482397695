#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bfdyn/errors.hpp"
#include "bfdyn/state.hpp"
#include "oracles.hpp"

using namespace bfdyn;

namespace {

JointBasisPtr bare(FockBasisPtr bosons) { return make_joint_basis(build_mode_set(1, 0), bosons); }

// Index of an occupation given per ModeSet mode.
std::size_t index_of(const FockBasis& b, std::vector<int> occ) {
  const auto r = b.rank(occ);
  REQUIRE(r.has_value());
  return *r;
}

// Dense matrix of a single ladder operator on an excitation basis.
oracle::Dense ladder_matrix(const JointBasisPtr& basis, std::size_t mode, bool create) {
  const auto d = static_cast<Eigen::Index>(basis->dimension());
  oracle::Dense out = oracle::Dense::Zero(d, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    // Creation on states at the cap would leave the basis; those columns stay zero.
    if (create && basis->excitation_count(static_cast<std::size_t>(c)) == basis->bosons().total()) {
      continue;
    }
    const auto e = StateVector::basis_state(basis, static_cast<std::size_t>(c));
    out.col(c) = (create ? apply_create(e, mode) : apply_annihilate(e, mode)).amplitudes();
  }
  return out;
}

// Brute-force count of occupation vectors with the given total constraint.
std::size_t brute_count(int slots, int total, bool exact) {
  std::size_t count = 0;
  std::vector<int> occ(static_cast<std::size_t>(slots), 0);
  while (true) {
    int sum = 0;
    for (int o : occ) sum += o;
    if (exact ? sum == total : sum <= total) ++count;
    std::size_t i = 0;
    while (i < occ.size() && ++occ[i] > total) occ[i++] = 0;
    if (i == occ.size()) return count;
  }
}

}  // namespace

TEST_CASE("sector and excitation dimensions") {
  CHECK(FockBasis::sector(build_mode_set(1, 1), 2)->dimension() == 6);
  const auto single = FockBasis::sector(build_mode_set(1, 0), 5);
  CHECK(single->dimension() == 1);
  CHECK(single->occupation(0)[0] == 5);
  CHECK(FockBasis::sector(build_mode_set(1, 2), 20)->dimension() == 10626);
  CHECK(brute_count(5, 20, true) == 10626);

  CHECK(FockBasis::excitations(build_mode_set(1, 1), 2)->dimension() == 6);
  CHECK(FockBasis::excitations(build_mode_set(1, 1), 0)->dimension() == 1);
  CHECK(FockBasis::excitations(build_mode_set(2, 1), 3)->dimension() == 165);
  CHECK(brute_count(8, 3, false) == 165);

  CHECK(FockBasis::sector_dimension(5, 20) == 10626);
  CHECK(FockBasis::excitation_dimension(8, 3) == 165);
  CHECK_THROWS_AS(FockBasis::sector_dimension(27, 30, 1000), DimensionLimitError);
}

TEST_CASE("rank and unrank are inverse on random indices") {
  std::mt19937_64 rng(7);
  const FockBasisPtr bases[] = {FockBasis::sector(build_mode_set(1, 2), 9),
                                FockBasis::sector(build_mode_set(2, 1), 4),
                                FockBasis::excitations(build_mode_set(2, 1), 4),
                                FockBasis::excitations(build_mode_set(1, 3), 6)};
  for (const auto& b : bases) {
    std::uniform_int_distribution<std::size_t> pick(0, b->dimension() - 1);
    std::vector<int> full(b->modes().size());
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t i = pick(rng);
      b->full_occupation(i, full);
      CHECK(b->rank(full) == i);
      const auto slots = b->unrank(i);
      const auto occ = b->occupation(i);
      for (std::size_t s = 0; s < slots.size(); ++s) CHECK(slots[s] == occ[s]);
    }
  }
  const auto ex = FockBasis::excitations(build_mode_set(1, 1), 2);
  CHECK(ex->rank(std::vector<int>{0, 0, 0}) == 0);  // vacuum first
  CHECK_FALSE(ex->rank(std::vector<int>{0, 1, 0}).has_value());  // condensate not tracked
  CHECK_FALSE(ex->rank(std::vector<int>{2, 0, 1}).has_value());  // over the cap
}

TEST_CASE("single-mode annihilation and creation") {
  const auto three = bare(FockBasis::sector(build_mode_set(1, 0), 3));
  const auto psi = StateVector::basis_state(three, 0);
  const auto out = apply_annihilate(psi, 0);
  CHECK(out.basis().bosons().total() == 2);
  REQUIRE(out.size() == 1);
  CHECK(std::abs(out.amplitudes()(0) - std::sqrt(3.0)) < 1e-15);
  CHECK(apply_create(psi, 0).basis().bosons().total() == 4);
  CHECK(std::abs(apply_create(psi, 0).amplitudes()(0) - 2.0) < 1e-15);

  const auto ex = make_joint_basis(build_mode_set(1, 0), FockBasis::excitations(build_mode_set(1, 1), 3));
  const auto vac = StateVector::basis_state(ex, 0);
  CHECK(apply_annihilate(vac, 0).norm() == 0.0);
  const auto one = apply_create(vac, 2);
  CHECK(one.norm() == doctest::Approx(1.0));
  const auto idx = index_of(ex->bosons(), {0, 0, 1});
  CHECK(std::abs(one.amplitudes()(static_cast<Eigen::Index>(idx)) - 1.0) < 1e-15);

  // Creation out of the cap is an error at this level.
  const auto full = StateVector::basis_state(ex, index_of(ex->bosons(), {3, 0, 0}));
  CHECK_THROWS(apply_create(full, 0));
  CHECK_THROWS(apply_annihilate(vac, 1));  // condensate is not an excitation mode
}

TEST_CASE("a^* a is the number of quanta and a a^* is one more") {
  const auto ex = make_joint_basis(build_mode_set(1, 0), FockBasis::excitations(build_mode_set(1, 2), 4));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (std::size_t mode : ex->bosons().slots()) {
    // Random state restricted to N+ <= 3 so creation has headroom.
    auto psi = StateVector::zero(ex);
    for (std::size_t i = 0; i < ex->dimension(); ++i) {
      if (ex->excitation_count(i) <= 3) psi.amplitudes()(static_cast<Eigen::Index>(i)) = Complex(g(rng), g(rng));
    }
    const auto num = apply_create(apply_annihilate(psi, mode), mode);
    const auto up = apply_annihilate(apply_create(psi, mode), mode);
    std::vector<int> occ(5);
    for (std::size_t i = 0; i < ex->dimension(); ++i) {
      ex->bosons().full_occupation(i, occ);
      const Complex a = psi.amplitudes()(static_cast<Eigen::Index>(i));
      CHECK(std::abs(num.amplitudes()(static_cast<Eigen::Index>(i)) - double(occ[mode]) * a) < 1e-12);
      CHECK(std::abs(up.amplitudes()(static_cast<Eigen::Index>(i)) - double(occ[mode] + 1) * a) < 1e-12);
    }
  }
}

TEST_CASE("canonical commutation relations as matrices below the cap") {
  const int cap = 4;
  const auto ex = make_joint_basis(build_mode_set(1, 0), FockBasis::excitations(build_mode_set(1, 1), cap));
  const auto d = static_cast<Eigen::Index>(ex->dimension());
  std::vector<Eigen::Index> below;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (ex->excitation_count(static_cast<std::size_t>(i)) <= cap - 1) below.push_back(i);
  }
  for (std::size_t j : ex->bosons().slots()) {
    for (std::size_t k : ex->bosons().slots()) {
      const auto aj = ladder_matrix(ex, j, false);
      const auto ak = ladder_matrix(ex, k, false);
      const auto ck = ladder_matrix(ex, k, true);
      const oracle::Dense ccr = aj * ck - ck * aj;
      const oracle::Dense aa = aj * ak - ak * aj;
      for (auto r : below) {
        for (auto c : below) {
          const double expect = (j == k && r == c) ? 1.0 : 0.0;
          CHECK(std::abs(ccr(r, c) - expect) < 1e-13);
          CHECK(std::abs(aa(r, c)) < 1e-13);
        }
      }
    }
  }
}

TEST_CASE("sum of ||a_j a_k psi||^2 on |n_p = 3> is 3 * 2") {
  const auto ex = make_joint_basis(build_mode_set(1, 0), FockBasis::excitations(build_mode_set(1, 1), 3));
  const auto psi = StateVector::basis_state(ex, index_of(ex->bosons(), {0, 0, 3}));
  double lhs = 0.0;
  for (std::size_t j : ex->bosons().slots()) {
    for (std::size_t k : ex->bosons().slots()) {
      lhs += std::pow(apply_annihilate(apply_annihilate(psi, k), j).norm(), 2);
    }
  }
  CHECK(lhs == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("number operator and total momentum") {
  const auto modes = build_mode_set(1, 1);
  const auto ex = make_joint_basis(modes, FockBasis::excitations(modes, 2));
  CHECK(number_operator(*ex)[0] == 0.0);

  const int n = 5;
  const auto sec = bare(FockBasis::sector(modes, n));
  const auto counts = number_operator(*sec);
  CHECK(counts[index_of(sec->bosons(), {0, n, 0})] == 0.0);
  CHECK(counts[index_of(sec->bosons(), {0, n - 2, 2})] == 2.0);

  // tracer q = 1 with one excitation at -1
  const auto i = ex->index(*modes->index_of(Momentum{{1, 0, 0}}), index_of(ex->bosons(), {1, 0, 0}));
  CHECK(total_momentum(*ex)[i] == Momentum{});
  CHECK(ex->total_momentum(i) == Momentum{});
}

TEST_CASE("states carry their basis and refuse foreign ones") {
  const auto modes = build_mode_set(1, 1);
  const auto a = make_joint_basis(modes, FockBasis::excitations(modes, 2));
  const auto b = make_joint_basis(modes, FockBasis::excitations(modes, 3));
  const auto x = StateVector::basis_state(a, 1);
  const auto y = StateVector::basis_state(b, 1);
  CHECK_THROWS_AS(inner(x, y), BasisMismatchError);

  const auto up = embed(x, b);
  CHECK(up.norm() == doctest::Approx(1.0));
  CHECK(embed(up, a).amplitudes() == x.amplitudes());
  const auto top = StateVector::basis_state(b, b->dimension() - 1);
  CHECK_THROWS(embed(top, a));
  CHECK(embed(top, a, true).norm() == 0.0);
}

TEST_CASE("state checkpoints round-trip exactly") {
  const auto modes = build_mode_set(1, 1);
  const auto a = make_joint_basis(modes, FockBasis::excitations(modes, 3));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  auto psi = StateVector::zero(a);
  for (auto& z : psi.amplitudes()) z = Complex(g(rng), g(rng));
  std::stringstream buf;
  write_state(buf, psi);
  const auto back = read_state(buf, a);
  CHECK(back.amplitudes() == psi.amplitudes());

  std::stringstream again;
  write_state(again, psi);
  const auto other = make_joint_basis(modes, FockBasis::excitations(modes, 2));
  CHECK_THROWS(read_state(again, other));
}
