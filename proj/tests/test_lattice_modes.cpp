#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "bfdyn/errors.hpp"
#include "bfdyn/potential.hpp"

using namespace bfdyn;

namespace {
Momentum m1(int a) { return {{a, 0, 0}}; }
Momentum m2(int a, int b) { return {{a, b, 0}}; }
}  // namespace

TEST_CASE("mode sets enumerate the max-norm box in lexicographic order") {
  const auto one = build_mode_set(1, 1);
  REQUIRE(one->size() == 3);
  CHECK(one->momenta()[0] == m1(-1));
  CHECK(one->momenta()[1] == m1(0));
  CHECK(one->momenta()[2] == m1(1));
  CHECK(one->zero_index() == 1);

  const auto two = build_mode_set(2, 1);
  CHECK(two->size() == 9);
  CHECK((*two)[two->zero_index()] == m2(0, 0));

  const auto bare = build_mode_set(1, 0);
  CHECK(bare->size() == 1);
  CHECK(bare->excited_modes().empty());
}

TEST_CASE("mode sets are closed under negation and the index map inverts the list") {
  for (int dim = 1; dim <= 3; ++dim) {
    const auto modes = build_mode_set(dim, 2);
    CHECK(modes->size() == static_cast<std::size_t>(std::pow(5, dim)));
    std::set<Momentum> seen;
    for (std::size_t i = 0; i < modes->size(); ++i) {
      const auto& k = (*modes)[i];
      seen.insert(k);
      CHECK((*modes)[modes->negated(i)] == -k);
      CHECK(modes->negated(modes->negated(i)) == i);
      CHECK(modes->index_of(k) == i);
      CHECK(kinetic_energy(k) == kinetic_energy(-k));
    }
    CHECK(seen.size() == modes->size());
    CHECK_FALSE(modes->index_of(Momentum{{3, 0, 0}}).has_value());
  }
}

TEST_CASE("bad mode set requests are rejected") {
  CHECK_THROWS_AS(build_mode_set(0, 1), InputError);
  CHECK_THROWS_AS(build_mode_set(4, 1), InputError);
  CHECK_THROWS_AS(build_mode_set(1, -1), InputError);
  CHECK_THROWS_AS(build_mode_set(3, 40), DimensionLimitError);
}

TEST_CASE("kinetic energy is 4 pi^2 |k|^2") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(kinetic_energy(m1(0)) == 0.0);
  CHECK(kinetic_energy(m1(1)) == doctest::Approx(39.4784176).epsilon(1e-9));
  CHECK(kinetic_energy(m2(1, 1)) == doctest::Approx(8.0 * pi2).epsilon(1e-15));
}

TEST_CASE("potential validation accepts the documented good tables") {
  const auto modes = build_mode_set(1, 1);
  const PotentialEntry v[] = {{m1(1), 0.5}, {m1(-1), 0.5}, {m1(0), 0.0}};
  const auto pot = validate_potential(v, PotentialKind::pair, *modes);
  CHECK(pot(m1(1)) == Complex(0.5));
  CHECK(pot(m1(0)) == Complex(0.0));
  CHECK(pot(m1(2)) == Complex(0.0));
  CHECK(pot.support() == 2);

  const PotentialEntry w[] = {{m1(1), {0.3, 0.1}}, {m1(-1), {0.3, -0.1}}};
  const auto tw = validate_potential(w, PotentialKind::tracer, *modes);
  CHECK(tw(m1(-1)) == Complex(0.3, -0.1));
}

TEST_CASE("potential validation rejects rather than repairs") {
  const auto modes = build_mode_set(1, 1);
  const PotentialEntry mean[] = {{m1(0), 0.1}, {m1(1), 0.5}, {m1(-1), 0.5}};
  CHECK_THROWS_WITH_AS(validate_potential(mean, PotentialKind::pair, *modes),
                       doctest::Contains("zero-mean"), InputError);

  const PotentialEntry complex_pair[] = {{m1(1), {0.3, 0.1}}, {m1(-1), {0.3, -0.1}}};
  CHECK_THROWS_AS(validate_potential(complex_pair, PotentialKind::pair, *modes), InputError);

  const PotentialEntry not_real[] = {{m1(1), {0.3, 0.1}}, {m1(-1), {0.3, 0.1}}};
  CHECK_THROWS_AS(validate_potential(not_real, PotentialKind::tracer, *modes), InputError);

  const PotentialEntry odd[] = {{m1(1), 0.5}, {m1(-1), 0.4}};
  CHECK_THROWS_AS(validate_potential(odd, PotentialKind::pair, *modes), InputError);

  const PotentialEntry far[] = {{m1(3), 0.5}, {m1(-3), 0.5}};
  CHECK_THROWS_AS(validate_potential(far, PotentialKind::pair, *modes), InputError);

  const PotentialEntry dup[] = {{m1(1), 0.5}, {m1(1), 0.5}, {m1(-1), 0.5}};
  CHECK_THROWS_AS(validate_potential(dup, PotentialKind::pair, *modes), InputError);

  // A deviation just inside the symmetry tolerance is accepted unchanged.
  const PotentialEntry close[] = {{m1(1), 0.5}, {m1(-1), 0.5 + 1e-13}};
  CHECK(validate_potential(close, PotentialKind::pair, *modes)(m1(-1)).real() == 0.5 + 1e-13);
}

TEST_CASE("presets") {
  const auto modes = build_mode_set(1, 1);
  const auto soft = preset_potential("soft", PotentialKind::pair, *modes, 1.0);
  CHECK(soft(m1(1)) == Complex(0.5));
  CHECK(soft(m1(-1)) == Complex(0.5));
  CHECK(soft(m1(0)) == Complex(0.0));
  CHECK(soft(m1(2)) == Complex(0.2));

  CHECK(preset_potential("zero", PotentialKind::pair, *modes, 3.0).is_zero());
  CHECK_THROWS_AS(preset_potential("nope", PotentialKind::pair, *modes, 1.0), InputError);

  // The skewed tracer preset is real in position space but not even.
  const auto skew = preset_potential("skew", PotentialKind::tracer, *modes, 1.0);
  CHECK(std::abs(skew(m1(1)) - std::conj(skew(m1(-1)))) < 1e-15);
  CHECK(std::abs(skew(m1(1)) - skew(m1(-1))) > 0.1);
  CHECK_THROWS_AS(preset_potential("skew", PotentialKind::pair, *modes, 1.0), InputError);

  // A strongly attractive pair potential is still a valid table.
  CHECK_NOTHROW(preset_potential("soft", PotentialKind::pair, *modes, -10.0));
}

TEST_CASE("Parseval: l2 norm of the table is the sum of squared coefficients") {
  const auto modes = build_mode_set(2, 1);
  const auto g = preset_potential("gauss", PotentialKind::pair, *modes, 2.0);
  double sum = 0.0;
  for (const auto& e : g.entries()) sum += std::norm(e.value);
  CHECK(g.l2_norm_squared() == doctest::Approx(sum).epsilon(1e-14));
}

TEST_CASE("potential tables round-trip through the text format") {
  const auto modes = build_mode_set(2, 1);
  const auto w = preset_potential("skew", PotentialKind::tracer, *modes, 1.5);
  std::stringstream buf;
  write_potential_table(buf, w);
  const auto raw = read_potential_table(buf, 2);
  const auto back = validate_potential(raw, PotentialKind::tracer, *modes);
  for (const auto& e : w.entries()) CHECK(back(e.p) == e.value);

  std::istringstream dup("# comment\n1 0.5 0\n1 0.5 0\n");
  CHECK_THROWS_AS(read_potential_table(dup, 1), InputError);
  std::istringstream bad("1 x 0\n");
  CHECK_THROWS_AS(read_potential_table(bad, 1), InputError);
  std::istringstream shortline("1 0.5\n");
  CHECK_THROWS_AS(read_potential_table(shortline, 1), InputError);
}

TEST_CASE("model parameters derive the couplings from N") {
  ModelParams p;
  p.n_bosons = 16;
  CHECK(p.boson_coupling() == 1.0 / 16);
  CHECK(p.tracer_coupling() == 0.25);
  p.n_bosons = 0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p.n_bosons = 2;
  p.tracer_mass = 0.0;
  CHECK_THROWS_AS(p.validate(), InputError);
}
