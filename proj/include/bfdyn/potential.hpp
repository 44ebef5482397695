#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bfdyn/modes.hpp"

namespace bfdyn {

using Complex = std::complex<double>;

/// Boson-boson pair potential V or boson-tracer potential W.
enum class PotentialKind { pair, tracer };

std::string_view to_string(PotentialKind kind);

struct PotentialEntry {
  Momentum p;
  Complex value;
};

/// Fourier table of a band-limited real potential on the unit torus,
/// V(y) = sum_p V^(p) exp(2 pi i p.y). Momenta outside the table are zero.
class Potential {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  Potential(PotentialKind kind, int dim, int support);

  PotentialKind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// Max-norm radius of the coefficient table (twice the mode cutoff).
  int support() const { return support_; }

  Complex operator()(const Momentum& p) const;
  bool is_zero() const;

  /// Nonzero coefficients in lexicographic momentum order.
  std::vector<PotentialEntry> entries() const;

  /// Squared L2 norm of the position-space function (sum of |V^(p)|^2).
  double l2_norm_squared() const;

  /// Builds a table without any symmetry or zero-mean check. Only meant for
  /// mutation tests that need a deliberately broken potential.
  static Potential unchecked(PotentialKind kind, int dim, int support,
                             std::span<const PotentialEntry> entries);

 private:
  std::size_t slot(const Momentum& p) const;
  bool in_support(const Momentum& p) const;

  PotentialKind kind_;
  int dim_;
  int support_;
  std::vector<Complex> table_;
};

/// Accepts a raw coefficient list only if it describes a real, zero-mean
/// potential (and an even one for kind == pair) supported within twice the
/// mode cutoff. Invalid tables are rejected, never symmetrized.
Potential validate_potential(std::span<const PotentialEntry> raw, PotentialKind kind,
                             const ModeSet& modes);

/// Named presets: "zero", "soft" (s / (1 + |p|^2)), "gauss" (s exp(-|p|^2 / 2)),
/// "skew" (soft profile times exp(i pi p_1 / 4), real but not even).
Potential preset_potential(std::string_view name, PotentialKind kind, const ModeSet& modes,
                           double strength);

std::vector<std::string> preset_names();

/// Parses `p_1 ... p_d re im` lines; `#` starts a comment. Duplicate
/// momenta are an error.
std::vector<PotentialEntry> read_potential_table(std::istream& in, int dim);
std::vector<PotentialEntry> read_potential_file(const std::string& path, int dim);

void write_potential_table(std::ostream& out, const Potential& potential);

}  // namespace bfdyn
