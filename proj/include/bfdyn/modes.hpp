#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bfdyn {

inline constexpr int kMaxDimension = 3;

/// Integer momentum vector on the unit torus. Components beyond the active
/// dimension are kept at zero, so comparisons and hashing ignore them.
struct Momentum {
  std::array<int, kMaxDimension> c{};

  friend constexpr Momentum operator+(const Momentum& a, const Momentum& b) {
    return {{a.c[0] + b.c[0], a.c[1] + b.c[1], a.c[2] + b.c[2]}};
  }
  friend constexpr Momentum operator-(const Momentum& a, const Momentum& b) {
    return {{a.c[0] - b.c[0], a.c[1] - b.c[1], a.c[2] - b.c[2]}};
  }
  friend constexpr Momentum operator-(const Momentum& a) { return {{-a.c[0], -a.c[1], -a.c[2]}}; }
  friend constexpr Momentum operator*(int s, const Momentum& a) {
    return {{s * a.c[0], s * a.c[1], s * a.c[2]}};
  }
  friend constexpr bool operator==(const Momentum&, const Momentum&) = default;
  friend constexpr auto operator<=>(const Momentum&, const Momentum&) = default;

  constexpr int norm_sq() const { return c[0] * c[0] + c[1] * c[1] + c[2] * c[2]; }
  int max_norm() const;
  bool is_zero() const { return c[0] == 0 && c[1] == 0 && c[2] == 0; }
  std::string to_string(int dim) const;
};

/// Eigenvalue of -Laplacian on the plane wave exp(2 pi i k.y): 4 pi^2 |k|^2.
double kinetic_energy(const Momentum& k);

/// Plane-wave modes with max-norm cutoff, in lexicographic order.
class ModeSet {
 public:
  /// Upper bound on the number of one-particle modes a ModeSet may hold.
  static constexpr std::size_t kDefaultModeLimit = 4096;

  ModeSet(int dim, int cutoff, std::size_t mode_limit = kDefaultModeLimit);

  int dim() const { return dim_; }
  int cutoff() const { return cutoff_; }
  std::size_t size() const { return modes_.size(); }
  std::size_t zero_index() const { return zero_index_; }
  const Momentum& operator[](std::size_t i) const { return modes_[i]; }
  const std::vector<Momentum>& momenta() const { return modes_; }

  /// Position of k in the list, or nullopt when k lies outside the cutoff.
  std::optional<std::size_t> index_of(const Momentum& k) const;
  std::size_t negated(std::size_t i) const { return modes_.size() - 1 - i; }

  /// Every mode except k = 0, in list order.
  std::vector<std::size_t> excited_modes() const;

  std::string descriptor() const;

 private:
  int dim_;
  int cutoff_;
  std::vector<Momentum> modes_;
  std::size_t zero_index_ = 0;
};

using ModeSetPtr = std::shared_ptr<const ModeSet>;

ModeSetPtr build_mode_set(int dim, int cutoff,
                          std::size_t mode_limit = ModeSet::kDefaultModeLimit);

/// Torus-side-one model parameters. Coupling scalings are derived from N.
struct ModelParams {
  int n_bosons = 1;
  double tracer_mass = 1.0;
  int tracer_cutoff = 0;

  double boson_coupling() const { return 1.0 / n_bosons; }
  double tracer_coupling() const;
  void validate() const;
};

}  // namespace bfdyn
