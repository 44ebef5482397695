#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfdyn/modes.hpp"

namespace bfdyn {

/// Default upper bound on any enumerated basis.
inline constexpr std::size_t kDefaultDimensionLimit = 5'000'000;

enum class FockKind {
  sector,      // all modes, total occupation exactly N
  excitation,  // nonzero modes only, total occupation at most the cap
};

/// Occupation-number basis with perfect combinatorial ranking.
///
/// Occupations are stored per *slot*; slots are ModeSet indices (all modes
/// for a sector basis, the excited modes for an excitation basis). States
/// are ordered lexicographically in slot order, so the excitation vacuum has
/// index 0 and rank/unrank cost O(number of slots).
class FockBasis {
 public:
  static std::shared_ptr<const FockBasis> sector(ModeSetPtr modes, int n_bosons,
                                                 std::size_t limit = kDefaultDimensionLimit);
  static std::shared_ptr<const FockBasis> excitations(ModeSetPtr modes, int cap,
                                                      std::size_t limit = kDefaultDimensionLimit);

  /// Dimension without enumerating; throws DimensionLimitError past `limit`.
  static std::size_t sector_dimension(std::size_t n_modes, int n_bosons,
                                      std::size_t limit = kDefaultDimensionLimit);
  static std::size_t excitation_dimension(std::size_t n_excited_modes, int cap,
                                          std::size_t limit = kDefaultDimensionLimit);

  FockKind kind() const { return kind_; }
  /// N for a sector basis, the cap M for an excitation basis.
  int total() const { return total_; }
  std::size_t dimension() const { return dimension_; }
  const ModeSet& modes() const { return *modes_; }
  const ModeSetPtr& modes_ptr() const { return modes_; }
  std::span<const std::size_t> slots() const { return slots_; }
  bool tracks_mode(std::size_t mode) const { return slot_of_mode_[mode] >= 0; }

  std::span<const std::uint16_t> occupation(std::size_t index) const {
    return {occupations_.data() + index * slots_.size(), slots_.size()};
  }
  /// Occupations over all ModeSet modes (untracked modes read as 0).
  void full_occupation(std::size_t index, std::span<int> out) const;

  /// Index of a full-mode occupation vector, or nullopt when it is not part
  /// of this basis (wrong total, cap exceeded, or untracked mode occupied).
  std::optional<std::size_t> rank(std::span<const int> full) const;
  std::vector<int> unrank(std::size_t index) const;  // slot occupations

  /// Number of bosons outside the k = 0 mode.
  int excitation_count(std::size_t index) const { return excitation_count_[index]; }
  Momentum momentum(std::size_t index) const;

  std::string descriptor() const;

  FockBasis(FockKind kind, ModeSetPtr modes, int total, std::size_t limit);

 private:
  std::uint64_t count_tail(std::size_t slots_after, int budget) const;
  std::uint64_t binom(int n, int k) const;

  FockKind kind_;
  ModeSetPtr modes_;
  int total_;
  std::vector<std::size_t> slots_;
  std::vector<int> slot_of_mode_;
  std::vector<std::vector<std::uint64_t>> binomial_;
  std::size_t dimension_ = 0;
  std::vector<std::uint16_t> occupations_;
  std::vector<int> excitation_count_;
};

using FockBasisPtr = std::shared_ptr<const FockBasis>;

/// Tracer plane waves tensored with a boson basis; flat index is
/// tracer_index * boson_dimension + boson_index.
class JointBasis {
 public:
  JointBasis(ModeSetPtr tracer_modes, FockBasisPtr bosons);

  std::size_t dimension() const { return tracer_->size() * bosons_->dimension(); }
  const ModeSet& tracer_modes() const { return *tracer_; }
  const ModeSetPtr& tracer_modes_ptr() const { return tracer_; }
  const FockBasis& bosons() const { return *bosons_; }
  const FockBasisPtr& bosons_ptr() const { return bosons_; }

  std::size_t index(std::size_t tracer, std::size_t boson) const {
    return tracer * bosons_->dimension() + boson;
  }
  std::size_t tracer_index(std::size_t i) const { return i / bosons_->dimension(); }
  std::size_t boson_index(std::size_t i) const { return i % bosons_->dimension(); }

  /// Tracer momentum plus the summed boson momenta.
  Momentum total_momentum(std::size_t i) const;
  int excitation_count(std::size_t i) const { return bosons_->excitation_count(boson_index(i)); }

  std::string descriptor() const;
  std::uint64_t hash() const { return hash_; }

 private:
  ModeSetPtr tracer_;
  FockBasisPtr bosons_;
  std::vector<Momentum> boson_momenta_;
  std::uint64_t hash_;
};

using JointBasisPtr = std::shared_ptr<const JointBasis>;

JointBasisPtr make_joint_basis(ModeSetPtr tracer_modes, FockBasisPtr bosons);

/// 64-bit FNV-1a digest, used for basis descriptors and config hashes.
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace bfdyn
