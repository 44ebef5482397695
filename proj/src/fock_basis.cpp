#include "bfdyn/fock_basis.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "bfdyn/errors.hpp"

namespace bfdyn {

namespace {

double binomial_estimate(double n, double k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)));
}

void guard_dimension(double estimate, std::size_t limit, const std::string& what) {
  if (estimate > static_cast<double>(limit)) {
    std::ostringstream os;
    os << what << " has dimension " << std::setprecision(6) << estimate
       << ", exceeding the limit " << limit;
    throw DimensionLimitError(os.str(), estimate);
  }
}

std::uint64_t exact_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::size_t FockBasis::sector_dimension(std::size_t n_modes, int n_bosons, std::size_t limit) {
  if (n_bosons < 0) throw InputError("boson number must be nonnegative");
  if (n_modes == 0) return n_bosons == 0 ? 1 : 0;
  const double estimate = binomial_estimate(n_bosons + n_modes - 1.0, n_modes - 1.0);
  guard_dimension(estimate, limit, "N-boson sector basis");
  return exact_binomial(n_bosons + n_modes - 1, n_modes - 1);
}

std::size_t FockBasis::excitation_dimension(std::size_t n_excited_modes, int cap,
                                            std::size_t limit) {
  if (cap < 0) throw InputError("excitation cap must be nonnegative");
  const double estimate = binomial_estimate(cap + static_cast<double>(n_excited_modes),
                                            static_cast<double>(n_excited_modes));
  guard_dimension(estimate, limit, "excitation basis");
  return exact_binomial(cap + n_excited_modes, n_excited_modes);
}

FockBasis::FockBasis(FockKind kind, ModeSetPtr modes, int total, std::size_t limit)
    : kind_(kind), modes_(std::move(modes)), total_(total) {
  if (total > std::numeric_limits<std::uint16_t>::max()) {
    throw InputError("occupation total too large for 16-bit storage");
  }
  slots_ = kind_ == FockKind::sector ? std::vector<std::size_t>{} : modes_->excited_modes();
  if (kind_ == FockKind::sector) {
    for (std::size_t i = 0; i < modes_->size(); ++i) slots_.push_back(i);
  }
  slot_of_mode_.assign(modes_->size(), -1);
  for (std::size_t s = 0; s < slots_.size(); ++s) slot_of_mode_[slots_[s]] = static_cast<int>(s);

  dimension_ = kind_ == FockKind::sector ? sector_dimension(slots_.size(), total_, limit)
                                         : excitation_dimension(slots_.size(), total_, limit);

  // Pascal triangle large enough for every rank term; entries used never
  // exceed the dimension, larger ones saturate harmlessly.
  const int rows = total_ + static_cast<int>(slots_.size()) + 2;
  binomial_.assign(rows, std::vector<std::uint64_t>(slots_.size() + 2, 0));
  for (int n = 0; n < rows; ++n) {
    binomial_[n][0] = 1;
    for (std::size_t k = 1; k < binomial_[n].size() && k <= static_cast<std::size_t>(n); ++k) {
      const std::uint64_t a = binomial_[n - 1][k - 1];
      const std::uint64_t b = binomial_[n - 1][k];
      binomial_[n][k] = a > std::numeric_limits<std::uint64_t>::max() - b
                            ? std::numeric_limits<std::uint64_t>::max()
                            : a + b;
    }
  }

  const std::size_t width = slots_.size();
  occupations_.resize(dimension_ * width);
  excitation_count_.resize(dimension_);
  const bool has_zero_slot = kind_ == FockKind::sector;
  const std::size_t zero_slot = has_zero_slot ? modes_->zero_index() : 0;
  for (std::size_t i = 0; i < dimension_; ++i) {
    const auto occ = unrank(i);
    int excited = 0;
    for (std::size_t s = 0; s < width; ++s) {
      occupations_[i * width + s] = static_cast<std::uint16_t>(occ[s]);
      if (!(has_zero_slot && s == zero_slot)) excited += occ[s];
    }
    excitation_count_[i] = excited;
  }
}

std::shared_ptr<const FockBasis> FockBasis::sector(ModeSetPtr modes, int n_bosons,
                                                   std::size_t limit) {
  if (n_bosons < 0) throw InputError("boson number must be nonnegative");
  return std::make_shared<const FockBasis>(FockKind::sector, std::move(modes), n_bosons, limit);
}

std::shared_ptr<const FockBasis> FockBasis::excitations(ModeSetPtr modes, int cap,
                                                        std::size_t limit) {
  if (cap < 0) throw InputError("excitation cap must be nonnegative");
  return std::make_shared<const FockBasis>(FockKind::excitation, std::move(modes), cap, limit);
}

std::uint64_t FockBasis::binom(int n, int k) const {
  if (n < 0 || k < 0 || k > n) return 0;
  return binomial_[n][k];
}

// Number of ways to fill `slots_after` slots with the given budget: exactly
// the budget for sector bases, at most the budget for excitation bases.
std::uint64_t FockBasis::count_tail(std::size_t slots_after, int budget) const {
  if (budget < 0) return 0;
  const int r = static_cast<int>(slots_after);
  if (kind_ == FockKind::excitation) return binom(budget + r, r);
  if (r == 0) return budget == 0 ? 1 : 0;
  return binom(budget + r - 1, r - 1);
}

std::optional<std::size_t> FockBasis::rank(std::span<const int> full) const {
  int sum = 0;
  for (std::size_t mode = 0; mode < full.size(); ++mode) {
    if (full[mode] < 0) return std::nullopt;
    if (full[mode] > 0 && slot_of_mode_[mode] < 0) return std::nullopt;
    sum += full[mode];
  }
  if (kind_ == FockKind::sector ? sum != total_ : sum > total_) return std::nullopt;

  const std::size_t width = slots_.size();
  std::uint64_t index = 0;
  int budget = total_;
  for (std::size_t s = 0; s < width; ++s) {
    const int n = full[slots_[s]];
    const int r = static_cast<int>(width - s - 1);
    if (kind_ == FockKind::sector) {
      if (r > 0) index += binom(budget + r, r) - binom(budget - n + r, r);
    } else {
      index += binom(budget + r + 1, r + 1) - binom(budget - n + r + 1, r + 1);
    }
    budget -= n;
  }
  return static_cast<std::size_t>(index);
}

std::vector<int> FockBasis::unrank(std::size_t index) const {
  if (index >= dimension_) throw std::out_of_range("basis index out of range");
  std::vector<int> occ(slots_.size(), 0);
  std::uint64_t rest = index;
  int budget = total_;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const std::size_t after = slots_.size() - s - 1;
    int v = 0;
    for (;; ++v) {
      const std::uint64_t c = count_tail(after, budget - v);
      if (rest < c) break;
      rest -= c;
    }
    occ[s] = v;
    budget -= v;
  }
  return occ;
}

void FockBasis::full_occupation(std::size_t index, std::span<int> out) const {
  std::fill(out.begin(), out.end(), 0);
  const auto occ = occupation(index);
  for (std::size_t s = 0; s < slots_.size(); ++s) out[slots_[s]] = occ[s];
}

Momentum FockBasis::momentum(std::size_t index) const {
  Momentum total;
  const auto occ = occupation(index);
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (occ[s] != 0) total = total + occ[s] * (*modes_)[slots_[s]];
  }
  return total;
}

std::string FockBasis::descriptor() const {
  std::ostringstream os;
  os << (kind_ == FockKind::sector ? "sector(N=" : "excitation(cap=") << total_ << ","
     << modes_->descriptor() << ")";
  return os.str();
}

JointBasis::JointBasis(ModeSetPtr tracer_modes, FockBasisPtr bosons)
    : tracer_(std::move(tracer_modes)), bosons_(std::move(bosons)) {
  if (tracer_->dim() != bosons_->modes().dim()) {
    throw InputError("tracer and boson mode sets must share the spatial dimension");
  }
  boson_momenta_.resize(bosons_->dimension());
  for (std::size_t b = 0; b < bosons_->dimension(); ++b) boson_momenta_[b] = bosons_->momentum(b);
  hash_ = fnv1a64(descriptor());
}

Momentum JointBasis::total_momentum(std::size_t i) const {
  return (*tracer_)[tracer_index(i)] + boson_momenta_[boson_index(i)];
}

std::string JointBasis::descriptor() const {
  return "joint(tracer=" + tracer_->descriptor() + "," + bosons_->descriptor() + ")";
}

JointBasisPtr make_joint_basis(ModeSetPtr tracer_modes, FockBasisPtr bosons) {
  return std::make_shared<const JointBasis>(std::move(tracer_modes), std::move(bosons));
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << value;
  return os.str();
}

}  // namespace bfdyn
