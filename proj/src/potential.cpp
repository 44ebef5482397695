#include "bfdyn/potential.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "bfdyn/errors.hpp"

namespace bfdyn {

std::string_view to_string(PotentialKind kind) {
  return kind == PotentialKind::pair ? "pair" : "tracer";
}

Potential::Potential(PotentialKind kind, int dim, int support)
    : kind_(kind), dim_(dim), support_(support) {
  if (dim < 1 || dim > kMaxDimension) throw InputError("potential dimension must be 1, 2 or 3");
  if (support < 0) throw InputError("potential support must be nonnegative");
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= static_cast<std::size_t>(2 * support + 1);
  table_.assign(n, Complex{});
}

bool Potential::in_support(const Momentum& p) const {
  for (int axis = 0; axis < kMaxDimension; ++axis) {
    if (axis >= dim_ ? p.c[axis] != 0 : std::abs(p.c[axis]) > support_) return false;
  }
  return true;
}

std::size_t Potential::slot(const Momentum& p) const {
  const int side = 2 * support_ + 1;
  std::size_t idx = 0;
  for (int axis = 0; axis < dim_; ++axis) idx = idx * side + (p.c[axis] + support_);
  return idx;
}

Complex Potential::operator()(const Momentum& p) const {
  return in_support(p) ? table_[slot(p)] : Complex{};
}

bool Potential::is_zero() const {
  for (const auto& c : table_) {
    if (c != Complex{}) return false;
  }
  return true;
}

std::vector<PotentialEntry> Potential::entries() const {
  std::vector<PotentialEntry> out;
  const int side = 2 * support_ + 1;
  for (std::size_t idx = 0; idx < table_.size(); ++idx) {
    if (table_[idx] == Complex{}) continue;
    Momentum p;
    std::size_t rest = idx;
    for (int axis = dim_ - 1; axis >= 0; --axis) {
      p.c[axis] = static_cast<int>(rest % side) - support_;
      rest /= side;
    }
    out.push_back({p, table_[idx]});
  }
  return out;
}

double Potential::l2_norm_squared() const {
  double sum = 0.0;
  for (const auto& c : table_) sum += std::norm(c);
  return sum;
}

Potential Potential::unchecked(PotentialKind kind, int dim, int support,
                               std::span<const PotentialEntry> entries) {
  Potential out(kind, dim, support);
  for (const auto& e : entries) {
    if (!out.in_support(e.p)) throw InputError("momentum outside potential support");
    out.table_[out.slot(e.p)] = e.value;
  }
  return out;
}

Potential validate_potential(std::span<const PotentialEntry> raw, PotentialKind kind,
                             const ModeSet& modes) {
  const int dim = modes.dim();
  const int support = 2 * modes.cutoff();
  Potential table(kind, dim, support);

  std::set<Momentum> seen;
  for (const auto& e : raw) {
    if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag())) {
      throw InputError("non-finite potential coefficient at " + e.p.to_string(dim));
    }
    for (int axis = dim; axis < kMaxDimension; ++axis) {
      if (e.p.c[axis] != 0) throw InputError("momentum has more components than the dimension");
    }
    if (e.p.max_norm() > support) {
      throw InputError("potential coefficient at " + e.p.to_string(dim) +
                       " lies outside the representable support |p| <= " +
                       std::to_string(support));
    }
    if (!seen.insert(e.p).second) {
      throw InputError("duplicate potential coefficient at " + e.p.to_string(dim));
    }
    if (e.p.is_zero() && e.value != Complex{}) {
      throw InputError("zero-mean violated: coefficient at p = 0 must vanish");
    }
  }

  Potential out = Potential::unchecked(kind, dim, support, raw);
  for (const auto& e : raw) {
    const Complex mirror = out(-e.p);
    if (std::abs(mirror - std::conj(e.value)) > Potential::kSymmetryTolerance) {
      throw InputError("realness violated: coefficient at " + (-e.p).to_string(dim) +
                       " is not the conjugate of the one at " + e.p.to_string(dim));
    }
    if (kind == PotentialKind::pair && std::abs(mirror - e.value) > Potential::kSymmetryTolerance) {
      throw InputError("evenness violated for pair potential at " + e.p.to_string(dim));
    }
  }
  return out;
}

std::vector<std::string> preset_names() { return {"zero", "soft", "gauss", "skew"}; }

Potential preset_potential(std::string_view name, PotentialKind kind, const ModeSet& modes,
                           double strength) {
  const int dim = modes.dim();
  const int support = 2 * modes.cutoff();
  if (name != "zero" && name != "soft" && name != "gauss" && name != "skew") {
    throw InputError("unknown potential preset '" + std::string(name) + "'");
  }
  if (!std::isfinite(strength)) throw InputError("preset strength must be finite");

  std::vector<PotentialEntry> raw;
  if (name != "zero") {
    const ModeSet cube(dim, support);
    for (const auto& p : cube.momenta()) {
      if (p.is_zero()) continue;
      const double p2 = p.norm_sq();
      Complex value;
      if (name == "gauss") {
        value = strength * std::exp(-0.5 * p2);
      } else {
        value = strength / (1.0 + p2);
        if (name == "skew") value *= std::polar(1.0, std::numbers::pi * p.c[0] / 4.0);
      }
      raw.push_back({p, value});
    }
  }
  return validate_potential(raw, kind, modes);
}

std::vector<PotentialEntry> read_potential_table(std::istream& in, int dim) {
  std::vector<PotentialEntry> out;
  std::set<Momentum> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (static_cast<int>(tokens.size()) != dim + 2) {
      throw InputError("potential file line " + std::to_string(line_no) + ": expected " +
                       std::to_string(dim + 2) + " fields");
    }
    PotentialEntry e;
    try {
      for (int axis = 0; axis < dim; ++axis) {
        std::size_t used = 0;
        e.p.c[axis] = std::stoi(tokens[axis], &used);
        if (used != tokens[axis].size()) throw std::invalid_argument("trailing characters");
      }
      e.value = {std::stod(tokens[dim]), std::stod(tokens[dim + 1])};
    } catch (const std::exception&) {
      throw InputError("potential file line " + std::to_string(line_no) + ": malformed number");
    }
    if (!seen.insert(e.p).second) {
      throw InputError("potential file line " + std::to_string(line_no) +
                       ": duplicate momentum " + e.p.to_string(dim));
    }
    out.push_back(e);
  }
  return out;
}

std::vector<PotentialEntry> read_potential_file(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open potential file " + path);
  return read_potential_table(in, dim);
}

void write_potential_table(std::ostream& out, const Potential& potential) {
  out << "# " << to_string(potential.kind()) << " potential, d=" << potential.dim() << "\n";
  out << std::setprecision(17);
  for (const auto& e : potential.entries()) {
    for (int axis = 0; axis < potential.dim(); ++axis) out << e.p.c[axis] << ' ';
    out << e.value.real() << ' ' << e.value.imag() << '\n';
  }
}

}  // namespace bfdyn
