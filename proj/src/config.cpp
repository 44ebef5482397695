#include "bfdyn/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "bfdyn/errors.hpp"

namespace bfdyn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw InputError("config key '" + key + "': cannot use '" + value + "' (" + why + ")");
}

int to_int(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    bad_value(key, raw, "expected an integer");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    bad_value(key, raw, "expected a nonnegative integer");
  }
  return out;
}

double to_real(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) bad_value(key, raw, "trailing characters");
    return out;
  } catch (const std::logic_error&) {
    bad_value(key, raw, "expected a real number");
  }
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, raw, "expected true or false");
}

std::vector<int> to_int_list(const std::string& key, const std::string& raw) {
  std::vector<int> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_int(key, item));
  }
  return out;
}

std::string real_text(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string list_text(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(xs[i]);
  }
  return out;
}

struct Field {
  ConfigKey key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Field field(std::string name, std::string type, std::string help, T ExperimentConfig::*member) {
  Field f{{name, type, std::move(help)}, {}, {}};
  if constexpr (std::is_same_v<T, int>) {
    f.set = [member, name](ExperimentConfig& c, const std::string& v) {
      c.*member = to_int(name, v);
    };
    f.get = [member](const ExperimentConfig& c) { return std::to_string(c.*member); };
  } else if constexpr (std::is_same_v<T, double>) {
    f.set = [member, name](ExperimentConfig& c, const std::string& v) {
      c.*member = to_real(name, v);
    };
    f.get = [member](const ExperimentConfig& c) { return real_text(c.*member); };
  } else if constexpr (std::is_same_v<T, bool>) {
    f.set = [member, name](ExperimentConfig& c, const std::string& v) {
      c.*member = to_bool(name, v);
    };
    f.get = [member](const ExperimentConfig& c) { return std::string(c.*member ? "true" : "false"); };
  } else if constexpr (std::is_same_v<T, std::string>) {
    f.set = [member](ExperimentConfig& c, const std::string& v) { c.*member = trim(v); };
    f.get = [member](const ExperimentConfig& c) { return c.*member; };
  } else if constexpr (std::is_same_v<T, std::vector<int>>) {
    f.set = [member, name](ExperimentConfig& c, const std::string& v) {
      c.*member = to_int_list(name, v);
    };
    f.get = [member](const ExperimentConfig& c) { return list_text(c.*member); };
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    f.set = [member, name](ExperimentConfig& c, const std::string& v) {
      c.*member = to_u64(name, v);
    };
    f.get = [member](const ExperimentConfig& c) { return std::to_string(c.*member); };
  }
  return f;
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table = {
      field("dim", "int", "spatial dimension d (1, 2 or 3)", &C::dim),
      field("cutoff", "int", "boson mode cutoff, max-norm of k", &C::cutoff),
      field("tracer_cutoff", "int", "tracer momentum cutoff, max-norm of q", &C::tracer_cutoff),
      field("tracer_mass", "real", "tracer mass m (boson mass units, hbar = 1)", &C::tracer_mass),
      field("v_preset", "text", "pair potential preset: zero, soft, gauss", &C::v_preset),
      field("v0", "real", "pair potential strength (energy units)", &C::v0),
      field("v_file", "text", "pair potential table file; overrides v_preset", &C::v_file),
      field("w_preset", "text", "tracer potential preset: zero, soft, gauss, skew", &C::w_preset),
      field("w0", "real", "tracer potential strength (energy units)", &C::w0),
      field("w_file", "text", "tracer potential table file; overrides w_preset", &C::w_file),
      field("unchecked_potentials", "bool",
            "skip symmetry and zero-mean validation (mutation testing only)",
            &C::unchecked_potentials),
      field("initial", "text", "initial state: single, pair, vacuum-gaussian", &C::initial),
      field("excitation_momentum", "int-list", "momentum p of the initial excitation",
            &C::excitation_momentum),
      field("tracer_momentum", "int-list", "tracer momentum q (centre for vacuum-gaussian)",
            &C::tracer_momentum),
      field("gaussian_width", "real", "tracer momentum width for vacuum-gaussian",
            &C::gaussian_width),
      field("n_list", "int-list", "boson numbers N of a sweep, increasing", &C::n_list),
      field("n_bosons", "int", "boson number N for a single evolution", &C::n_bosons),
      field("flavor", "text", "evolution flavor: full, aux, bf, all", &C::flavor),
      field("time", "real", "target time of error curves (1 / energy units)", &C::time),
      field("t_start", "real", "first time of the evolution grid", &C::t_start),
      field("t_stop", "real", "last time of the evolution grid", &C::t_stop),
      field("t_points", "int", "number of grid times", &C::t_points),
      field("tolerance", "real", "propagation error tolerance per unit time", &C::tolerance),
      field("krylov_dim", "int", "Krylov subspace dimension", &C::krylov_dim),
      field("max_substeps", "int", "substep budget per propagation", &C::max_substeps),
      field("bf_cap", "int", "first excitation cap for the BF reference", &C::bf_cap),
      field("cap_tolerance", "real", "agreement required between caps M and 2M",
            &C::cap_tolerance),
      field("max_cap", "int", "largest excitation cap tried", &C::max_cap),
      field("identity_n", "int-list", "boson numbers for the identity suite", &C::identity_n),
      field("random_samples", "int", "random states for quadratic form checks",
            &C::random_samples),
      field("spectrum_cutoff", "int", "mode cutoff of the spectrum check", &C::spectrum_cutoff),
      field("spectrum_caps", "int-list", "excitation caps of the spectrum check",
            &C::spectrum_caps),
      field("seed", "int", "seed for randomized checks", &C::seed),
      field("out", "text", "output directory (not part of the config hash)", &C::out),
  };
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key.name == key) return f;
  }
  throw InputError("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return keys;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  find_field(key).set(*this, value);
}

std::string ExperimentConfig::get(const std::string& key) const {
  return find_field(key).get(*this);
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InputError("config: " + what);
  };
  require(dim >= 1 && dim <= 3, "dim must be 1, 2 or 3");
  require(cutoff >= 0 && tracer_cutoff >= 0, "cutoffs must be nonnegative");
  require(tracer_mass > 0.0, "tracer_mass must be positive");
  require(!n_list.empty(), "n_list must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    require(n_list[i] >= 1, "n_list entries must be positive");
    require(i == 0 || n_list[i] > n_list[i - 1], "n_list must increase strictly");
  }
  require(n_bosons >= 1, "n_bosons must be positive");
  require(flavor == "full" || flavor == "aux" || flavor == "bf" || flavor == "all",
          "flavor must be full, aux, bf or all");
  parse_initial_kind(initial);
  require(static_cast<int>(excitation_momentum.size()) <= dim,
          "excitation_momentum has more components than dim");
  require(static_cast<int>(tracer_momentum.size()) <= dim,
          "tracer_momentum has more components than dim");
  require(t_points >= 1, "t_points must be positive");
  require(std::isfinite(time) && std::isfinite(t_start) && std::isfinite(t_stop),
          "times must be finite");
  require(bf_cap >= 1 && max_cap >= bf_cap, "need 1 <= bf_cap <= max_cap");
  require(cap_tolerance > 0.0, "cap_tolerance must be positive");
  require(!identity_n.empty(), "identity_n must not be empty");
  for (const int n : identity_n) require(n >= 1, "identity_n entries must be positive");
  require(random_samples >= 0, "random_samples must be nonnegative");
  require(spectrum_cutoff >= 0, "spectrum_cutoff must be nonnegative");
  for (const int c : spectrum_caps) require(c >= 0, "spectrum caps must be nonnegative");
  propagation(time).validate();
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& f : fields()) out += f.key.name + " = " + f.get(*this) + "\n";
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::string text;
  for (const auto& f : fields()) {
    if (f.key.name == "out") continue;
    text += f.key.name + " = " + f.get(*this) + "\n";
  }
  // Potential tables enter by content, so an edited file changes the hash.
  for (const auto* file : {&v_file, &w_file}) {
    if (file->empty()) continue;
    std::ifstream in(*file, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    text += "table " + hex64(fnv1a64(body.str())) + "\n";
  }
  return fnv1a64(text);
}

std::string ExperimentConfig::hash_hex() const { return hex64(hash()); }

PropagationConfig ExperimentConfig::propagation(double t) const {
  PropagationConfig p;
  p.time = t;
  p.tolerance = tolerance;
  p.krylov_dim = krylov_dim;
  p.max_substeps = max_substeps;
  return p;
}

namespace {

Momentum momentum_from(const std::vector<int>& xs) {
  Momentum p;
  for (std::size_t i = 0; i < xs.size() && i < p.c.size(); ++i) p.c[i] = xs[i];
  return p;
}

}  // namespace

Momentum ExperimentConfig::excitation_p() const { return momentum_from(excitation_momentum); }
Momentum ExperimentConfig::tracer_q() const { return momentum_from(tracer_momentum); }

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(number) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  return parse_config(in);
}

Potential build_potential(const ExperimentConfig& cfg, PotentialKind kind, const ModeSet& modes) {
  const bool pair = kind == PotentialKind::pair;
  const std::string& file = pair ? cfg.v_file : cfg.w_file;
  if (!file.empty()) {
    const auto raw = read_potential_file(file, modes.dim());
    if (cfg.unchecked_potentials) {
      return Potential::unchecked(kind, modes.dim(), 2 * modes.cutoff(), raw);
    }
    return validate_potential(raw, kind, modes);
  }
  return preset_potential(pair ? cfg.v_preset : cfg.w_preset, kind, modes, pair ? cfg.v0 : cfg.w0);
}

Model build_model(const ExperimentConfig& cfg) {
  cfg.validate();
  auto modes = build_mode_set(cfg.dim, cfg.cutoff);
  ModelParams params;
  params.n_bosons = cfg.n_bosons;
  params.tracer_mass = cfg.tracer_mass;
  params.tracer_cutoff = cfg.tracer_cutoff;
  auto v = build_potential(cfg, PotentialKind::pair, *modes);
  auto w = build_potential(cfg, PotentialKind::tracer, *modes);
  return Model::make(std::move(modes), std::move(v), std::move(w), params);
}

}  // namespace bfdyn
