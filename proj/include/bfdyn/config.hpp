#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bfdyn/diagnostics.hpp"

namespace bfdyn {

/// One experiment. Text form is flat `key = value` lines, `#` comments;
/// lists are comma separated. Every key has a default.
struct ExperimentConfig {
  // model
  int dim = 1;
  int cutoff = 1;
  int tracer_cutoff = 2;
  double tracer_mass = 1.0;
  std::string v_preset = "soft";
  double v0 = 5.0;
  std::string v_file;
  std::string w_preset = "soft";
  double w0 = 5.0;
  std::string w_file;
  bool unchecked_potentials = false;  // mutation testing only

  // initial state
  std::string initial = "single";
  std::vector<int> excitation_momentum{1};
  std::vector<int> tracer_momentum{0};
  double gaussian_width = 1.0;

  // sweeps
  std::vector<int> n_list{4, 8, 16, 32, 64};
  int n_bosons = 4;
  std::string flavor = "full";
  double time = 1.0;
  double t_start = 0.0;
  double t_stop = 2.0;
  int t_points = 21;

  // numerics
  double tolerance = 1e-9;
  int krylov_dim = 40;
  int max_substeps = 100000;
  int bf_cap = 8;
  double cap_tolerance = 1e-6;
  int max_cap = 256;

  // checks
  std::vector<int> identity_n{2, 3, 4, 5, 6};
  int random_samples = 100;
  int spectrum_cutoff = 2;
  std::vector<int> spectrum_caps{2, 4, 6, 8, 10};
  std::uint64_t seed = 1;

  std::string out = "results";

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  void validate() const;

  /// Every key with its default, one per line, sorted as documented.
  std::string canonical() const;
  /// Digest of the canonical form without `out`, plus potential file contents.
  std::uint64_t hash() const;
  std::string hash_hex() const;

  PropagationConfig propagation(double t) const;
  Momentum excitation_p() const;
  Momentum tracer_q() const;
};

struct ConfigKey {
  std::string name;
  std::string type;  // int, real, bool, text, int-list
  std::string help;
};
const std::vector<ConfigKey>& config_keys();

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Potentials and mode set described by a config.
Model build_model(const ExperimentConfig& cfg);
Potential build_potential(const ExperimentConfig& cfg, PotentialKind kind, const ModeSet& modes);

}  // namespace bfdyn
