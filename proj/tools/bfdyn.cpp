// Command-line front end: bfdyn {check,evolve,converge,spectrum} [options]

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bfdyn/errors.hpp"
#include "bfdyn/runner.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> keys;  // from --<key> options
};

bfdyn::ExperimentConfig resolve(const Overrides& o) {
  bfdyn::ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = bfdyn::load_config(o.config_path);
  for (const auto& [key, value] : o.keys) {
    if (!value.empty()) cfg.set(key, value);
  }
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw bfdyn::InputError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracer in a Bose gas: exact, auxiliary and Bogoliubov-Froehlich dynamics"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  bfdyn::RunOptions opts;
  opts.log = &std::cerr;
  std::string out;
  std::string seed;
  bool list = false;

  app.add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output directory (overrides config `out`)");
  app.add_option("--workers", opts.workers, "worker threads for sweep cells")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_option("--set", o.sets, "override any config key, key=value (repeatable)");
  app.add_flag("--quiet", [&](std::int64_t) { opts.log = nullptr; }, "no progress output");

  auto* group = app.add_option_group("config keys", "one option per config key");
  for (const auto& key : bfdyn::config_keys()) {
    if (key.name == "out" || key.name == "seed") continue;
    group->add_option("--" + key.name, o.keys[key.name], key.help + " [" + key.type + "]");
  }
  app.add_option("--preset", o.keys["v_preset"], "alias of --v_preset");
  app.add_option("--potential-file", o.keys["v_file"], "alias of --v_file");

  auto* check = app.add_subcommand("check", "identity suite and propagator certification");
  check->add_flag("--list", list, "print the identity inventory and exit");
  auto* evolve = app.add_subcommand("evolve", "time traces of one flavor, or all with flavor=all");
  auto* converge = app.add_subcommand("converge", "error curves against the Bogoliubov-Froehlich limit");
  auto* spectrum = app.add_subcommand("spectrum", "quadratic spectrum against the dispersion relation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? bfdyn::kExitOk : bfdyn::kExitUsage;
  }

  if (check->parsed() && list) {
    bfdyn::print_identity_inventory(std::cout);
    return bfdyn::kExitOk;
  }

  return bfdyn::run_guarded(
      [&] {
        if (!seed.empty()) o.sets.push_back("seed=" + seed);
        if (!out.empty()) o.sets.push_back("out=" + out);
        const auto cfg = resolve(o);
        if (check->parsed()) return bfdyn::cmd_check(cfg, opts);
        if (evolve->parsed()) return bfdyn::cmd_evolve(cfg, opts);
        if (converge->parsed()) return bfdyn::cmd_converge(cfg, opts);
        if (spectrum->parsed()) return bfdyn::cmd_spectrum(cfg, opts);
        return static_cast<int>(bfdyn::kExitUsage);
      },
      std::cerr);
}
