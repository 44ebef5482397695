#include "bfdyn/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <iostream>
#include <limits>
#include <thread>

#include "bfdyn/errors.hpp"

namespace bfdyn {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json momentum_json(const Momentum& p, int dim) {
  json out = json::array();
  for (int a = 0; a < dim; ++a) out.push_back(p.c[a]);
  return out;
}

std::filesystem::path output_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
  return opts.out.empty() ? std::filesystem::path(cfg.out) : opts.out;
}

void say(const RunOptions& opts, const std::string& text) {
  if (opts.log) *opts.log << text << std::endl;
}

}  // namespace

// ---------------------------------------------------------------- output

RecordSink::RecordSink(const std::filesystem::path& dir, const ExperimentConfig& cfg)
    : dir_(dir), hash_(cfg.hash_hex()) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw InputError("cannot create output directory '" + dir_.string() + "'");
  records_.open(dir_ / "records.jsonl", std::ios::trunc);
  timing_.open(dir_ / "timing.jsonl", std::ios::trunc);
  if (!records_ || !timing_) throw InputError("cannot write into '" + dir_.string() + "'");
  std::ofstream(dir_ / "config.txt", std::ios::trunc) << cfg.canonical();
  tolerances_ = {{"propagation_per_unit_time", cfg.tolerance},
                 {"identity_relative", kIdentityTolerance},
                 {"hermiticity_absolute", SparseHermitianOperator::kHermiticityTolerance},
                 {"cap_agreement", cfg.cap_tolerance}};
}

void RecordSink::write(json record) {
  record["config_hash"] = hash_;
  record["tolerances"] = tolerances_;
  std::lock_guard lock(mutex_);
  records_ << record.dump() << '\n';
  records_.flush();
}

void RecordSink::timing(const std::string& what, double seconds) {
  std::lock_guard lock(mutex_);
  timing_ << json{{"what", what}, {"wall_seconds", seconds}, {"config_hash", hash_}}.dump()
          << '\n';
  timing_.flush();
}

void RecordSink::plot(const std::string& name, const std::string& header,
                      const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out(dir_ / name, std::ios::trunc);
  out << "# " << header << '\n' << std::setprecision(17);
  for (const auto& [x, y] : rows) out << x << ' ' << y << '\n';
}

void OrderedAppender::complete(std::size_t index, std::vector<json> records) {
  std::lock_guard lock(mutex_);
  pending_[index] = std::move(records);
  drain();
}

void OrderedAppender::skip(std::size_t index) {
  std::lock_guard lock(mutex_);
  skipped_[index] = true;
  drain();
}

void OrderedAppender::drain() {
  while (true) {
    if (auto it = pending_.find(next_); it != pending_.end()) {
      for (auto& r : it->second) sink_.write(std::move(r));
      pending_.erase(it);
    } else if (skipped_.count(next_) == 0) {
      return;
    }
    ++next_;
  }
}

void run_pool(std::size_t count, int workers, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, count); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ----------------------------------------------------------------- check

void print_identity_inventory(std::ostream& out) {
  for (const auto& id : identity_inventory()) out << id.name << "\n    " << id.statement << '\n';
  out << "aaaa_number_identity\n    sum_{jk} ||a_j a_k psi||^2 = <psi, N+(N+ - 1) psi>\n";
  out << "quadratic_annihilation_bound\n    ||sum M_jk a_j a_k phi|| <= ||M||_l2 ||N+ phi||\n";
  out << "quadratic_creation_bound\n    ||sum M_jk a_j^* a_k^* phi|| <= ||M||_l2 ||(N+ + 2) phi||\n";
  out << "truncation_tail\n    ||Phi - Phi^{<=n}|| <= ||N+ Phi|| / (n + 1)\n";
  out << "propagation\n    Krylov vs dense, norm and energy conservation, time reversal, "
         "blocked vs unblocked\n";
}

int cmd_check(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  RecordSink sink(output_dir(cfg, opts), cfg);
  const Model base = build_model(cfg);
  int failures = 0;

  const auto report = run_identity_suite(base, cfg.identity_n);
  for (const auto& c : report.checks) {
    sink.write({{"record", "identity"}, {"name", c.name}, {"n_bosons", c.n_bosons},
                {"deviation", number(c.deviation)}, {"passed", c.passed}});
    if (!c.passed) {
      ++failures;
      say(opts, "FAIL " + c.name + " N=" + std::to_string(c.n_bosons));
    }
  }
  say(opts, "identity suite: " + std::to_string(report.checks.size()) + " checks");

  std::mt19937_64 rng(cfg.seed);
  if (cfg.random_samples > 0) {
    const auto basis = excitation_space(base, 4);
    const auto forms = check_quadratic_forms(basis, cfg.random_samples, rng);
    const bool ok = forms.max_number_identity_deviation <= kIdentityTolerance &&
                    forms.annihilation_bound_violations == 0 &&
                    forms.creation_bound_violations == 0;
    failures += ok ? 0 : 1;
    sink.write({{"record", "quadratic_forms"}, {"samples", forms.samples},
                {"number_identity_deviation", forms.max_number_identity_deviation},
                {"annihilation_violations", forms.annihilation_bound_violations},
                {"creation_violations", forms.creation_bound_violations},
                {"max_annihilation_ratio", forms.max_annihilation_ratio},
                {"max_creation_ratio", forms.max_creation_ratio}, {"passed", ok}});

    // Tail bound on a random state spread over six excitation levels.
    const auto wide = excitation_space(base, 6);
    std::normal_distribution<double> g;
    StateVector phi = StateVector::zero(wide);
    for (auto& z : phi.amplitudes()) z = Complex(g(rng), g(rng));
    phi.amplitudes() /= phi.norm();
    const auto tail = check_truncation_tail(phi);
    failures += tail.passed ? 0 : 1;
    sink.write({{"record", "truncation_tail"}, {"max_ratio", tail.max_ratio},
                {"passed", tail.passed}});
  }

  // Propagator on small random operators and on the physical Hamiltonians.
  const double t = 2.0;
  auto prop = cfg.propagation(t);
  for (const std::size_t dim : {24u, 96u, 200u}) {
    const auto h = random_hermitian(dim, 6, rng);
    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
    std::normal_distribution<double> g;
    for (auto& z : psi) z = Complex(g(rng), g(rng));
    psi /= psi.norm();
    const auto pc = check_propagation(h, psi, prop, true);
    const double bound = cfg.tolerance * (1.0 + t);
    const bool ok = pc.oracle_deviation <= 1e-8 && pc.norm_drift <= bound &&
                    pc.energy_drift <= bound * std::max(1.0, max_abs_entry(h)) &&
                    pc.reversal_error <= 1e-8;
    failures += ok ? 0 : 1;
    sink.write({{"record", "propagation_random"}, {"dimension", dim},
                {"oracle_deviation", number(pc.oracle_deviation)}, {"norm_drift", pc.norm_drift},
                {"energy_drift", pc.energy_drift}, {"reversal_error", pc.reversal_error},
                {"passed", ok}});
  }
  const int n = cfg.identity_n.back();
  const Model model = base.with_bosons(n);
  const auto phi = make_initial_state(parse_initial_kind(cfg.initial), model, 2, cfg.excitation_p(),
                                      cfg.tracer_q(), cfg.gaussian_width);
  const auto h_full = assemble_full(model);
  const auto h_aux = assemble_aux(model);
  const auto h_bf = assemble_bf(model, cfg.bf_cap);
  const auto u = assemble_u_map(h_full.basis_ptr(), h_aux.basis_ptr());
  const std::pair<const char*, const SparseHermitianOperator*> hams[] = {
      {"full", &h_full}, {"aux", &h_aux}, {"bf", &h_bf}};
  for (const auto& [name, h] : hams) {
    StateVector psi0 = std::string(name) == "full"
                           ? u.adjoint().apply(embed(phi.phi, h_aux.basis_ptr(), true))
                           : embed(phi.phi, h->basis_ptr(), true);
    const auto pc = check_propagation(*h, psi0, prop, h->dimension() <= kDenseLimit);
    const double bound = cfg.tolerance * (1.0 + t);
    const bool ok = (!std::isfinite(pc.oracle_deviation) || pc.oracle_deviation <= 1e-8) &&
                    pc.norm_drift <= bound && pc.energy_drift <= bound &&
                    pc.reversal_error <= 1e-8 && pc.blocked_deviation <= 1e-9 &&
                    pc.momentum_drift <= 1e-10;
    failures += ok ? 0 : 1;
    sink.write({{"record", "propagation_physical"}, {"hamiltonian", name}, {"n_bosons", n},
                {"dimension", h->dimension()}, {"oracle_deviation", number(pc.oracle_deviation)},
                {"norm_drift", pc.norm_drift}, {"energy_drift", pc.energy_drift},
                {"reversal_error", pc.reversal_error},
                {"blocked_deviation", pc.blocked_deviation},
                {"momentum_drift", pc.momentum_drift}, {"passed", ok}});
  }

  sink.write({{"record", "check_summary"}, {"failures", failures}, {"passed", failures == 0}});
  sink.timing("check", seconds_since(start));
  say(opts, failures == 0 ? "check passed" : "check FAILED (" + std::to_string(failures) + ")");
  return failures == 0 ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- evolve

int cmd_evolve(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  RecordSink sink(output_dir(cfg, opts), cfg);
  const Model base = build_model(cfg);
  const int dim = cfg.dim;

  auto times = uniform_grid(cfg.t_start, cfg.t_stop, cfg.t_points);
  if (std::find(times.begin(), times.end(), 0.0) == times.end()) {
    times.insert(std::upper_bound(times.begin(), times.end(), 0.0), 0.0);
  }

  struct Cell {
    Flavor flavor;
    int n;
  };
  std::vector<Cell> cells;
  const std::vector<int> ns = cfg.flavor == "all" ? cfg.n_list : std::vector<int>{cfg.n_bosons};
  for (const int n : ns) {
    if (cfg.flavor == "all") {
      for (const auto f : {Flavor::full, Flavor::aux, Flavor::bf}) cells.push_back({f, n});
    } else {
      cells.push_back({parse_flavor(cfg.flavor), n});
    }
  }

  const auto kind = parse_initial_kind(cfg.initial);
  const auto initial = make_initial_state(kind, base, 2, cfg.excitation_p(), cfg.tracer_q(),
                                          cfg.gaussian_width);
  sink.write({{"record", "initial_state"}, {"kind", to_string(kind)},
              {"support", initial.support}, {"h0_norm", initial.h0_norm},
              {"weight_norm", initial.weight_norm},
              {"dimension", initial.phi.basis().dimension()}});

  std::vector<AlphaTrace> traces(cells.size());
  OrderedAppender appender(sink);
  const auto prop = cfg.propagation(0.0);
  auto task = [&](std::size_t i) {
    const auto cell_start = std::chrono::steady_clock::now();
    const Model model = base.with_bosons(cells[i].n);
    try {
      const auto run = run_flavor(cells[i].flavor, model, initial.phi, times, prop, cfg.bf_cap);
      traces[i] = alpha_trace(run, cells[i].n);
      std::vector<json> out;
      const auto p0 = expected_momentum(run.states[0]);
      double drift = 0.0;
      std::vector<std::pair<double, double>> rows;
      for (std::size_t k = 0; k < times.size(); ++k) {
        const auto p = expected_momentum(run.states[k]);
        json pj = json::array();
        for (int a = 0; a < dim; ++a) {
          pj.push_back(p[static_cast<std::size_t>(a)]);
          drift = std::max(drift, std::abs(p[static_cast<std::size_t>(a)] -
                                           p0[static_cast<std::size_t>(a)]));
        }
        out.push_back({{"record", "trace"}, {"flavor", to_string(cells[i].flavor)},
                       {"n_bosons", cells[i].n}, {"cap", run.cap}, {"t", times[k]},
                       {"norm", traces[i].norm[k]}, {"energy", run.energies[k]},
                       {"alpha", traces[i].alpha[k]}, {"momentum", pj}});
        rows.emplace_back(times[k], traces[i].alpha[k]);
      }
      out.push_back({{"record", "trace_summary"}, {"flavor", to_string(cells[i].flavor)},
                     {"n_bosons", cells[i].n}, {"momentum_drift", drift},
                     {"substeps", run.stats.substeps}, {"matvecs", run.stats.matvecs}});
      sink.plot("alpha_" + to_string(cells[i].flavor) + "_N" + std::to_string(cells[i].n) + ".dat",
                "t alpha", rows);
      appender.complete(i, std::move(out));
      sink.timing("evolve " + to_string(cells[i].flavor) + " N=" + std::to_string(cells[i].n),
                  seconds_since(cell_start));
    } catch (...) {
      appender.skip(i);
      throw;
    }
  };
  run_pool(cells.size(), opts.workers, task);

  int status = kExitOk;
  if (cfg.flavor == "all") {
    const double v = fit_growth_rate(traces);
    const double ratio = envelope_ratio(traces, v);
    sink.write({{"record", "alpha_envelope"}, {"v", v}, {"max_ratio", ratio},
                {"slack", 1.05}, {"passed", ratio <= 1.05}});
    say(opts, "fitted growth rate v = " + std::to_string(v));
    if (ratio > 1.05) status = kExitCheckFailed;
  }
  sink.timing("evolve", seconds_since(start));
  return status;
}

// -------------------------------------------------------------- converge

int cmd_converge(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  RecordSink sink(output_dir(cfg, opts), cfg);
  const Model base = build_model(cfg);
  const auto prop = cfg.propagation(cfg.time);
  const auto kind = parse_initial_kind(cfg.initial);
  const auto initial = make_initial_state(kind, base, 2, cfg.excitation_p(), cfg.tracer_q(),
                                          cfg.gaussian_width);
  sink.write({{"record", "initial_state"}, {"kind", to_string(kind)},
              {"support", initial.support}, {"h0_norm", initial.h0_norm},
              {"weight_norm", initial.weight_norm}});

  const auto ref_start = std::chrono::steady_clock::now();
  const auto ref = bf_reference(base, initial.phi, cfg.time, prop, cfg.bf_cap, cfg.cap_tolerance,
                                cfg.max_cap);
  sink.write({{"record", "bf_reference"}, {"time", cfg.time}, {"cap", ref.cap},
              {"caps_tried", ref.caps_tried}, {"cap_difference", ref.cap_difference}});
  sink.timing("bf_reference", seconds_since(ref_start));
  say(opts, "BF reference converged at cap " + std::to_string(ref.cap));

  const auto& ns = cfg.n_list;
  std::vector<ConvergenceCell> cells(ns.size());
  OrderedAppender appender(sink);
  auto task = [&](std::size_t i) {
    const auto cell_start = std::chrono::steady_clock::now();
    try {
      cells[i] = convergence_cell(base, initial.phi, ref, cfg.time, ns[i], prop);
      const auto& c = cells[i];
      appender.complete(i, {{{"record", "convergence_cell"}, {"n_bosons", c.n_bosons},
                             {"time", cfg.time}, {"error_total", c.total},
                             {"gap_aux", c.aux_gap}, {"gap_aux_bf", c.aux_bf_gap},
                             {"truncation_tail", c.tail},
                             {"sector_dimension", c.sector_dimension},
                             {"excitation_dimension", c.excitation_dimension},
                             {"bf_cap", ref.cap}}});
      sink.timing("cell N=" + std::to_string(ns[i]), seconds_since(cell_start));
      say(opts, "N=" + std::to_string(ns[i]) + " done");
    } catch (...) {
      appender.skip(i);
      throw;
    }
  };
  run_pool(ns.size(), opts.workers, task);

  const double floor = cfg.tolerance * std::abs(cfg.time);
  std::vector<double> total, aux, aux_bf;
  for (const auto& c : cells) {
    total.push_back(c.total);
    aux.push_back(c.aux_gap);
    aux_bf.push_back(c.aux_bf_gap);
  }
  bool ok = true;
  for (const auto& [name, errs] : {std::pair{"total", &total}, std::pair{"aux", &aux},
                                   std::pair{"aux_bf", &aux_bf}}) {
    const auto curve = make_error_curve(name, ns, *errs, floor);
    const bool slope_ok = !curve.fit.valid || curve.fit.slope <= -0.25;
    const bool passed = slope_ok && curve.bound_ok && curve.monotone_ok;
    ok = ok && passed;
    sink.write({{"record", "error_curve"}, {"curve", name}, {"time", cfg.time},
                {"n_values", curve.n_values}, {"errors", curve.errors},
                {"fit_valid", curve.fit.valid}, {"slope", curve.fit.slope},
                {"prefactor", curve.fit.prefactor}, {"fit_window_start", curve.fit.window_start},
                {"bound_prefactor", curve.bound_prefactor}, {"bound_ok", curve.bound_ok},
                {"monotone_ok", curve.monotone_ok}, {"slope_ok", slope_ok}, {"passed", passed}});
    std::vector<std::pair<double, double>> rows;
    for (std::size_t i = 0; i < ns.size(); ++i) rows.emplace_back(ns[i], (*errs)[i]);
    sink.plot(std::string("error_") + name + ".dat", "N error", rows);
  }
  const bool triangle = triangle_consistent(cells, floor);
  ok = ok && triangle;
  sink.write({{"record", "convergence_summary"}, {"triangle_ok", triangle}, {"passed", ok}});
  sink.timing("converge", seconds_since(start));
  return ok ? kExitOk : kExitCheckFailed;
}

// -------------------------------------------------------------- spectrum

int cmd_spectrum(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  RecordSink sink(output_dir(cfg, opts), cfg);
  const auto modes = build_mode_set(cfg.dim, cfg.spectrum_cutoff);
  const auto v = build_potential(cfg, PotentialKind::pair, *modes);
  const auto report = bogoliubov_spectrum_check(modes, v, cfg.spectrum_caps);
  const double tol = 1e-6;

  for (const auto& level : report.oracle.levels) {
    sink.write({{"record", "dispersion_oracle"}, {"p", momentum_json(level.p, cfg.dim)},
                {"epsilon", level.epsilon}, {"vhat", level.vhat}, {"omega", number(level.omega)}});
  }
  if (!report.stable()) {
    sink.write({{"record", "spectrum_summary"}, {"stable", false}, {"passed", false}});
    say(opts, "quadratic Hamiltonian unstable: eps(p) + 4 V(p) < 0 for some p");
    sink.timing("spectrum", seconds_since(start));
    return kExitCheckFailed;
  }
  for (const auto& cap : report.caps) {
    sink.write({{"record", "spectrum_ground"}, {"cap", cap.cap},
                {"ground_energy", cap.ground_energy},
                {"oracle_ground_energy", report.oracle.ground_energy}});
    for (const auto& b : cap.blocks) {
      sink.write({{"record", "spectrum_block"}, {"cap", cap.cap},
                  {"p", momentum_json(b.momentum, cfg.dim)},
                  {"lowest_excitation", b.lowest_excitation}, {"oracle_lowest", b.oracle_lowest},
                  {"single_level_gap", b.single_level_gap}});
    }
  }
  if (!report.caps.empty()) {
    std::vector<std::pair<double, double>> rows;
    for (const auto& b : report.caps.back().blocks) {
      if (cfg.dim == 1) rows.emplace_back(b.momentum.c[0], b.lowest_excitation);
    }
    if (!rows.empty()) sink.plot("dispersion.dat", "p lowest_excitation", rows);
  }
  const bool ok = report.passed(tol);
  sink.write({{"record", "spectrum_summary"}, {"stable", true},
              {"ground_energy_deviation", report.ground_energy_deviation},
              {"lowest_deviation", report.max_lowest_deviation},
              {"single_level_gap", report.max_single_level_gap},
              {"monotone", report.monotone}, {"tolerance", tol}, {"passed", ok}});
  sink.timing("spectrum", seconds_since(start));
  return ok ? kExitOk : kExitCheckFailed;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const PropagationError& e) {
    err << "numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitNumerical;
  } catch (const DimensionLimitError& e) {
    err << "dimension limit: " << e.what() << " (requested " << e.requested() << ")\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const HermiticityError& e) {
    err << "check failure: " << e.what() << " (deviation " << e.deviation() << ")\n";
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace bfdyn
