#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "bfdyn/assembly.hpp"
#include "bfdyn/propagator.hpp"

namespace bfdyn {

// ---------------------------------------------------------------- identities

struct IdentityInfo {
  std::string name;
  std::string statement;
};

/// Every identity the suite checks, in report order.
const std::vector<IdentityInfo>& identity_inventory();

struct IdentityCheck {
  std::string name;
  int n_bosons = 0;
  double deviation = 0.0;  // relative Frobenius, or relative excess for bounds
  double tolerance = 0.0;
  bool passed = false;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  bool passed() const;
  double max_deviation() const;
};

inline constexpr double kIdentityTolerance = 1e-10;

/// Conjugation, commutator and norm identities of the excitation picture on
/// sector size N for each N in `n_list`.
IdentityReport run_identity_suite(const Model& base, std::span<const int> n_list);

/// Sum_{jk} ||a_j a_k psi||^2 against <psi, N+(N+ - 1) psi> and the two
/// quadratic-form bounds, on random states and coefficient matrices.
struct RandomFormReport {
  int samples = 0;
  double max_number_identity_deviation = 0.0;
  int annihilation_bound_violations = 0;
  int creation_bound_violations = 0;
  double max_annihilation_ratio = 0.0;  // lhs / rhs, must stay <= 1
  double max_creation_ratio = 0.0;
};
RandomFormReport check_quadratic_forms(const JointBasisPtr& excitations, int samples,
                                       std::mt19937_64& rng);

/// ||Phi - Phi^{<=n}|| <= ||N+ Phi|| / (n + 1) for n = 0 .. cap - 1.
struct TailReport {
  double max_ratio = 0.0;  // tail / bound
  bool passed = true;
};
TailReport check_truncation_tail(const StateVector& phi);

// ---------------------------------------------------------------- propagation

/// Random sparse Hermitian matrix with about `per_row` entries per row,
/// scaled so its entries are O(1).
SparseMatrix random_hermitian(std::size_t dim, int per_row, std::mt19937_64& rng);

struct PropagationCheck {
  double oracle_deviation = 0.0;  // ||Krylov - dense||, NaN when not computed
  double norm_drift = 0.0;        // | ||psi(t)|| - ||psi0|| |
  double energy_drift = 0.0;      // |<H>(t) - <H>(0)|
  double reversal_error = 0.0;    // ||psi(-t) o psi(t) - psi0||
  double blocked_deviation = 0.0; // ||blocked - unblocked||, NaN when not computed
  double momentum_drift = 0.0;    // max component drift of <P>, blocked evolution
};
PropagationCheck check_propagation(const SparseMatrix& h, const ComplexVector& psi0,
                                   const PropagationConfig& cfg, bool with_oracle);
PropagationCheck check_propagation(const SparseHermitianOperator& h, const StateVector& psi0,
                                   const PropagationConfig& cfg, bool with_oracle);

// ------------------------------------------------------------ initial states

enum class InitialKind { vacuum_gaussian, single, pair };
std::string to_string(InitialKind kind);
InitialKind parse_initial_kind(const std::string& name);

struct InitialState {
  StateVector phi;
  InitialKind kind;
  int support = 0;          // largest excitation number present
  double h0_norm = 0.0;     // ||H_0 Phi||, H_0 = -Laplacian_x / 2m + dGamma(-Laplacian)
  double weight_norm = 0.0; // ||(N+ + 1) Phi||
};

/// Phi on the excitation space with the given cap. `p` is the excitation
/// momentum (single, pair), `q` the tracer momentum, `width` the Gaussian
/// width in tracer momentum (vacuum_gaussian).
InitialState make_initial_state(InitialKind kind, const Model& model, int cap, Momentum p,
                                Momentum q = {}, double width = 1.0);

// ------------------------------------------------------------------ dynamics

enum class Flavor { full, aux, bf };
std::string to_string(Flavor flavor);
Flavor parse_flavor(const std::string& name);

/// The evolving state in excitation representation at each requested time:
///   full: U_N exp(-i H_N t) U_N^* Phi^{<=N}   (cap N)
///   aux:  exp(-i H^aux t) Phi^{<=N}           (cap N)
///   bf:   exp(-i H^BF t) Phi                  (cap bf_cap)
/// Evolution is done blockwise in total momentum. Times may have any sign.
struct FlavorRun {
  Flavor flavor;
  int cap = 0;
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> energies;  // <H> in the flavor's own representation
  PropagationStats stats;
};
FlavorRun run_flavor(Flavor flavor, const Model& model, const StateVector& phi,
                     std::span<const double> times, const PropagationConfig& cfg, int bf_cap);

struct AlphaTrace {
  Flavor flavor;
  int n_bosons = 0;
  std::vector<double> times;
  std::vector<double> alpha;  // ||(N+ + 1) psi(t)||^2
  std::vector<double> norm;
};
AlphaTrace alpha_trace(const FlavorRun& run, int n_bosons);

/// Smallest v with alpha(t) <= alpha(0) e^{v|t|} at every sample of every trace.
double fit_growth_rate(std::span<const AlphaTrace> traces);
/// max over samples of alpha(t) / (alpha(0) e^{v|t|}).
double envelope_ratio(std::span<const AlphaTrace> traces, double v);

/// Uniform grid of `points` times on [start, stop].
std::vector<double> uniform_grid(double start, double stop, int points);

// -------------------------------------------------------------- convergence

/// exp(-i H^BF t) Phi with the cap doubled from `start_cap` until two
/// successive caps agree to `cap_tolerance`.
struct BfReference {
  StateVector state;
  int cap = 0;
  double cap_difference = 0.0;
  std::vector<int> caps_tried;
};
BfReference bf_reference(const Model& base, const StateVector& phi, double t,
                         const PropagationConfig& cfg, int start_cap = 8,
                         double cap_tolerance = 1e-6, int max_cap = 256);

/// All error measures at one N.
struct ConvergenceCell {
  int n_bosons = 0;
  double total = 0.0;       // ||U e^{-iH_N t} U^* Phi^{<=N} - e^{-iH^BF t} Phi||
  double aux_gap = 0.0;     // ||U e^{-iH_N t} U^* Phi^{<=N} - e^{-iH^aux t} Phi^{<=N}||
  double aux_bf_gap = 0.0;  // ||e^{-iH^aux t} Phi^{<=N} - e^{-iH^BF t} Phi||
  double tail = 0.0;        // ||Phi - Phi^{<=N}||
  std::size_t sector_dimension = 0;
  std::size_t excitation_dimension = 0;
  long matvecs = 0;
};
ConvergenceCell convergence_cell(const Model& base, const StateVector& phi,
                                 const BfReference& reference, double t, int n_bosons,
                                 const PropagationConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double prefactor = 0.0;  // error ~ prefactor * N^slope
  std::size_t window_start = 0;  // index of first point used
  bool valid = false;            // at least two usable points
};

struct ErrorCurve {
  std::string name;
  std::vector<int> n_values;
  std::vector<double> errors;
  RateFit fit;
  double bound_prefactor = 0.0;  // error(N_min) * N_min^{1/4}
  bool bound_ok = false;         // error(N) <= error(N_min) (N_min/N)^{1/4}
  bool monotone_ok = false;      // nonincreasing up to 10%
};

/// Least-squares slope on (log N, log error), skipping leading points whose
/// error is within 10x of `noise_floor`.
RateFit fit_rate(std::span<const int> n_values, std::span<const double> errors,
                 double noise_floor);
ErrorCurve make_error_curve(std::string name, std::span<const int> n_values,
                            std::span<const double> errors, double noise_floor);

/// Pointwise total <= aux_gap + aux_bf_gap (+ noise floor).
bool triangle_consistent(std::span<const ConvergenceCell> cells, double noise_floor);

// ------------------------------------------------------------------ spectrum

struct PairLevel {
  Momentum p;
  double epsilon = 0.0;
  double vhat = 0.0;
  double omega = 0.0;  // sqrt(eps^2 + 4 eps V^), NaN when unstable
};

/// Closed-form quadratic theory on each (p, -p) pair.
struct DispersionOracle {
  bool stable = true;
  double ground_energy = 0.0;  // sum over pairs of omega - eps - 2 V^
  std::vector<PairLevel> levels;

  double omega(const Momentum& p) const;
  /// Cheapest nonempty set of quasiparticles with total momentum P, with at
  /// most `max_particles` of them.
  double lowest_excitation(const Momentum& total, int max_particles) const;
};
DispersionOracle bogoliubov_oracle(const ModeSet& modes, const Potential& v);

struct SpectrumBlockResult {
  Momentum momentum;
  double lowest_excitation = 0.0;  // block minimum minus ground energy
  double oracle_lowest = 0.0;
  double single_level_gap = 0.0;   // distance of E_0 + omega(P) to the block spectrum
};

struct SpectrumCapResult {
  int cap = 0;
  double ground_energy = 0.0;
  std::vector<SpectrumBlockResult> blocks;  // one per excited single-mode momentum
};

struct SpectrumReport {
  DispersionOracle oracle;
  std::vector<SpectrumCapResult> caps;
  double ground_energy_deviation = 0.0;  // at the largest cap
  double max_lowest_deviation = 0.0;     // at the largest cap
  double max_single_level_gap = 0.0;     // at the largest cap
  bool monotone = true;                  // lowest excitations converge monotonically in cap
  bool stable() const { return oracle.stable; }
  bool passed(double tolerance) const;
};

SpectrumReport bogoliubov_spectrum_check(const ModeSetPtr& modes, const Potential& v,
                                         std::span<const int> caps);

}  // namespace bfdyn
