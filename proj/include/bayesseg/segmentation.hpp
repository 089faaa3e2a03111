#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bayesseg/hmm_engine.hpp"
#include "bayesseg/likelihood.hpp"
#include "bayesseg/model.hpp"

namespace bayesseg {

enum class Method { sEM, sMM, BEM, VB };

std::string_view method_name(Method m);
// Case-insensitive: "sem", "smm", "bem", "vb".
Method parse_method(std::string_view name);

enum class Applicability { Strict, Warn };

struct SegConfig {
  Method method = Method::sEM;
  int max_iter = 100;
  int n_initial = 1000;
  std::uint64_t rng_seed = 0;
  Applicability applicability = Applicability::Strict;
  int jobs = 1;

  void check() const;
};

// exp[psi(alpha_ij + n_ij) - psi(|alpha_i| + n_i)] and the emission analogue,
// zero off the masks. Counts may be fractional (expected counts).
ScoreMatrices digamma_scores(const Table<double>& trans_counts,
                             const Table<double>& emit_counts,
                             const HyperParams& hp, const ModelSpec& spec);

// Posterior mode (alpha_ij + n_ij - 1) / (|alpha_i| + n_i - K_i) and the
// emission analogue. A row whose denominator vanishes becomes uniform on
// its mask and a warning is appended.
ParamMatrices mode_matrices(const Table<double>& trans_counts,
                            const Table<double>& emit_counts,
                            const HyperParams& hp, const ModelSpec& spec,
                            std::vector<std::string>* warnings = nullptr);

ScoreMatrices sem_scores(const CountTables& counts, const HyperParams& hp,
                         const ModelSpec& spec);
ParamMatrices smm_matrices(const CountTables& counts, const HyperParams& hp,
                           const ModelSpec& spec,
                           std::vector<std::string>* warnings = nullptr);

StatePath sem_step(const StatePath& s, const ObsSequence& x,
                   const HyperParams& hp, const ModelSpec& spec);
StatePath smm_step(const StatePath& s, const ObsSequence& x,
                   const HyperParams& hp, const ModelSpec& spec);

// sMM and BEM need alpha_ij >= 1 and beta_il >= 1 on every masked-in cell.
bool is_applicable(const HyperParams& hp, const ModelSpec& spec);
// Throws NotApplicable naming the first offending cell.
void check_applicable(const HyperParams& hp, const ModelSpec& spec);

// ln of the product-Dirichlet density of (P, Q), with (a - 1) ln 0 = 0 when
// a = 1.
double log_dirichlet_density(const ParamMatrices& theta, const HyperParams& hp,
                             const ModelSpec& spec);

struct MethodOutcome {
  StatePath path;
  int iterations = 0;  // Viterbi calls
  bool converged = false;
  // sEM: ln p(s_r, x). sMM: ln p(x, s_r | theta_r) + ln pi(theta_r).
  // BEM: ln p(x | theta_r) + ln pi(theta_r). VB: empty.
  std::vector<double> trace;
  std::vector<std::string> warnings;
};

MethodOutcome sem_run(const ObsSequence& x, const StatePath& s0,
                      const HyperParams& hp, const ModelSpec& spec,
                      int max_iter, bool record_trace = false);
MethodOutcome smm_run(const ObsSequence& x, const StatePath& s0,
                      const HyperParams& hp, const ModelSpec& spec,
                      int max_iter, bool record_trace = false);
MethodOutcome bem_run(const ObsSequence& x, const StatePath& s0,
                      const HyperParams& hp, const ModelSpec& spec,
                      int max_iter, bool record_trace = false);
MethodOutcome vb_run(const ObsSequence& x, const StatePath& s0,
                     const HyperParams& hp, const ModelSpec& spec,
                     int max_iter);

MethodOutcome run_method(Method method, const ObsSequence& x,
                         const StatePath& s0, const HyperParams& hp,
                         const ModelSpec& spec, int max_iter,
                         bool record_trace = false);

std::uint64_t path_hash(const StatePath& s);

struct StartRecord {
  int index = 0;
  std::uint64_t output_hash = 0;
  double initial_value = 0.0;  // ln p(s0, x)
  double final_value = 0.0;    // ln p(output, x)
  int iterations = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
};

struct RunResult {
  // False when the method was skipped in warn mode for want of
  // applicability; every other field is then empty.
  bool applicable = true;
  StatePath best_path;
  LogProb best_logjoint = LogProb::impossible();
  int distinct_outputs = 0;
  int iterations_of_best = 0;
  LogProb best_initial = LogProb::impossible();
  std::vector<StartRecord> starts;
  std::vector<std::string> warnings;
};

// Initial paths are drawn from p(s | x, theta) cycling through init_models;
// start k uses derive_seed(cfg.rng_seed, k).
RunResult multistart(const ObsSequence& x, const HyperParams& hp,
                     const ModelSpec& spec, const SegConfig& cfg,
                     const std::vector<ParamMatrices>& init_models);

// Same reduction over caller-supplied start paths. cfg.n_initial is ignored.
RunResult multistart_from_paths(const ObsSequence& x, const HyperParams& hp,
                                const ModelSpec& spec, const SegConfig& cfg,
                                const std::vector<StatePath>& starts);

}  // namespace bayesseg
