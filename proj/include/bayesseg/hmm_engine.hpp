#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bayesseg/likelihood.hpp"
#include "bayesseg/model.hpp"

namespace bayesseg {

// Non-negative transition/emission weights whose rows need not sum to one.
// Carries the digamma-transformed matrices of sEM and VB as well as proper
// parameter matrices.
struct ScoreMatrices {
  Table<double> trans;
  Table<double> emit;

  ScoreMatrices() = default;
  ScoreMatrices(Table<double> t, Table<double> e)
      : trans(std::move(t)), emit(std::move(e)) {}
  explicit ScoreMatrices(const ParamMatrices& theta)
      : trans(theta.trans), emit(theta.emit) {}

  // Finite, non-negative, and zero on every masked-out cell.
  void check(const ModelSpec& spec) const;
};

struct Posteriors {
  Table<double> gamma;  // n x K smoothing probabilities
  Table<double> xi;     // K x K expected transition counts
  LogProb loglik;       // ln of the total (possibly unnormalized) mass

  // sum_t gamma_t(i) 1{x_t = l}
  Table<double> expected_emissions(const ObsSequence& x, int alphabet_size) const;
};

// argmax_s [ln p0(s_1) + sum n_ij ln trans_ij + sum m_il ln emit_il].
// Ties, up to a relative 1e-12, go to the smallest state index. Throws NoAdmissiblePath when some
// position cannot be reached with positive weight.
StatePath viterbi(const ObsSequence& x, const ScoreMatrices& scores,
                  const ModelSpec& spec);
StatePath viterbi(const ObsSequence& x, const ParamMatrices& theta,
                  const ModelSpec& spec);

// Scaled forward-backward. Works for improper weights too: gamma and xi are
// then the marginals of the normalized path measure.
Posteriors forward_backward(const ObsSequence& x, const ScoreMatrices& scores,
                            const ModelSpec& spec);
Posteriors forward_backward(const ObsSequence& x, const ParamMatrices& theta,
                            const ModelSpec& spec);

// ln p(x | theta) by the scaled forward pass only.
LogProb log_likelihood(const ObsSequence& x, const ParamMatrices& theta,
                       const ModelSpec& spec);

struct BaumWelchOptions {
  int max_iter = 500;
  double tol = 1e-6;
};

struct BaumWelchResult {
  ParamMatrices theta;
  LogProb loglik;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loglik_trace;  // ln p(x|theta_r), r = 0, 1, ...
  std::vector<std::string> warnings;
};

// Maximum-likelihood EM for (P, Q) with p0 held fixed.
BaumWelchResult baum_welch(const ObsSequence& x, const ParamMatrices& theta0,
                           const ModelSpec& spec,
                           const BaumWelchOptions& options = {});

// Exact draw from p(s | x, theta) by forward filtering, backward sampling.
StatePath sample_posterior_path(const ObsSequence& x,
                                const ParamMatrices& theta,
                                const ModelSpec& spec, std::uint64_t seed);

}  // namespace bayesseg
