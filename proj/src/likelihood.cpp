#include "bayesseg/likelihood.hpp"

#include <cmath>

#include <fmt/format.h>

#include "bayesseg/errors.hpp"
#include "bayesseg/random.hpp"

namespace bayesseg {

namespace {

// Sum of Dirichlet-multinomial row terms
//   lnG(|a|) - lnG(|a| + n) + sum_j [lnG(a_j + n_j) - lnG(a_j)]
// accumulated in extended precision: for long sequences the individual
// log-gamma values are ~1e5 while their difference is O(10).
long double dirichlet_row_term(std::span<const double> a, double a_sum,
                               std::span<const std::int64_t> counts,
                               std::int64_t total) {
  if (total == 0) return 0.0L;
  long double acc = std::lgamma(static_cast<long double>(a_sum)) -
                    std::lgamma(static_cast<long double>(a_sum) + total);
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (counts[j] == 0) continue;
    const long double aj = a[j];
    acc += std::lgamma(aj + counts[j]) - std::lgamma(aj);
  }
  return acc;
}

void check_lengths(const StatePath& s, const ObsSequence& x) {
  if (s.size() != x.size())
    throw InvalidArgument(fmt::format(
        "path length {} differs from sequence length {}", s.size(), x.size()));
}

LogProb transition_part(const CountTables& counts, int first_state,
                        const HyperParams& hp, const ModelSpec& spec) {
  const int K = spec.num_states();
  if (!(spec.p0()[first_state] > 0.0)) return LogProb::impossible();
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      if (counts.trans(i, j) > 0 && !spec.can_transit(i, j))
        return LogProb::impossible();
  long double acc = std::log(static_cast<long double>(spec.p0()[first_state]));
  for (int i = 0; i < K; ++i)
    acc += dirichlet_row_term(hp.alpha.row(i), hp.alpha_sum[i],
                              counts.trans.row(i), counts.trans_row[i]);
  return LogProb(static_cast<double>(acc));
}

LogProb emission_part(const CountTables& counts, const HyperParams& hp,
                      const ModelSpec& spec) {
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  for (int i = 0; i < K; ++i)
    for (int l = 0; l < L; ++l)
      if (counts.emit(i, l) > 0 && !spec.can_emit(i, l))
        return LogProb::impossible();
  long double acc = 0.0L;
  for (int i = 0; i < K; ++i)
    acc += dirichlet_row_term(hp.beta.row(i), hp.beta_sum[i],
                              counts.emit.row(i), counts.emit_row[i]);
  return LogProb(static_cast<double>(acc));
}

}  // namespace

LogProb log_path_prior(const StatePath& s, const HyperParams& hp,
                       const ModelSpec& spec) {
  check_path(s, spec);
  hp.check(spec);
  return transition_part(count_transitions(s, spec.num_states()), s[0], hp,
                         spec);
}

LogProb log_emission_given_path(const ObsSequence& x, const StatePath& s,
                                const HyperParams& hp, const ModelSpec& spec) {
  check_lengths(s, x);
  hp.check(spec);
  return emission_part(count_path(s, x, spec), hp, spec);
}

LogProb log_joint_from_counts(const CountTables& counts, int first_state,
                              const HyperParams& hp, const ModelSpec& spec) {
  return transition_part(counts, first_state, hp, spec) +
         emission_part(counts, hp, spec);
}

LogProb log_joint(const StatePath& s, const ObsSequence& x,
                  const HyperParams& hp, const ModelSpec& spec) {
  check_lengths(s, x);
  hp.check(spec);
  return log_joint_from_counts(count_path(s, x, spec), s[0], hp, spec);
}

LogProb log_joint_hmm(const StatePath& s, const ObsSequence& x,
                      const ParamMatrices& theta, const ModelSpec& spec) {
  const CountTables counts = count_path(s, x, spec);
  const double start = spec.p0()[s[0]];
  if (!(start > 0.0)) return LogProb::impossible();
  double acc = std::log(start);
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      const auto n = counts.trans(i, j);
      if (n == 0) continue;
      if (!(theta.trans(i, j) > 0.0)) return LogProb::impossible();
      acc += double(n) * std::log(theta.trans(i, j));
    }
    for (int l = 0; l < L; ++l) {
      const auto m = counts.emit(i, l);
      if (m == 0) continue;
      if (!(theta.emit(i, l) > 0.0)) return LogProb::impossible();
      acc += double(m) * std::log(theta.emit(i, l));
    }
  }
  return LogProb(acc);
}

double digamma(double z) {
  if (!(z > 0.0) || !std::isfinite(z))
    throw InvalidArgument(fmt::format("digamma needs z > 0, got {}", z));
  long double x = z;
  long double shift = 0.0L;
  while (x < 8.0L) {
    shift += 1.0L / x;
    x += 1.0L;
  }
  const long double inv = 1.0L / x;
  const long double inv2 = inv * inv;
  // Asymptotic series with Bernoulli coefficients B_2 .. B_14.
  const long double series =
      inv2 * (1.0L / 12 -
              inv2 * (1.0L / 120 -
                      inv2 * (1.0L / 252 -
                              inv2 * (1.0L / 240 -
                                      inv2 * (1.0L / 132 -
                                              inv2 * (691.0L / 32760 -
                                                      inv2 / 12.0L))))));
  return static_cast<double>(std::log(x) - 0.5L * inv - series - shift);
}

LabeledSample sample_hmm_pair(const ParamMatrices& theta, const ModelSpec& spec,
                              std::size_t length, std::uint64_t seed) {
  if (length == 0) throw InvalidArgument("sample length must be positive");
  theta.check(spec);
  Rng rng(seed);
  LabeledSample out;
  out.x.symbols.reserve(length);
  out.y.states.reserve(length);
  int state = draw_categorical(spec.p0(), rng);
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) state = draw_categorical(theta.trans.row(state), rng);
    out.y.states.push_back(state);
    out.x.symbols.push_back(draw_categorical(theta.emit.row(state), rng));
  }
  return out;
}

LabeledSample sample_polya_pair(const HyperParams& hp, const ModelSpec& spec,
                                std::size_t length, std::uint64_t seed) {
  if (length == 0) throw InvalidArgument("sample length must be positive");
  hp.check(spec);
  Rng rng(seed);
  // Urn contents start at the hyperparameters and gain one ball per draw.
  Table<double> trans_urn = hp.alpha;
  Table<double> emit_urn = hp.beta;
  LabeledSample out;
  out.x.symbols.reserve(length);
  out.y.states.reserve(length);
  int state = draw_categorical(spec.p0(), rng);
  for (std::size_t t = 0; t < length; ++t) {
    if (t > 0) {
      const int next = draw_categorical(trans_urn.row(state), rng);
      trans_urn(state, next) += 1.0;
      state = next;
    }
    out.y.states.push_back(state);
    const int symbol = draw_categorical(emit_urn.row(state), rng);
    emit_urn(state, symbol) += 1.0;
    out.x.symbols.push_back(symbol);
  }
  return out;
}

}  // namespace bayesseg
