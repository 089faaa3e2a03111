#pragma once

#include <cstdint>
#include <limits>
#include <utility>

#include "bayesseg/model.hpp"

namespace bayesseg {

// Natural-log probability. Impossible events carry an explicit -infinity
// rather than an underflowed product.
class LogProb {
 public:
  constexpr LogProb() = default;
  constexpr explicit LogProb(double v) : value_(v) {}
  static constexpr LogProb impossible() {
    return LogProb(-std::numeric_limits<double>::infinity());
  }

  constexpr double value() const { return value_; }
  constexpr bool is_impossible() const {
    return value_ == -std::numeric_limits<double>::infinity();
  }

  friend constexpr LogProb operator+(LogProb a, LogProb b) {
    if (a.is_impossible() || b.is_impossible()) return impossible();
    return LogProb(a.value_ + b.value_);
  }
  friend constexpr auto operator<=>(LogProb, LogProb) = default;

 private:
  double value_ = 0.0;
};

// ln p(s): the transition-marginalized path probability under independent
// Dirichlet rows. -inf for inadmissible paths.
LogProb log_path_prior(const StatePath& s, const HyperParams& hp,
                       const ModelSpec& spec);

// ln p(x|s): the emission-marginalized probability of x given s.
LogProb log_emission_given_path(const ObsSequence& x, const StatePath& s,
                                const HyperParams& hp, const ModelSpec& spec);

// ln p(s, x) = ln p(s) + ln p(x|s), the segmentation objective.
LogProb log_joint(const StatePath& s, const ObsSequence& x,
                  const HyperParams& hp, const ModelSpec& spec);

// Same objective evaluated from precomputed counts; s_1 only enters via p0.
LogProb log_joint_from_counts(const CountTables& counts, int first_state,
                              const HyperParams& hp, const ModelSpec& spec);

// ln p(s, x | P, Q) for a fixed parameter pair.
LogProb log_joint_hmm(const StatePath& s, const ObsSequence& x,
                      const ParamMatrices& theta, const ModelSpec& spec);

// psi(z) for z > 0. Throws InvalidArgument otherwise.
double digamma(double z);

struct LabeledSample {
  ObsSequence x;
  StatePath y;
};

// Draw (x, y) from the HMM (p0, P, Q).
LabeledSample sample_hmm_pair(const ParamMatrices& theta, const ModelSpec& spec,
                              std::size_t length, std::uint64_t seed);

// Draw (x, y) from the Dirichlet-marginalized process by Polya urn
// reinforcement: every draw adds one ball of the drawn colour to its urn.
LabeledSample sample_polya_pair(const HyperParams& hp, const ModelSpec& spec,
                                std::size_t length, std::uint64_t seed);

}  // namespace bayesseg
