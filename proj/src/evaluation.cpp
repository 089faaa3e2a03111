#include "bayesseg/evaluation.hpp"

#include <cmath>

#include <fmt/format.h>

#include "bayesseg/errors.hpp"
#include "bayesseg/hmm_engine.hpp"

namespace bayesseg {

PathStats path_stats(const StatePath& path, const ObsSequence& x,
                     const ModelSpec& spec,
                     const std::optional<StatePath>& ref) {
  check_path(path, spec);
  check_sequence(x, spec);
  if (path.size() != x.size())
    throw InvalidArgument("path and sequence lengths differ");
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  PathStats st;
  st.state_freq.assign(K, 0);
  Table<int> m(K, L, 0);
  for (std::size_t t = 0; t < path.size(); ++t) {
    ++st.state_freq[path[t]];
    ++m(path[t], x[t]);
    if (t == 0 || path[t] != path[t - 1]) ++st.block_count;
  }
  if (ref) {
    if (ref->size() != path.size())
      throw InvalidArgument("reference path length differs");
    int d = 0;
    for (std::size_t t = 0; t < path.size(); ++t) d += path[t] != (*ref)[t];
    st.hamming_to_ref = d;
  }
  const double n = double(path.size());
  for (int v : m.values())
    if (v > 0) st.entropy -= (v / n) * std::log(v / n);
  return st;
}

bool is_constant(const StatePath& path) {
  for (std::size_t t = 1; t < path.size(); ++t)
    if (path[t] != path[0]) return false;
  return true;
}

double geo_score(const StatePath& path, const ObsSequence& x,
                 const ParamMatrices& theta, const ModelSpec& spec) {
  LogProb log_px;
  try {
    log_px = log_likelihood(x, theta, spec);
  } catch (const NoAdmissiblePath& e) {
    throw DataError(fmt::format("p(x | theta) = 0: {}", e.what()));
  }
  return geo_score(path, x, theta, spec, log_px);
}

double geo_score(const StatePath& path, const ObsSequence& x,
                 const ParamMatrices& theta, const ModelSpec& spec,
                 LogProb log_px) {
  if (log_px.is_impossible()) throw DataError("p(x | theta) = 0");
  const LogProb joint = log_joint_hmm(path, x, theta, spec);
  if (joint.is_impossible()) return 0.0;
  return std::exp((joint.value() - log_px.value()) / double(x.size()));
}

RelativeScores relative_sums(
    const std::vector<std::vector<StatePath>>& estimates,
    const std::vector<StatePath>& targets,
    const std::vector<ParamMatrices>& thetas,
    const std::vector<ObsSequence>& xs, const ModelSpec& spec) {
  const std::size_t pairs = xs.size();
  if (targets.size() != pairs || thetas.size() != pairs)
    throw InvalidArgument("targets, thetas and sequences are not aligned");
  for (const auto& e : estimates)
    if (e.size() != pairs)
      throw InvalidArgument("method paths are not aligned with sequences");

  const std::size_t methods = estimates.size();
  std::vector<double> sums(methods, 0.0), ratios(methods, 0.0);
  double target_sum = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const LogProb log_px = log_likelihood(xs[k], thetas[k], spec);
    const double target = geo_score(targets[k], xs[k], thetas[k], spec, log_px);
    if (!(target > 0.0))
      throw DataError(fmt::format("target path of pair {} has zero score", k + 1));
    target_sum += target;
    for (std::size_t j = 0; j < methods; ++j) {
      const double score =
          estimates[j][k] == targets[k]
              ? target
              : geo_score(estimates[j][k], xs[k], thetas[k], spec, log_px);
      sums[j] += score;
      ratios[j] += score / target;
    }
  }
  RelativeScores out;
  for (std::size_t j = 0; j < methods; ++j) {
    out.relative_sum.push_back(pairs ? sums[j] / target_sum * 100.0 : 100.0);
    out.mean_ratio.push_back(pairs ? ratios[j] / double(pairs) : 1.0);
  }
  return out;
}

}  // namespace bayesseg
