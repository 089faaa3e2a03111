#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bayesseg/likelihood.hpp"
#include "bayesseg/model.hpp"

namespace bayesseg {

struct PathStats {
  std::vector<int> state_freq;
  int block_count = 0;  // maximal constant runs
  std::optional<int> hamming_to_ref;
  // -sum (m_il / n) ln(m_il / n) over the emission counts of (path, x).
  double entropy = 0.0;
};

PathStats path_stats(const StatePath& path, const ObsSequence& x,
                     const ModelSpec& spec,
                     const std::optional<StatePath>& ref = std::nullopt);

bool is_constant(const StatePath& path);

// p(path | x, theta)^(1/n). Zero when the path has probability zero under
// theta; throws DataError when p(x | theta) = 0.
double geo_score(const StatePath& path, const ObsSequence& x,
                 const ParamMatrices& theta, const ModelSpec& spec);
// Same with ln p(x | theta) supplied by the caller.
double geo_score(const StatePath& path, const ObsSequence& x,
                 const ParamMatrices& theta, const ModelSpec& spec,
                 LogProb log_px);

// Scores of several methods against per-pair target paths, all evaluated
// under the per-pair parameters thetas[k].
struct RelativeScores {
  // 100 * sum_k score(estimate_k) / sum_k score(target_k)
  std::vector<double> relative_sum;
  // mean_k score(estimate_k) / score(target_k)
  std::vector<double> mean_ratio;
};

RelativeScores relative_sums(
    const std::vector<std::vector<StatePath>>& estimates,
    const std::vector<StatePath>& targets,
    const std::vector<ParamMatrices>& thetas,
    const std::vector<ObsSequence>& xs, const ModelSpec& spec);

// One row per c value, one column per method.
struct ComparisonTable {
  std::vector<std::string> methods;
  std::vector<double> c_values;
  std::vector<RelativeScores> rows;
};

}  // namespace bayesseg
