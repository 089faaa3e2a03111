#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bayesseg/config.hpp"
#include "bayesseg/evaluation.hpp"
#include "bayesseg/hmm_engine.hpp"
#include "bayesseg/priors.hpp"
#include "bayesseg/segmentation.hpp"

namespace bayesseg {

// Training corpus with its masks, p0 and empirical prior summary.
struct TrainingModel {
  Corpus corpus;
  ModelSpec spec;
  EmpiricalSummary summary;
  double n1 = 0.0;  // 1 / smallest entry of p*
  double m1 = 0.0;  // 1 / smallest entry of q*
};

TrainingModel load_training(const RunConfig& cfg);

// Empirical hyperparameters, or the configured overrides resolved against a
// sequence of the given length.
HyperParams hyperparams_for(const TrainingModel& tm, const RunConfig& cfg,
                            std::size_t length);

ParamMatrices frequentist_theta(const TrainingModel& tm,
                                FrequentistEstimate which);

// Relative frequencies of one labelled path; rows without counts are
// uniform on their mask.
ParamMatrices count_theta(const StatePath& s, const ObsSequence& x,
                          const ModelSpec& spec);

struct EmDecode {
  StatePath path;
  LogProb loglik;  // ln p(x | theta) at the selected Baum-Welch fixed point
  int iterations = 0;
};

// Baum-Welch from the direct-count parameters of each start path and from
// `theta_train`; the fit with the highest likelihood is decoded by Viterbi.
EmDecode em_decode(const ObsSequence& x, const ModelSpec& spec,
                   const ParamMatrices& theta_train,
                   const std::vector<StatePath>& starts,
                   const BaumWelchOptions& options);

// Posterior draws used as starting paths, cycling through init_models.
std::vector<StatePath> draw_start_paths(const ObsSequence& x,
                                        const ModelSpec& spec,
                                        const std::vector<ParamMatrices>& init_models,
                                        int count, std::uint64_t seed);

void write_prior_summary(const TrainingModel& tm, const RunConfig& cfg,
                         const std::string& json_path,
                         const std::string& text_path);

struct SegmentRow {
  std::string id;
  std::size_t pair_index = 0;
  std::string method;
  std::size_t length = 0;
  std::string status;  // ok, na, error: ..., inadmissible
  double log_joint = 0.0;
  double path0 = 0.0;  // best ln p(s0, x) over starting paths
  int distinct = 0;
  int iterations = 0;
  std::optional<PathStats> stats;
  StatePath path;
};

struct CompareReport {
  std::vector<std::string> methods;  // Freq, sEM, VB, EM
  ComparisonTable table;
  std::vector<int> constant_paths;         // per method
  std::vector<int> target_constant_paths;  // per c
  std::vector<std::string> skipped;        // ids of unusable test pairs
  std::size_t pairs_used = 0;
};

struct SampleReport {
  Corpus train;
  Corpus test;
};

// Each command writes its files into cfg.paths.output_dir (sample writes
// to paths.train / paths.test) and logs warnings to `log`.
void cmd_estimate_priors(const RunConfig& cfg, std::ostream& log);
std::vector<SegmentRow> cmd_segment(const RunConfig& cfg, std::ostream& log);
CompareReport cmd_compare(const RunConfig& cfg, std::ostream& log);
SampleReport cmd_sample(const RunConfig& cfg, std::ostream& log);
void cmd_stats(const RunConfig& cfg, const std::string& input, std::ostream& out);

}  // namespace bayesseg
