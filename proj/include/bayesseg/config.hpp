#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bayesseg/priors.hpp"
#include "bayesseg/segmentation.hpp"

namespace bayesseg {

enum class FrequentistEstimate { PStar, MLE };
enum class SampleMode { HMM, Hierarchical, Polya };

// INI configuration. Relative paths are resolved against the directory of
// the configuration file. Unknown sections or keys are a ConfigError.
struct RunConfig {
  struct Model {
    int states = 0;
    std::vector<std::string> alphabet;
    std::optional<std::vector<double>> p0;  // empty: estimate from training
  } model;

  struct Prior {
    bool override_mode = false;
    std::optional<ConcentrationOverride> N;
    std::optional<ConcentrationOverride> M;
    ConcentrationOptions options;
  } prior;

  struct Segmentation {
    std::vector<std::string> methods{"viterbi", "sem"};
    int n_initial = 1000;
    int max_iter = 100;
    std::uint64_t seed = 0;
    int jobs = 1;
    Applicability applicability = Applicability::Warn;
    FrequentistEstimate frequentist = FrequentistEstimate::PStar;
    int em_starts = 10;
    int em_max_iter = 500;
    double em_tol = 1e-6;
  } segmentation;

  struct Evaluation {
    std::vector<double> c{1e6, 1, 0.8, 0.6, 0.4, 0.3, 0.2, 0.1, 0.005};
  } evaluation;

  struct Paths {
    std::string train;
    std::string test;
    std::string output_dir = ".";  // the config directory unless set
  } paths;

  struct Sample {
    SampleMode mode = SampleMode::HMM;
    int pairs = 50;
    int test_pairs = 0;
    int length = 200;
    int spread = 0;  // lengths uniform on [length - spread, length + spread]
    Table<double> trans;
    Table<double> emit;
    double N = 1000.0;  // concentrations for hierarchical and polya modes
    double M = 1000.0;
  } sample;

  std::string source;  // configuration file path
  std::string hash;    // FNV-1a of the configuration bytes, hex

  static RunConfig load(const std::string& path);
  static RunConfig parse(const std::string& text, const std::string& base_dir);
};

std::string fnv1a_hex(const std::string& bytes);

}  // namespace bayesseg
