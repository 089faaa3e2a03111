#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bayesseg/table.hpp"

namespace bayesseg {

// States and symbols are 0-based everywhere inside the library. Corpus and
// report files use 1-based state labels; the conversion happens in corpus.cpp.

using Mask = Table<std::uint8_t>;

struct StatePath {
  std::vector<int> states;

  std::size_t size() const { return states.size(); }
  int operator[](std::size_t t) const { return states[t]; }
  auto begin() const { return states.begin(); }
  auto end() const { return states.end(); }
  friend auto operator<=>(const StatePath&, const StatePath&) = default;
};

struct ObsSequence {
  std::vector<int> symbols;

  std::size_t size() const { return symbols.size(); }
  int operator[](std::size_t t) const { return symbols[t]; }
  auto begin() const { return symbols.begin(); }
  auto end() const { return symbols.end(); }
  friend bool operator==(const ObsSequence&, const ObsSequence&) = default;
};

// One labelled training or test record.
struct LabeledPair {
  std::string id;
  ObsSequence x;
  StatePath y;
  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

using Corpus = std::vector<LabeledPair>;

// State count, alphabet, fixed initial distribution and the sparsity masks
// marking which transitions and emissions are possible.
class ModelSpec {
 public:
  ModelSpec() = default;
  ModelSpec(std::vector<std::string> alphabet, std::vector<double> p0,
            Mask trans_mask, Mask emit_mask);

  // Every transition and emission allowed.
  static ModelSpec full(std::vector<std::string> alphabet,
                        std::vector<double> p0);

  int num_states() const { return static_cast<int>(p0_.size()); }
  int alphabet_size() const { return static_cast<int>(alphabet_.size()); }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::vector<double>& p0() const { return p0_; }
  const Mask& trans_mask() const { return trans_mask_; }
  const Mask& emit_mask() const { return emit_mask_; }

  bool can_transit(int i, int j) const { return trans_mask_(i, j) != 0; }
  bool can_emit(int i, int l) const { return emit_mask_(i, l) != 0; }

  // K_i and L_i: number of possible transitions / emissions out of state i.
  int trans_support(int i) const { return trans_support_[i]; }
  int emit_support(int i) const { return emit_support_[i]; }

  ModelSpec with_p0(std::vector<double> p0) const;

 private:
  std::vector<std::string> alphabet_;
  std::vector<double> p0_;
  Mask trans_mask_;
  Mask emit_mask_;
  std::vector<int> trans_support_;
  std::vector<int> emit_support_;
};

// Transition counts n_ij(s), emission counts m_il(s,x) and their row sums.
struct CountTables {
  Table<std::int64_t> trans;
  Table<std::int64_t> emit;
  std::vector<std::int64_t> trans_row;
  std::vector<std::int64_t> emit_row;

  CountTables() = default;
  CountTables(int num_states, int alphabet_size);
  CountTables& operator+=(const CountTables& other);
  friend bool operator==(const CountTables&, const CountTables&) = default;
};

// Dirichlet hyperparameters. Zero exactly on impossible cells.
struct HyperParams {
  Table<double> alpha;
  Table<double> beta;
  std::vector<double> alpha_sum;
  std::vector<double> beta_sum;

  HyperParams() = default;
  HyperParams(Table<double> alpha, Table<double> beta);

  // Throws InvalidArgument unless alpha/beta are positive exactly on the
  // masked-in cells of spec.
  void check(const ModelSpec& spec) const;
};

// A proper HMM parameter pair: stochastic rows, zeros off the masks.
struct ParamMatrices {
  Table<double> trans;
  Table<double> emit;

  void check(const ModelSpec& spec, double tol = 1e-10) const;
};

CountTables count_path(const StatePath& s, const ObsSequence& x,
                       const ModelSpec& spec);
CountTables count_transitions(const StatePath& s, int num_states);

bool is_admissible_path(const StatePath& s, const ModelSpec& spec);
bool is_admissible(const StatePath& s, const ObsSequence& x,
                   const ModelSpec& spec);

struct MaskPair {
  Mask trans;
  Mask emit;
};

// Masks from pooled corpus counts: a cell is possible iff it was seen at
// least once. Throws DataError naming any state that never occurs.
MaskPair derive_masks(const Corpus& corpus, int num_states, int alphabet_size);

// derive_masks plus a validated ModelSpec. Without an explicit p0 the corpus
// start-state frequencies are used. A state seen only at sequence ends has
// an empty transition row and is rejected here.
ModelSpec spec_from_corpus(const Corpus& corpus, int num_states,
                           std::vector<std::string> alphabet,
                           std::optional<std::vector<double>> p0 = std::nullopt);

// Start-state frequencies of a corpus.
std::vector<double> estimate_p0(const Corpus& corpus, int num_states);

// Uniform distribution over the masked-in cells of each row.
ParamMatrices uniform_on_masks(const ModelSpec& spec);

void check_sequence(const ObsSequence& x, const ModelSpec& spec);
void check_path(const StatePath& s, const ModelSpec& spec);

}  // namespace bayesseg
