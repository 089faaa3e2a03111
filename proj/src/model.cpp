#include "bayesseg/model.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "bayesseg/errors.hpp"

namespace bayesseg {

namespace {

std::vector<int> row_supports(const Mask& mask) {
  std::vector<int> support(mask.rows(), 0);
  for (std::size_t i = 0; i < mask.rows(); ++i)
    for (auto v : mask.row(i)) support[i] += v != 0;
  return support;
}

}  // namespace

ModelSpec::ModelSpec(std::vector<std::string> alphabet, std::vector<double> p0,
                     Mask trans_mask, Mask emit_mask)
    : alphabet_(std::move(alphabet)),
      p0_(std::move(p0)),
      trans_mask_(std::move(trans_mask)),
      emit_mask_(std::move(emit_mask)) {
  const std::size_t K = p0_.size();
  const std::size_t L = alphabet_.size();
  if (K == 0) throw InvalidArgument("model needs at least one state");
  if (L == 0) throw InvalidArgument("model needs a non-empty alphabet");
  if (std::set<std::string>(alphabet_.begin(), alphabet_.end()).size() != L)
    throw InvalidArgument("alphabet symbols must be distinct");
  if (trans_mask_.rows() != K || trans_mask_.cols() != K)
    throw InvalidArgument("transition mask must be K x K");
  if (emit_mask_.rows() != K || emit_mask_.cols() != L)
    throw InvalidArgument("emission mask must be K x L");

  double total = 0.0;
  for (double p : p0_) {
    if (!(p >= 0.0)) throw InvalidArgument("p0 entries must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument(fmt::format("p0 sums to {:.17g}, not 1", total));

  trans_support_ = row_supports(trans_mask_);
  emit_support_ = row_supports(emit_mask_);
  for (std::size_t i = 0; i < K; ++i) {
    if (trans_support_[i] == 0)
      throw InvalidArgument(
          fmt::format("state {} has no possible transition", i + 1));
    if (emit_support_[i] == 0)
      throw InvalidArgument(
          fmt::format("state {} has no possible emission", i + 1));
  }
}

ModelSpec ModelSpec::full(std::vector<std::string> alphabet,
                          std::vector<double> p0) {
  const std::size_t K = p0.size();
  const std::size_t L = alphabet.size();
  return ModelSpec(std::move(alphabet), std::move(p0), Mask(K, K, 1),
                   Mask(K, L, 1));
}

ModelSpec ModelSpec::with_p0(std::vector<double> p0) const {
  return ModelSpec(alphabet_, std::move(p0), trans_mask_, emit_mask_);
}

CountTables::CountTables(int num_states, int alphabet_size)
    : trans(num_states, num_states, 0),
      emit(num_states, alphabet_size, 0),
      trans_row(num_states, 0),
      emit_row(num_states, 0) {}

CountTables& CountTables::operator+=(const CountTables& other) {
  if (other.trans.rows() != trans.rows() || other.emit.cols() != emit.cols())
    throw InvalidArgument("count tables have different shapes");
  auto dst_t = trans.values();
  auto src_t = other.trans.values();
  for (std::size_t k = 0; k < dst_t.size(); ++k) dst_t[k] += src_t[k];
  auto dst_e = emit.values();
  auto src_e = other.emit.values();
  for (std::size_t k = 0; k < dst_e.size(); ++k) dst_e[k] += src_e[k];
  for (std::size_t i = 0; i < trans_row.size(); ++i) {
    trans_row[i] += other.trans_row[i];
    emit_row[i] += other.emit_row[i];
  }
  return *this;
}

HyperParams::HyperParams(Table<double> a, Table<double> b)
    : alpha(std::move(a)), beta(std::move(b)) {
  if (alpha.rows() != beta.rows())
    throw InvalidArgument("alpha and beta must have the same number of rows");
  alpha_sum.resize(alpha.rows());
  beta_sum.resize(beta.rows());
  for (std::size_t i = 0; i < alpha.rows(); ++i) {
    auto ra = alpha.row(i);
    auto rb = beta.row(i);
    alpha_sum[i] = std::accumulate(ra.begin(), ra.end(), 0.0);
    beta_sum[i] = std::accumulate(rb.begin(), rb.end(), 0.0);
  }
}

void HyperParams::check(const ModelSpec& spec) const {
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  if (alpha.rows() != std::size_t(K) || alpha.cols() != std::size_t(K) ||
      beta.rows() != std::size_t(K) || beta.cols() != std::size_t(L))
    throw InvalidArgument("hyperparameter shapes do not match the model");
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      const double a = alpha(i, j);
      if (spec.can_transit(i, j) ? !(a > 0.0 && std::isfinite(a)) : a != 0.0)
        throw InvalidArgument(fmt::format(
            "alpha({},{}) = {} does not match the transition mask", i + 1,
            j + 1, a));
    }
    for (int l = 0; l < L; ++l) {
      const double b = beta(i, l);
      if (spec.can_emit(i, l) ? !(b > 0.0 && std::isfinite(b)) : b != 0.0)
        throw InvalidArgument(fmt::format(
            "beta({},{}) = {} does not match the emission mask", i + 1, l + 1,
            b));
    }
  }
}

void ParamMatrices::check(const ModelSpec& spec, double tol) const {
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  if (trans.rows() != std::size_t(K) || trans.cols() != std::size_t(K) ||
      emit.rows() != std::size_t(K) || emit.cols() != std::size_t(L))
    throw InvalidArgument("parameter matrix shapes do not match the model");
  auto check_row = [&](std::span<const double> row, auto allowed,
                       const char* what, int i) {
    double total = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double v = row[c];
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InvalidArgument(
            fmt::format("{} row {} has an invalid entry", what, i + 1));
      if (v > 0.0 && !allowed(int(c)))
        throw InvalidArgument(fmt::format(
            "{} row {} puts mass on a masked-out cell", what, i + 1));
      total += v;
    }
    if (std::abs(total - 1.0) > tol)
      throw InvalidArgument(
          fmt::format("{} row {} sums to {:.17g}", what, i + 1, total));
  };
  for (int i = 0; i < K; ++i) {
    check_row(trans.row(i), [&](int j) { return spec.can_transit(i, j); },
              "transition", i);
    check_row(emit.row(i), [&](int l) { return spec.can_emit(i, l); },
              "emission", i);
  }
}

void check_sequence(const ObsSequence& x, const ModelSpec& spec) {
  if (x.size() == 0) throw InvalidArgument("empty observation sequence");
  for (std::size_t t = 0; t < x.size(); ++t)
    if (x[t] < 0 || x[t] >= spec.alphabet_size())
      throw InvalidArgument(
          fmt::format("symbol index {} at position {} is out of range", x[t],
                      t + 1));
}

void check_path(const StatePath& s, const ModelSpec& spec) {
  if (s.size() == 0) throw InvalidArgument("empty state path");
  for (std::size_t t = 0; t < s.size(); ++t)
    if (s[t] < 0 || s[t] >= spec.num_states())
      throw InvalidArgument(fmt::format(
          "state index {} at position {} is out of range", s[t], t + 1));
}

CountTables count_transitions(const StatePath& s, int num_states) {
  CountTables counts(num_states, 0);
  for (std::size_t t = 0; t + 1 < s.size(); ++t) {
    counts.trans(s[t], s[t + 1]) += 1;
    counts.trans_row[s[t]] += 1;
  }
  return counts;
}

CountTables count_path(const StatePath& s, const ObsSequence& x,
                       const ModelSpec& spec) {
  if (s.size() != x.size())
    throw InvalidArgument(fmt::format(
        "path length {} differs from sequence length {}", s.size(), x.size()));
  check_path(s, spec);
  check_sequence(x, spec);
  CountTables counts(spec.num_states(), spec.alphabet_size());
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (t + 1 < s.size()) {
      counts.trans(s[t], s[t + 1]) += 1;
      counts.trans_row[s[t]] += 1;
    }
    counts.emit(s[t], x[t]) += 1;
    counts.emit_row[s[t]] += 1;
  }
  return counts;
}

bool is_admissible_path(const StatePath& s, const ModelSpec& spec) {
  check_path(s, spec);
  if (!(spec.p0()[s[0]] > 0.0)) return false;
  for (std::size_t t = 0; t + 1 < s.size(); ++t)
    if (!spec.can_transit(s[t], s[t + 1])) return false;
  return true;
}

bool is_admissible(const StatePath& s, const ObsSequence& x,
                   const ModelSpec& spec) {
  if (s.size() != x.size())
    throw InvalidArgument(fmt::format(
        "path length {} differs from sequence length {}", s.size(), x.size()));
  check_sequence(x, spec);
  if (!is_admissible_path(s, spec)) return false;
  for (std::size_t t = 0; t < s.size(); ++t)
    if (!spec.can_emit(s[t], x[t])) return false;
  return true;
}

std::vector<double> estimate_p0(const Corpus& corpus, int num_states) {
  if (corpus.empty()) throw DataError("cannot estimate p0 from an empty corpus");
  std::vector<double> p0(num_states, 0.0);
  for (const auto& pair : corpus) {
    if (pair.y.size() == 0)
      throw DataError(fmt::format("record '{}' is empty", pair.id));
    if (pair.y[0] < 0 || pair.y[0] >= num_states)
      throw DataError(
          fmt::format("record '{}' starts in an unknown state", pair.id));
    p0[pair.y[0]] += 1.0;
  }
  for (double& p : p0) p /= double(corpus.size());
  return p0;
}

MaskPair derive_masks(const Corpus& corpus, int num_states,
                      int alphabet_size) {
  if (corpus.empty()) throw DataError("cannot derive masks from an empty corpus");
  const int K = num_states;
  const int L = alphabet_size;
  CountTables pooled(K, L);
  for (const auto& pair : corpus) {
    if (pair.x.size() != pair.y.size())
      throw DataError(fmt::format("record '{}': {} symbols but {} states",
                                  pair.id, pair.x.size(), pair.y.size()));
    for (std::size_t t = 0; t < pair.y.size(); ++t) {
      const int i = pair.y[t];
      const int l = pair.x[t];
      if (i < 0 || i >= K || l < 0 || l >= L)
        throw DataError(fmt::format("record '{}': position {} is out of range",
                                    pair.id, t + 1));
      if (t + 1 < pair.y.size()) {
        const int j = pair.y[t + 1];
        if (j >= 0 && j < K) pooled.trans(i, j) += 1;
      }
      pooled.emit(i, l) += 1;
      pooled.emit_row[i] += 1;
    }
  }
  MaskPair masks{Mask(K, K, 0), Mask(K, L, 0)};
  for (int i = 0; i < K; ++i) {
    if (pooled.emit_row[i] == 0)
      throw DataError(fmt::format("state {} never occurs in the corpus", i + 1));
    for (int j = 0; j < K; ++j) masks.trans(i, j) = pooled.trans(i, j) > 0;
    for (int l = 0; l < L; ++l) masks.emit(i, l) = pooled.emit(i, l) > 0;
  }
  return masks;
}

ModelSpec spec_from_corpus(const Corpus& corpus, int num_states,
                           std::vector<std::string> alphabet,
                           std::optional<std::vector<double>> p0) {
  auto masks = derive_masks(corpus, num_states, int(alphabet.size()));
  for (int i = 0; i < num_states; ++i) {
    bool any = false;
    for (auto v : masks.trans.row(i)) any = any || v;
    if (!any)
      throw DataError(fmt::format(
          "state {} is never followed by another state in the corpus", i + 1));
  }
  std::vector<double> start =
      p0 ? std::move(*p0) : estimate_p0(corpus, num_states);
  return ModelSpec(std::move(alphabet), std::move(start), std::move(masks.trans),
                   std::move(masks.emit));
}

ParamMatrices uniform_on_masks(const ModelSpec& spec) {
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  ParamMatrices theta{Table<double>(K, K, 0.0), Table<double>(K, L, 0.0)};
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j)
      if (spec.can_transit(i, j)) theta.trans(i, j) = 1.0 / spec.trans_support(i);
    for (int l = 0; l < L; ++l)
      if (spec.can_emit(i, l)) theta.emit(i, l) = 1.0 / spec.emit_support(i);
  }
  return theta;
}

}  // namespace bayesseg
