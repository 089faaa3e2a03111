#include "bayesseg/segmentation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>

#include <fmt/format.h>

#include "bayesseg/errors.hpp"
#include "bayesseg/parallel.hpp"
#include "bayesseg/random.hpp"

namespace bayesseg {

namespace {

Table<double> to_real(const Table<std::int64_t>& t) {
  Table<double> out(t.rows(), t.cols(), 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) out(r, c) = double(t(r, c));
  return out;
}

void digamma_block(const Table<double>& counts, const Table<double>& a,
                   const Mask& mask, Table<double>& out) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (mask(i, j)) total += a(i, j) + counts(i, j);
    const double row_psi = digamma(total);
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (mask(i, j))
        out(i, j) = std::exp(digamma(a(i, j) + counts(i, j)) - row_psi);
  }
}

void mode_block(const Table<double>& counts, const Table<double>& a,
                const Mask& mask, const char* what,
                std::vector<std::string>* warnings, Table<double>& out) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double denom = 0.0;
    int support = 0;
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (mask(i, j)) {
        denom += a(i, j) + counts(i, j) - 1.0;
        ++support;
      }
    if (!(denom > 0.0)) {
      for (std::size_t j = 0; j < a.cols(); ++j)
        if (mask(i, j)) out(i, j) = 1.0 / support;
      if (warnings)
        warnings->push_back(fmt::format(
            "{} row {}: degenerate posterior mode, using uniform row", what,
            i + 1));
      continue;
    }
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (mask(i, j))
        out(i, j) = std::max(0.0, a(i, j) + counts(i, j) - 1.0) / denom;
  }
}

double log_dirichlet_block(const Table<double>& theta, const Table<double>& a,
                           const Mask& mask) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    long double total = 0.0L;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (!mask(i, j)) continue;
      const long double aij = a(i, j);
      total += aij;
      acc -= std::lgamma(aij);
      if (aij == 1.0L) continue;
      const double t = theta(i, j);
      if (t > 0.0)
        acc += (aij - 1.0L) * std::log(static_cast<long double>(t));
      else
        return aij > 1.0L ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
    }
    acc += std::lgamma(total);
  }
  return static_cast<double>(acc);
}

// Expected counts of a crisp path in real-valued tables.
std::pair<Table<double>, Table<double>> crisp_counts(const StatePath& s,
                                                     const ObsSequence& x,
                                                     const ModelSpec& spec) {
  const CountTables c = count_path(s, x, spec);
  return {to_real(c.trans), to_real(c.emit)};
}

void require_start(const StatePath& s0, const ObsSequence& x,
                   const ModelSpec& spec) {
  if (s0.size() != x.size())
    throw InvalidArgument(fmt::format(
        "initial path has length {} but the sequence has length {}", s0.size(),
        x.size()));
  if (!is_admissible(s0, x, spec))
    throw InvalidArgument("initial path is not admissible");
}

// Viterbi on expected-count matrices, then forward-backward for the next
// counts, until the decoded path repeats.
template <typename Build>
MethodOutcome expected_count_loop(const ObsSequence& x, const StatePath& s0,
                                  const ModelSpec& spec, int max_iter,
                                  Build&& build) {
  MethodOutcome out;
  auto [xi, emitted] = crisp_counts(s0, x, spec);
  StatePath current = s0;
  for (int it = 1; it <= max_iter; ++it) {
    const ScoreMatrices scores = build(xi, emitted, out);
    StatePath next = viterbi(x, scores, spec);
    out.iterations = it;
    if (next == current) {
      out.converged = true;
      break;
    }
    current = std::move(next);
    if (it == max_iter) break;
    const Posteriors post = forward_backward(x, scores, spec);
    xi = post.xi;
    emitted = post.expected_emissions(x, spec.alphabet_size());
  }
  out.path = std::move(current);
  return out;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::sEM:
      return "sEM";
    case Method::sMM:
      return "sMM";
    case Method::BEM:
      return "BEM";
    case Method::VB:
      return "VB";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  for (char& ch : lower) ch = char(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "sem") return Method::sEM;
  if (lower == "smm") return Method::sMM;
  if (lower == "bem") return Method::BEM;
  if (lower == "vb") return Method::VB;
  throw InvalidArgument(fmt::format("unknown segmentation method '{}'", name));
}

void SegConfig::check() const {
  if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  if (n_initial < 1) throw InvalidArgument("n_initial must be at least 1");
  if (jobs < 1) throw InvalidArgument("jobs must be at least 1");
}

ScoreMatrices digamma_scores(const Table<double>& trans_counts,
                             const Table<double>& emit_counts,
                             const HyperParams& hp, const ModelSpec& spec) {
  const int K = spec.num_states();
  ScoreMatrices s(Table<double>(K, K, 0.0),
                  Table<double>(K, spec.alphabet_size(), 0.0));
  digamma_block(trans_counts, hp.alpha, spec.trans_mask(), s.trans);
  digamma_block(emit_counts, hp.beta, spec.emit_mask(), s.emit);
  return s;
}

ParamMatrices mode_matrices(const Table<double>& trans_counts,
                            const Table<double>& emit_counts,
                            const HyperParams& hp, const ModelSpec& spec,
                            std::vector<std::string>* warnings) {
  const int K = spec.num_states();
  ParamMatrices theta{Table<double>(K, K, 0.0),
                      Table<double>(K, spec.alphabet_size(), 0.0)};
  mode_block(trans_counts, hp.alpha, spec.trans_mask(), "transition", warnings,
             theta.trans);
  mode_block(emit_counts, hp.beta, spec.emit_mask(), "emission", warnings,
             theta.emit);
  return theta;
}

ScoreMatrices sem_scores(const CountTables& counts, const HyperParams& hp,
                         const ModelSpec& spec) {
  return digamma_scores(to_real(counts.trans), to_real(counts.emit), hp, spec);
}

ParamMatrices smm_matrices(const CountTables& counts, const HyperParams& hp,
                           const ModelSpec& spec,
                           std::vector<std::string>* warnings) {
  return mode_matrices(to_real(counts.trans), to_real(counts.emit), hp, spec,
                       warnings);
}

StatePath sem_step(const StatePath& s, const ObsSequence& x,
                   const HyperParams& hp, const ModelSpec& spec) {
  return viterbi(x, sem_scores(count_path(s, x, spec), hp, spec), spec);
}

StatePath smm_step(const StatePath& s, const ObsSequence& x,
                   const HyperParams& hp, const ModelSpec& spec) {
  check_applicable(hp, spec);
  return viterbi(x, smm_matrices(count_path(s, x, spec), hp, spec), spec);
}

bool is_applicable(const HyperParams& hp, const ModelSpec& spec) {
  try {
    check_applicable(hp, spec);
    return true;
  } catch (const NotApplicable&) {
    return false;
  }
}

void check_applicable(const HyperParams& hp, const ModelSpec& spec) {
  const int K = spec.num_states();
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j)
      if (spec.can_transit(i, j) && hp.alpha(i, j) < 1.0)
        throw NotApplicable(fmt::format(
            "alpha({},{}) = {:g} < 1", i + 1, j + 1, hp.alpha(i, j)));
    for (int l = 0; l < spec.alphabet_size(); ++l)
      if (spec.can_emit(i, l) && hp.beta(i, l) < 1.0)
        throw NotApplicable(fmt::format(
            "beta({},{}) = {:g} < 1", i + 1, l + 1, hp.beta(i, l)));
  }
}

double log_dirichlet_density(const ParamMatrices& theta, const HyperParams& hp,
                             const ModelSpec& spec) {
  return log_dirichlet_block(theta.trans, hp.alpha, spec.trans_mask()) +
         log_dirichlet_block(theta.emit, hp.beta, spec.emit_mask());
}

MethodOutcome sem_run(const ObsSequence& x, const StatePath& s0,
                      const HyperParams& hp, const ModelSpec& spec,
                      int max_iter, bool record_trace) {
  require_start(s0, x, spec);
  MethodOutcome out;
  StatePath current = s0;
  if (record_trace) out.trace.push_back(log_joint(current, x, hp, spec).value());
  for (int it = 1; it <= max_iter; ++it) {
    StatePath next = sem_step(current, x, hp, spec);
    out.iterations = it;
    if (next == current) {
      out.converged = true;
      break;
    }
    current = std::move(next);
    if (record_trace)
      out.trace.push_back(log_joint(current, x, hp, spec).value());
  }
  out.path = std::move(current);
  return out;
}

MethodOutcome smm_run(const ObsSequence& x, const StatePath& s0,
                      const HyperParams& hp, const ModelSpec& spec,
                      int max_iter, bool record_trace) {
  check_applicable(hp, spec);
  require_start(s0, x, spec);
  MethodOutcome out;
  StatePath current = s0;
  for (int it = 1; it <= max_iter; ++it) {
    const ParamMatrices theta =
        smm_matrices(count_path(current, x, spec), hp, spec, &out.warnings);
    if (record_trace)
      out.trace.push_back(log_joint_hmm(current, x, theta, spec).value() +
                          log_dirichlet_density(theta, hp, spec));
    StatePath next = viterbi(x, theta, spec);
    out.iterations = it;
    if (next == current) {
      out.converged = true;
      break;
    }
    current = std::move(next);
  }
  out.path = std::move(current);
  return out;
}

MethodOutcome bem_run(const ObsSequence& x, const StatePath& s0,
                      const HyperParams& hp, const ModelSpec& spec,
                      int max_iter, bool record_trace) {
  check_applicable(hp, spec);
  require_start(s0, x, spec);
  return expected_count_loop(
      x, s0, spec, max_iter,
      [&](const Table<double>& xi, const Table<double>& emitted,
          MethodOutcome& out) {
        ParamMatrices theta = mode_matrices(xi, emitted, hp, spec, &out.warnings);
        if (record_trace)
          out.trace.push_back(log_likelihood(x, theta, spec).value() +
                              log_dirichlet_density(theta, hp, spec));
        return ScoreMatrices(theta);
      });
}

MethodOutcome vb_run(const ObsSequence& x, const StatePath& s0,
                     const HyperParams& hp, const ModelSpec& spec,
                     int max_iter) {
  require_start(s0, x, spec);
  return expected_count_loop(
      x, s0, spec, max_iter,
      [&](const Table<double>& xi, const Table<double>& emitted,
          MethodOutcome&) { return digamma_scores(xi, emitted, hp, spec); });
}

MethodOutcome run_method(Method method, const ObsSequence& x,
                         const StatePath& s0, const HyperParams& hp,
                         const ModelSpec& spec, int max_iter,
                         bool record_trace) {
  switch (method) {
    case Method::sEM:
      return sem_run(x, s0, hp, spec, max_iter, record_trace);
    case Method::sMM:
      return smm_run(x, s0, hp, spec, max_iter, record_trace);
    case Method::BEM:
      return bem_run(x, s0, hp, spec, max_iter, record_trace);
    case Method::VB:
      return vb_run(x, s0, hp, spec, max_iter);
  }
  throw InvalidArgument("unknown method");
}

std::uint64_t path_hash(const StatePath& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int v : s) {
    for (int b = 0; b < 4; ++b) {
      h ^= std::uint64_t((static_cast<std::uint32_t>(v) >> (8 * b)) & 0xffu);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

namespace {

struct StartOutcome {
  StartRecord record;
  StatePath path;
};

template <typename StartFn>
std::vector<StartOutcome> run_starts(int count, int jobs, StartFn&& fn) {
  std::vector<StartOutcome> results(count);
  parallel_for(count, jobs, [&](int k) { results[k] = fn(k); });
  return results;
}

StartOutcome run_one(int index, const StatePath& s0, const ObsSequence& x,
                     const HyperParams& hp, const ModelSpec& spec,
                     const SegConfig& cfg) {
  StartOutcome o;
  o.record.index = index;
  try {
    o.record.initial_value = log_joint(s0, x, hp, spec).value();
    MethodOutcome m = run_method(cfg.method, x, s0, hp, spec, cfg.max_iter);
    o.record.final_value = log_joint(m.path, x, hp, spec).value();
    o.record.iterations = m.iterations;
    o.record.converged = m.converged;
    o.record.output_hash = path_hash(m.path);
    o.path = std::move(m.path);
  } catch (const std::exception& e) {
    o.record.failed = true;
    o.record.error = e.what();
  }
  return o;
}

RunResult reduce(std::vector<StartOutcome>&& outcomes) {
  RunResult result;
  std::vector<StatePath> outputs;
  for (auto& o : outcomes) {
    const StartRecord& r = o.record;
    if (r.failed) continue;
    const LogProb init(r.initial_value);
    if (init > result.best_initial) result.best_initial = init;
    const LogProb value(r.final_value);
    const bool better =
        value > result.best_logjoint ||
        (value == result.best_logjoint && o.path < result.best_path);
    if (result.best_path.size() == 0 || better) {
      result.best_logjoint = value;
      result.best_path = o.path;
      result.iterations_of_best = r.iterations;
    } else if (o.path == result.best_path) {
      result.iterations_of_best = std::min(result.iterations_of_best, r.iterations);
    }
    outputs.push_back(std::move(o.path));
  }
  for (auto& o : outcomes) result.starts.push_back(std::move(o.record));
  if (outputs.empty()) {
    const std::string first =
        result.starts.empty() ? std::string("no starts") : result.starts[0].error;
    throw DataError(fmt::format("every start failed (first error: {})", first));
  }
  std::sort(outputs.begin(), outputs.end());
  result.distinct_outputs = static_cast<int>(
      std::unique(outputs.begin(), outputs.end()) - outputs.begin());
  return result;
}

bool skip_for_applicability(const HyperParams& hp, const ModelSpec& spec,
                            const SegConfig& cfg, RunResult& skipped) {
  if (cfg.method != Method::sMM && cfg.method != Method::BEM) return false;
  try {
    check_applicable(hp, spec);
    return false;
  } catch (const NotApplicable& e) {
    if (cfg.applicability == Applicability::Strict) throw;
    skipped.applicable = false;
    skipped.warnings.push_back(fmt::format("{} not applicable: {}",
                                           method_name(cfg.method), e.what()));
    return true;
  }
}

}  // namespace

RunResult multistart(const ObsSequence& x, const HyperParams& hp,
                     const ModelSpec& spec, const SegConfig& cfg,
                     const std::vector<ParamMatrices>& init_models) {
  cfg.check();
  hp.check(spec);
  if (init_models.empty()) throw InvalidArgument("no initial models given");
  for (const auto& m : init_models) m.check(spec);
  RunResult skipped;
  if (skip_for_applicability(hp, spec, cfg, skipped)) return skipped;
  auto outcomes = run_starts(cfg.n_initial, cfg.jobs, [&](int k) {
    StatePath s0;
    try {
      s0 = sample_posterior_path(x, init_models[k % init_models.size()], spec,
                                 derive_seed(cfg.rng_seed, std::uint64_t(k)));
    } catch (const std::exception& e) {
      StartOutcome o;
      o.record.index = k;
      o.record.failed = true;
      o.record.error = e.what();
      return o;
    }
    return run_one(k, s0, x, hp, spec, cfg);
  });
  return reduce(std::move(outcomes));
}

RunResult multistart_from_paths(const ObsSequence& x, const HyperParams& hp,
                                const ModelSpec& spec, const SegConfig& cfg,
                                const std::vector<StatePath>& starts) {
  SegConfig c = cfg;
  c.n_initial = std::max<int>(1, static_cast<int>(starts.size()));
  c.check();
  hp.check(spec);
  if (starts.empty()) throw InvalidArgument("no start paths given");
  RunResult skipped;
  if (skip_for_applicability(hp, spec, cfg, skipped)) return skipped;
  auto outcomes = run_starts(static_cast<int>(starts.size()), cfg.jobs, [&](int k) {
    return run_one(k, starts[k], x, hp, spec, cfg);
  });
  return reduce(std::move(outcomes));
}

}  // namespace bayesseg
