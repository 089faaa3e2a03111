#include "bayesseg/hmm_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bayesseg/errors.hpp"
#include "bayesseg/random.hpp"

namespace bayesseg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Table<double> log_weights(const Table<double>& w, const Mask& mask) {
  Table<double> out(w.rows(), w.cols(), kNegInf);
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c)
      if (mask(r, c) && w(r, c) > 0.0) out(r, c) = std::log(w(r, c));
  return out;
}

// Normalized forward variables and per-step scale factors.
struct ForwardPass {
  Table<double> alpha;  // n x K, each row sums to one
  std::vector<double> scale;
};

ForwardPass forward_pass(const ObsSequence& x, const Table<double>& trans,
                         const Table<double>& emit, const ModelSpec& spec) {
  check_sequence(x, spec);
  const std::size_t n = x.size();
  const int K = spec.num_states();
  ForwardPass fp{Table<double>(n, K, 0.0), std::vector<double>(n, 0.0)};
  auto normalize = [&](std::size_t t) {
    double c = 0.0;
    for (int i = 0; i < K; ++i) c += fp.alpha(t, i);
    if (!(c > 0.0))
      throw NoAdmissiblePath(
          fmt::format("observation {} ('{}') has zero probability under the "
                      "model",
                      t + 1, spec.alphabet()[x[t]]),
          t);
    for (int i = 0; i < K; ++i) fp.alpha(t, i) /= c;
    fp.scale[t] = c;
  };
  for (int i = 0; i < K; ++i) fp.alpha(0, i) = spec.p0()[i] * emit(i, x[0]);
  normalize(0);
  for (std::size_t t = 1; t < n; ++t) {
    for (int j = 0; j < K; ++j) {
      const double e = emit(j, x[t]);
      if (e == 0.0) continue;
      double acc = 0.0;
      for (int i = 0; i < K; ++i) acc += fp.alpha(t - 1, i) * trans(i, j);
      fp.alpha(t, j) = acc * e;
    }
    normalize(t);
  }
  return fp;
}

Posteriors forward_backward_impl(const ObsSequence& x,
                                 const Table<double>& trans,
                                 const Table<double>& emit,
                                 const ModelSpec& spec) {
  const ForwardPass fp = forward_pass(x, trans, emit, spec);
  const std::size_t n = x.size();
  const int K = spec.num_states();

  Table<double> beta(n, K, 0.0);
  for (int i = 0; i < K; ++i) beta(n - 1, i) = 1.0;
  for (std::size_t t = n - 1; t-- > 0;) {
    for (int i = 0; i < K; ++i) {
      double acc = 0.0;
      for (int j = 0; j < K; ++j)
        acc += trans(i, j) * emit(j, x[t + 1]) * beta(t + 1, j);
      beta(t, i) = acc / fp.scale[t + 1];
    }
  }

  Posteriors post{Table<double>(n, K, 0.0), Table<double>(K, K, 0.0),
                  LogProb(0.0)};
  double loglik = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    loglik += std::log(fp.scale[t]);
    double total = 0.0;
    for (int i = 0; i < K; ++i) {
      post.gamma(t, i) = fp.alpha(t, i) * beta(t, i);
      total += post.gamma(t, i);
    }
    for (int i = 0; i < K; ++i) post.gamma(t, i) /= total;
    if (t + 1 == n) continue;
    for (int i = 0; i < K; ++i) {
      if (fp.alpha(t, i) == 0.0) continue;
      for (int j = 0; j < K; ++j)
        post.xi(i, j) += fp.alpha(t, i) * trans(i, j) * emit(j, x[t + 1]) *
                         beta(t + 1, j) / fp.scale[t + 1];
    }
  }
  post.loglik = LogProb(loglik);
  return post;
}

}  // namespace

void ScoreMatrices::check(const ModelSpec& spec) const {
  const std::size_t K = spec.num_states();
  const std::size_t L = spec.alphabet_size();
  if (trans.rows() != K || trans.cols() != K || emit.rows() != K ||
      emit.cols() != L)
    throw InvalidArgument("score matrix shapes do not match the model");
  auto check_table = [](const Table<double>& t, const Mask& mask,
                        const char* what) {
    for (std::size_t r = 0; r < t.rows(); ++r)
      for (std::size_t c = 0; c < t.cols(); ++c) {
        const double v = t(r, c);
        if (!(v >= 0.0) || !std::isfinite(v) || (v > 0.0 && !mask(r, c)))
          throw InvalidArgument(fmt::format(
              "{} score ({},{}) = {} is invalid for the mask", what, r + 1,
              c + 1, v));
      }
  };
  check_table(trans, spec.trans_mask(), "transition");
  check_table(emit, spec.emit_mask(), "emission");
}

Table<double> Posteriors::expected_emissions(const ObsSequence& x,
                                             int alphabet_size) const {
  const std::size_t K = gamma.cols();
  Table<double> out(K, alphabet_size, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t)
    for (std::size_t i = 0; i < K; ++i) out(i, x[t]) += gamma(t, i);
  return out;
}

namespace {

// Scores within a relative 1e-12 count as tied.
bool strictly_better(double v, double best) {
  if (best == kNegInf) return v > kNegInf;
  return v > best + 1e-12 * std::max(1.0, std::abs(best));
}

}  // namespace

StatePath viterbi(const ObsSequence& x, const ScoreMatrices& scores,
                  const ModelSpec& spec) {
  check_sequence(x, spec);
  scores.check(spec);
  const std::size_t n = x.size();
  const int K = spec.num_states();
  const Table<double> lt = log_weights(scores.trans, spec.trans_mask());
  const Table<double> le = log_weights(scores.emit, spec.emit_mask());

  std::vector<double> delta(K), next(K);
  Table<int> back(n, K, -1);
  bool reachable = false;
  for (int i = 0; i < K; ++i) {
    const double p = spec.p0()[i];
    delta[i] = p > 0.0 ? std::log(p) + le(i, x[0]) : kNegInf;
    reachable = reachable || delta[i] > kNegInf;
  }
  if (!reachable)
    throw NoAdmissiblePath("no state can start the sequence", 0);

  for (std::size_t t = 1; t < n; ++t) {
    reachable = false;
    for (int j = 0; j < K; ++j) {
      double best = kNegInf;
      int arg = -1;
      for (int i = 0; i < K; ++i) {
        const double v = delta[i] + lt(i, j);
        if (strictly_better(v, best)) {
          best = v;
          arg = i;
        }
      }
      next[j] = arg < 0 ? kNegInf : best + le(j, x[t]);
      back(t, j) = arg;
      reachable = reachable || next[j] > kNegInf;
    }
    if (!reachable)
      throw NoAdmissiblePath(
          fmt::format("no admissible path reaches position {}", t + 1), t);
    delta.swap(next);
  }

  int state = 0;
  for (int i = 1; i < K; ++i)
    if (strictly_better(delta[i], delta[state])) state = i;
  StatePath path;
  path.states.assign(n, 0);
  for (std::size_t t = n; t-- > 0;) {
    path.states[t] = state;
    if (t > 0) state = back(t, state);
  }
  return path;
}

StatePath viterbi(const ObsSequence& x, const ParamMatrices& theta,
                  const ModelSpec& spec) {
  return viterbi(x, ScoreMatrices(theta), spec);
}

Posteriors forward_backward(const ObsSequence& x, const ScoreMatrices& scores,
                            const ModelSpec& spec) {
  scores.check(spec);
  return forward_backward_impl(x, scores.trans, scores.emit, spec);
}

Posteriors forward_backward(const ObsSequence& x, const ParamMatrices& theta,
                            const ModelSpec& spec) {
  theta.check(spec);
  return forward_backward_impl(x, theta.trans, theta.emit, spec);
}

LogProb log_likelihood(const ObsSequence& x, const ParamMatrices& theta,
                       const ModelSpec& spec) {
  const ForwardPass fp = forward_pass(x, theta.trans, theta.emit, spec);
  double acc = 0.0;
  for (double c : fp.scale) acc += std::log(c);
  return LogProb(acc);
}

BaumWelchResult baum_welch(const ObsSequence& x, const ParamMatrices& theta0,
                           const ModelSpec& spec,
                           const BaumWelchOptions& options) {
  theta0.check(spec);
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  BaumWelchResult result;
  result.theta = theta0;
  Posteriors post = forward_backward_impl(x, theta0.trans, theta0.emit, spec);
  result.loglik = post.loglik;
  result.loglik_trace.push_back(post.loglik.value());

  for (int it = 1; it <= options.max_iter; ++it) {
    ParamMatrices next = result.theta;
    const Table<double> emitted = post.expected_emissions(x, L);
    for (int i = 0; i < K; ++i) {
      double row = 0.0;
      for (int j = 0; j < K; ++j) row += post.xi(i, j);
      if (row > 0.0) {
        for (int j = 0; j < K; ++j) next.trans(i, j) = post.xi(i, j) / row;
      } else {
        result.warnings.push_back(fmt::format(
            "iteration {}: state {} has no expected transitions; row kept", it,
            i + 1));
      }
      double mass = 0.0;
      for (int l = 0; l < L; ++l) mass += emitted(i, l);
      if (mass > 0.0) {
        for (int l = 0; l < L; ++l) next.emit(i, l) = emitted(i, l) / mass;
      } else {
        result.warnings.push_back(fmt::format(
            "iteration {}: state {} has no posterior mass; row kept", it,
            i + 1));
      }
    }
    Posteriors next_post =
        forward_backward_impl(x, next.trans, next.emit, spec);
    const double gain = next_post.loglik.value() - result.loglik.value();
    result.theta = std::move(next);
    result.loglik = next_post.loglik;
    result.loglik_trace.push_back(next_post.loglik.value());
    result.iterations = it;
    post = std::move(next_post);
    if (gain < options.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

StatePath sample_posterior_path(const ObsSequence& x,
                                const ParamMatrices& theta,
                                const ModelSpec& spec, std::uint64_t seed) {
  theta.check(spec);
  const ForwardPass fp = forward_pass(x, theta.trans, theta.emit, spec);
  const std::size_t n = x.size();
  const int K = spec.num_states();
  Rng rng(seed);
  StatePath path;
  path.states.assign(n, 0);
  path.states[n - 1] = draw_categorical(fp.alpha.row(n - 1), rng);
  std::vector<double> weights(K);
  for (std::size_t t = n - 1; t-- > 0;) {
    const int following = path.states[t + 1];
    for (int i = 0; i < K; ++i)
      weights[i] = fp.alpha(t, i) * theta.trans(i, following);
    path.states[t] = draw_categorical(weights, rng);
  }
  return path;
}

}  // namespace bayesseg
