#include "bayesseg/priors.hpp"

#include <cmath>
#include <limits>
#include <regex>

#include <fmt/format.h>

#include "bayesseg/errors.hpp"

namespace bayesseg {

namespace {

void require_counts_on_masks(const CountTables& counts, const ModelSpec& spec) {
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j)
      if (counts.trans(i, j) > 0 && !spec.can_transit(i, j))
        throw InvalidArgument(fmt::format(
            "transition {}->{} is counted but masked out", i + 1, j + 1));
    for (int l = 0; l < L && std::size_t(l) < counts.emit.cols(); ++l)
      if (counts.emit(i, l) > 0 && !spec.can_emit(i, l))
        throw InvalidArgument(fmt::format(
            "emission {}->'{}' is counted but masked out", i + 1,
            spec.alphabet()[l]));
  }
}

double solve_row(double one_minus_sq, double var_sum,
                 const ConcentrationOptions& options, char name, int row,
                 std::vector<std::string>& warnings) {
  if (!(var_sum > 0.0)) {
    warnings.push_back(fmt::format(
        "{}_{}: zero empirical variance, concentration capped at {:g}", name,
        row + 1, options.cap));
    return options.cap;
  }
  const double value = one_minus_sq / var_sum - 1.0;
  if (value < options.floor) {
    warnings.push_back(fmt::format(
        "{}_{}: solved concentration {:g} clamped to {:g}", name, row + 1,
        value, options.floor));
    return options.floor;
  }
  return value;
}

}  // namespace

PointEstimates point_estimates(const CountTables& pooled,
                               const ModelSpec& spec) {
  require_counts_on_masks(pooled, spec);
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  PointEstimates est{Table<double>(K, K, 0.0), Table<double>(K, L, 0.0),
                     Table<double>(K, K, 0.0), Table<double>(K, L, 0.0)};
  for (int i = 0; i < K; ++i) {
    const double n_i = double(pooled.trans_row[i]);
    const double m_i = double(pooled.emit_row[i]);
    if (n_i == 0.0)
      throw DataError(
          fmt::format("state {} has no observed transitions", i + 1));
    if (m_i == 0.0)
      throw DataError(fmt::format("state {} has no observed emissions", i + 1));
    const double denom_t = n_i + spec.trans_support(i);
    const double denom_e = m_i + spec.emit_support(i);
    for (int j = 0; j < K; ++j) {
      if (!spec.can_transit(i, j)) continue;
      const double n_ij = double(pooled.trans(i, j));
      est.p_star(i, j) = (n_ij + 1.0) / denom_t;
      est.p_hat(i, j) = n_ij / n_i;
    }
    for (int l = 0; l < L; ++l) {
      if (!spec.can_emit(i, l)) continue;
      const double m_il = double(pooled.emit(i, l));
      est.q_star(i, l) = (m_il + 1.0) / denom_e;
      est.q_hat(i, l) = m_il / m_i;
    }
  }
  return est;
}

PointEstimates point_estimates(const Corpus& corpus, const ModelSpec& spec) {
  CountTables pooled(spec.num_states(), spec.alphabet_size());
  for (const auto& pair : corpus) pooled += count_path(pair.y, pair.x, spec);
  return point_estimates(pooled, spec);
}

EmpiricalVariances weighted_variances(const std::vector<CountTables>& per_pair,
                                      const PointEstimates& est,
                                      const ModelSpec& spec) {
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  std::vector<double> n_tot(K, 0.0), m_tot(K, 0.0);
  for (const auto& c : per_pair)
    for (int i = 0; i < K; ++i) {
      n_tot[i] += double(c.trans_row[i]);
      m_tot[i] += double(c.emit_row[i]);
    }

  EmpiricalVariances var{Table<double>(K, K, 0.0), Table<double>(K, L, 0.0),
                         std::vector<double>(K, 0.0),
                         std::vector<double>(K, 0.0)};
  for (const auto& c : per_pair) {
    for (int i = 0; i < K; ++i) {
      if (c.trans_row[i] > 0) {
        const double n_ik = double(c.trans_row[i]);
        const double w = n_ik / n_tot[i];
        for (int j = 0; j < K; ++j) {
          if (!spec.can_transit(i, j)) continue;
          const double d = double(c.trans(i, j)) / n_ik - est.p_hat(i, j);
          var.trans(i, j) += w * d * d;
        }
      }
      if (c.emit_row[i] > 0) {
        const double m_ik = double(c.emit_row[i]);
        const double w = m_ik / m_tot[i];
        for (int l = 0; l < L; ++l) {
          if (!spec.can_emit(i, l)) continue;
          const double d = double(c.emit(i, l)) / m_ik - est.q_hat(i, l);
          var.emit(i, l) += w * d * d;
        }
      }
    }
  }
  for (int i = 0; i < K; ++i) {
    for (double v : var.trans.row(i)) var.trans_sum[i] += v;
    for (double v : var.emit.row(i)) var.emit_sum[i] += v;
  }
  return var;
}

Concentrations solve_concentrations(const PointEstimates& est,
                                    const EmpiricalVariances& var,
                                    const ModelSpec& spec,
                                    const ConcentrationOptions& options) {
  const int K = spec.num_states();
  Concentrations out;
  out.N.resize(K);
  out.M.resize(K);
  for (int i = 0; i < K; ++i) {
    double sq_t = 0.0, sq_e = 0.0;
    for (double p : est.p_star.row(i)) sq_t += p * p;
    for (double q : est.q_star.row(i)) sq_e += q * q;
    out.N[i] =
        solve_row(1.0 - sq_t, var.trans_sum[i], options, 'N', i, out.warnings);
    out.M[i] =
        solve_row(1.0 - sq_e, var.emit_sum[i], options, 'M', i, out.warnings);
  }
  return out;
}

EmpiricalSummary summarize_corpus(const Corpus& corpus, const ModelSpec& spec,
                                  const ConcentrationOptions& options) {
  if (corpus.empty()) throw DataError("empty training corpus");
  EmpiricalSummary summary;
  summary.pooled = CountTables(spec.num_states(), spec.alphabet_size());
  summary.per_pair.reserve(corpus.size());
  for (const auto& pair : corpus) {
    try {
      summary.per_pair.push_back(count_path(pair.y, pair.x, spec));
    } catch (const InvalidArgument& e) {
      throw DataError(fmt::format("record '{}': {}", pair.id, e.what()));
    }
    summary.pooled += summary.per_pair.back();
  }
  summary.estimates = point_estimates(summary.pooled, spec);
  summary.variances =
      weighted_variances(summary.per_pair, summary.estimates, spec);
  summary.concentrations =
      solve_concentrations(summary.estimates, summary.variances, spec, options);
  return summary;
}

HyperParams assemble_hyperparams(const PointEstimates& est,
                                 const std::vector<double>& N,
                                 const std::vector<double>& M,
                                 const ModelSpec& spec) {
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  if (N.size() != std::size_t(K) || M.size() != std::size_t(K))
    throw InvalidArgument("need one concentration per state");
  Table<double> alpha(K, K, 0.0), beta(K, L, 0.0);
  for (int i = 0; i < K; ++i) {
    if (!(N[i] >= 0.0) || !(M[i] >= 0.0))
      throw InvalidArgument(
          fmt::format("negative concentration for state {}", i + 1));
    for (int j = 0; j < K; ++j)
      if (spec.can_transit(i, j)) alpha(i, j) = N[i] * est.p_star(i, j);
    for (int l = 0; l < L; ++l)
      if (spec.can_emit(i, l)) beta(i, l) = M[i] * est.q_star(i, l);
  }
  return HyperParams(std::move(alpha), std::move(beta));
}

HyperParams posterior_update(const HyperParams& hp, const CountTables& counts,
                             const ModelSpec& spec) {
  require_counts_on_masks(counts, spec);
  Table<double> alpha = hp.alpha;
  Table<double> beta = hp.beta;
  const int K = spec.num_states();
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j)
      if (spec.can_transit(i, j)) alpha(i, j) += double(counts.trans(i, j));
    for (std::size_t l = 0; l < counts.emit.cols(); ++l)
      if (spec.can_emit(i, int(l))) beta(i, l) += double(counts.emit(i, l));
  }
  return HyperParams(std::move(alpha), std::move(beta));
}

ParamMatrices posterior_mean_c(const PointEstimates& est,
                               const std::vector<double>& N,
                               const std::vector<double>& M,
                               const LabeledPair& pair, double c,
                               const ModelSpec& spec) {
  if (!(c > 0.0)) throw InvalidArgument("c must be positive");
  const CountTables counts = count_path(pair.y, pair.x, spec);
  require_counts_on_masks(counts, spec);
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  ParamMatrices theta{Table<double>(K, K, 0.0), Table<double>(K, L, 0.0)};
  for (int i = 0; i < K; ++i) {
    const double wt = c * N[i];
    const double denom_t = wt + double(counts.trans_row[i]);
    for (int j = 0; j < K; ++j) {
      if (!spec.can_transit(i, j)) continue;
      theta.trans(i, j) =
          denom_t > 0.0
              ? (wt * est.p_star(i, j) + double(counts.trans(i, j))) / denom_t
              : est.p_star(i, j);
    }
    const double we = c * M[i];
    const double denom_e = we + double(counts.emit_row[i]);
    for (int l = 0; l < L; ++l) {
      if (!spec.can_emit(i, l)) continue;
      theta.emit(i, l) =
          denom_e > 0.0
              ? (we * est.q_star(i, l) + double(counts.emit(i, l))) / denom_e
              : est.q_star(i, l);
    }
  }
  return theta;
}

double inverse_min_entry(const Table<double>& mean) {
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : mean.values())
    if (v > 0.0 && v < smallest) smallest = v;
  if (!std::isfinite(smallest))
    throw InvalidArgument("mean matrix has no positive entry");
  return 1.0 / smallest;
}

ConcentrationExpr ConcentrationExpr::parse(const std::string& raw) {
  static const std::regex kEmpirical(R"(^\s*empirical\s*$)");
  static const std::regex kExpr(
      R"(^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)?\s*\*?\s*(n|N1|M1)?\s*)"
      R"((?:/\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?))?\s*)"
      R"((?:([-+])\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?))?\s*$)");
  ConcentrationExpr expr;
  expr.text_ = raw;
  if (std::regex_match(raw, kEmpirical)) {
    expr.base_ = Base::Empirical;
    return expr;
  }
  std::smatch m;
  if (!std::regex_match(raw, m, kExpr) || (!m[1].matched && !m[2].matched))
    throw ConfigError(fmt::format(
        "cannot parse concentration '{}' (expected e.g. 20n, n/2, N1+1, 350, "
        "empirical)",
        raw));
  if (m[1].matched) expr.factor_ = std::stod(m[1].str());
  if (m[2].matched) {
    const std::string b = m[2].str();
    expr.base_ = b == "n" ? Base::Length : b == "N1" ? Base::N1 : Base::M1;
  }
  if (m[3].matched) expr.divisor_ = std::stod(m[3].str());
  if (m[4].matched) {
    expr.offset_ = std::stod(m[5].str());
    if (m[4].str() == "-") expr.offset_ = -expr.offset_;
  }
  if (!(expr.divisor_ > 0.0))
    throw ConfigError(fmt::format("concentration '{}' divides by zero", raw));
  return expr;
}

double ConcentrationExpr::resolve(const Context& ctx, double empirical) const {
  double base = 1.0;
  switch (base_) {
    case Base::Empirical:
      return empirical;
    case Base::Constant:
      base = 1.0;
      break;
    case Base::Length:
      base = ctx.length;
      break;
    case Base::N1:
      base = ctx.n1;
      break;
    case Base::M1:
      base = ctx.m1;
      break;
  }
  return factor_ * base / divisor_ + offset_;
}

ConcentrationOverride ConcentrationOverride::parse(const std::string& text) {
  ConcentrationOverride out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    out.exprs.push_back(ConcentrationExpr::parse(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> ConcentrationOverride::resolve(
    const ConcentrationExpr::Context& ctx,
    const std::vector<double>& empirical) const {
  const std::size_t K = empirical.size();
  if (exprs.size() != 1 && exprs.size() != K)
    throw ConfigError(fmt::format(
        "concentration override has {} entries; expected 1 or {}",
        exprs.size(), K));
  std::vector<double> out(K);
  for (std::size_t i = 0; i < K; ++i) {
    const auto& e = exprs.size() == 1 ? exprs[0] : exprs[i];
    out[i] = e.resolve(ctx, empirical[i]);
    if (!(out[i] >= 0.0))
      throw ConfigError(fmt::format("concentration '{}' resolves to {} < 0",
                                    e.text(), out[i]));
  }
  return out;
}

}  // namespace bayesseg
