#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bayesseg/model.hpp"

namespace bayesseg {

// Add-one posterior means p*, q* and maximum-likelihood ratios p^, q^ from
// pooled corpus counts. Off-mask cells are zero in all four tables.
struct PointEstimates {
  Table<double> p_star;
  Table<double> q_star;
  Table<double> p_hat;
  Table<double> q_hat;
};

// Weighted empirical variances of the per-pair ratio estimates and their row
// sums.
struct EmpiricalVariances {
  Table<double> trans;
  Table<double> emit;
  std::vector<double> trans_sum;
  std::vector<double> emit_sum;
};

struct ConcentrationOptions {
  double floor = 1e-6;  // lower clamp for N_i, M_i
  double cap = 1e8;     // used when a row has zero empirical variance
};

struct Concentrations {
  std::vector<double> N;
  std::vector<double> M;
  std::vector<std::string> warnings;
};

struct EmpiricalSummary {
  CountTables pooled;
  std::vector<CountTables> per_pair;
  PointEstimates estimates;
  EmpiricalVariances variances;
  Concentrations concentrations;
};

PointEstimates point_estimates(const CountTables& pooled, const ModelSpec& spec);
PointEstimates point_estimates(const Corpus& corpus, const ModelSpec& spec);

// Pairs contribute to row i only where n_i(k) > 0 (resp. m_i(k) > 0); the
// weights are n_i(k)/n_i and m_i(k)/m_i.
EmpiricalVariances weighted_variances(const std::vector<CountTables>& per_pair,
                                      const PointEstimates& est,
                                      const ModelSpec& spec);

// Moment matching of the summed Dirichlet variances:
//   N_i = (1 - sum_j p*_ij^2) / sum_j V_ij - 1, and the same for M_i.
Concentrations solve_concentrations(const PointEstimates& est,
                                    const EmpiricalVariances& var,
                                    const ModelSpec& spec,
                                    const ConcentrationOptions& options = {});

// Counts, point estimates, variances and concentrations in one pass.
EmpiricalSummary summarize_corpus(const Corpus& corpus, const ModelSpec& spec,
                                  const ConcentrationOptions& options = {});

// alpha_ij = N_i p*_ij, beta_il = M_i q*_il on the masks.
HyperParams assemble_hyperparams(const PointEstimates& est,
                                 const std::vector<double>& N,
                                 const std::vector<double>& M,
                                 const ModelSpec& spec);

// alpha + n, beta + m. Throws InvalidArgument for counts on masked-out cells.
HyperParams posterior_update(const HyperParams& hp, const CountTables& counts,
                             const ModelSpec& spec);

// The theta-bar-c family: prior weight scaled by c > 0 against the counts of
// one labelled pair. c = 1 is the posterior mean.
ParamMatrices posterior_mean_c(const PointEstimates& est,
                               const std::vector<double>& N,
                               const std::vector<double>& M,
                               const LabeledPair& pair, double c,
                               const ModelSpec& spec);

// N_1 = 1 / (smallest non-zero entry of a mean matrix): concentrations above
// it keep every masked-in hyperparameter >= 1.
double inverse_min_entry(const Table<double>& mean);

// Symbolic concentration value such as "20n", "n/2", "N1+1", "M1/4", "350"
// or "empirical". Resolved per sequence against its length n and N_1 / M_1.
class ConcentrationExpr {
 public:
  enum class Base { Constant, Length, N1, M1, Empirical };

  static ConcentrationExpr parse(const std::string& text);

  struct Context {
    double length = 0.0;
    double n1 = 0.0;
    double m1 = 0.0;
  };
  // `empirical` is the solved value for the row in question.
  double resolve(const Context& ctx, double empirical) const;

  Base base() const { return base_; }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
  Base base_ = Base::Constant;
  double factor_ = 1.0;
  double divisor_ = 1.0;
  double offset_ = 0.0;
};

// One expression for every row, or one per row.
struct ConcentrationOverride {
  std::vector<ConcentrationExpr> exprs;

  static ConcentrationOverride parse(const std::string& text);
  std::vector<double> resolve(const ConcentrationExpr::Context& ctx,
                              const std::vector<double>& empirical) const;
};

}  // namespace bayesseg
