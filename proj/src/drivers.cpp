#include "bayesseg/drivers.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "bayesseg/corpus.hpp"
#include "bayesseg/errors.hpp"
#include "bayesseg/parallel.hpp"
#include "bayesseg/random.hpp"
#include "json.hpp"

namespace bayesseg {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void warn(std::ostream& log, const std::string& msg) {
  log << "warning: " << msg << '\n';
}

std::string header(const RunConfig& cfg, const char* command) {
  return fmt::format("# bayesseg {} config_hash={} seed={}\n", command,
                     cfg.hash, cfg.segmentation.seed);
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.paths.output_dir);
  return (fs::path(cfg.paths.output_dir) / name).string();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path));
  out << text;
}

Corpus read_required(const std::string& path, const RunConfig& cfg,
                     const char* what) {
  if (path.empty()) throw ConfigError(fmt::format("paths.{} is required", what));
  if (!fs::exists(path))
    throw ConfigError(fmt::format("paths.{}: '{}' does not exist", what, path));
  return read_corpus(path, cfg.model.alphabet, cfg.model.states);
}

json table_json(const Table<double>& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    json row = json::array();
    for (double v : t.row(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

json mask_json(const Mask& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (auto v : m.row(r)) row.push_back(int(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

// Sequences are independent; rows are gathered by index so the output order
// never depends on scheduling.
template <typename Fn>
auto per_item(std::size_t count, int jobs, Fn&& fn) {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  parallel_for(static_cast<int>(count), jobs,
               [&](int k) { out[k] = fn(std::size_t(k)); });
  return out;
}

bool explainable(const ObsSequence& x, const ModelSpec& spec) {
  try {
    log_likelihood(x, uniform_on_masks(spec), spec);
    return true;
  } catch (const NoAdmissiblePath&) {
    return false;
  }
}

std::vector<ParamMatrices> init_models(const TrainingModel& tm) {
  return {ParamMatrices{tm.summary.estimates.p_star, tm.summary.estimates.q_star},
          uniform_on_masks(tm.spec)};
}

Table<double> draw_dirichlet_rows(const Table<double>& mean, double conc,
                                  Rng& rng) {
  Table<double> out(mean.rows(), mean.cols(), 0.0);
  for (std::size_t r = 0; r < mean.rows(); ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < mean.cols(); ++c) {
      if (mean(r, c) <= 0.0) continue;
      std::gamma_distribution<double> g(conc * mean(r, c), 1.0);
      out(r, c) = g(rng);
      total += out(r, c);
    }
    if (!(total > 0.0)) {
      for (std::size_t c = 0; c < mean.cols(); ++c) out(r, c) = mean(r, c);
      continue;
    }
    for (std::size_t c = 0; c < mean.cols(); ++c) out(r, c) /= total;
  }
  return out;
}

Mask positive_mask(const Table<double>& t) {
  Mask m(t.rows(), t.cols(), 0);
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m(r, c) = t(r, c) > 0.0;
  return m;
}

Table<double> normalized_rows(const Table<double>& t, const char* what) {
  Table<double> out = t;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double s = 0.0;
    for (double v : t.row(r)) {
      if (v < 0.0) throw ConfigError(fmt::format("sample.{} has a negative entry", what));
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-6)
      throw ConfigError(
          fmt::format("sample.{} row {} sums to {}, expected 1", what, r + 1, s));
    for (double& v : out.row(r)) v /= s;
  }
  return out;
}

}  // namespace

TrainingModel load_training(const RunConfig& cfg) {
  TrainingModel tm;
  tm.corpus = read_required(cfg.paths.train, cfg, "train");
  if (tm.corpus.empty()) throw DataError("training corpus is empty");
  tm.spec = spec_from_corpus(tm.corpus, cfg.model.states, cfg.model.alphabet,
                             cfg.model.p0);
  tm.summary = summarize_corpus(tm.corpus, tm.spec, cfg.prior.options);
  tm.n1 = inverse_min_entry(tm.summary.estimates.p_star);
  tm.m1 = inverse_min_entry(tm.summary.estimates.q_star);
  return tm;
}

HyperParams hyperparams_for(const TrainingModel& tm, const RunConfig& cfg,
                            std::size_t length) {
  std::vector<double> N = tm.summary.concentrations.N;
  std::vector<double> M = tm.summary.concentrations.M;
  if (cfg.prior.override_mode) {
    const ConcentrationExpr::Context ctx{double(length), tm.n1, tm.m1};
    if (cfg.prior.N) N = cfg.prior.N->resolve(ctx, N);
    if (cfg.prior.M) M = cfg.prior.M->resolve(ctx, M);
  }
  for (std::size_t i = 0; i < N.size(); ++i)
    if (!(N[i] > 0.0) || !(M[i] > 0.0))
      throw ConfigError(fmt::format(
          "concentration for state {} must be positive (N = {}, M = {})", i + 1,
          N[i], M[i]));
  return assemble_hyperparams(tm.summary.estimates, N, M, tm.spec);
}

ParamMatrices frequentist_theta(const TrainingModel& tm,
                                FrequentistEstimate which) {
  const auto& e = tm.summary.estimates;
  if (which == FrequentistEstimate::PStar) return {e.p_star, e.q_star};
  return {e.p_hat, e.q_hat};
}

ParamMatrices count_theta(const StatePath& s, const ObsSequence& x,
                          const ModelSpec& spec) {
  const CountTables c = count_path(s, x, spec);
  const int K = spec.num_states();
  const int L = spec.alphabet_size();
  ParamMatrices theta{Table<double>(K, K, 0.0), Table<double>(K, L, 0.0)};
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      if (!spec.can_transit(i, j)) continue;
      theta.trans(i, j) = c.trans_row[i] > 0
                              ? double(c.trans(i, j)) / double(c.trans_row[i])
                              : 1.0 / spec.trans_support(i);
    }
    for (int l = 0; l < L; ++l) {
      if (!spec.can_emit(i, l)) continue;
      theta.emit(i, l) = c.emit_row[i] > 0
                             ? double(c.emit(i, l)) / double(c.emit_row[i])
                             : 1.0 / spec.emit_support(i);
    }
  }
  return theta;
}

EmDecode em_decode(const ObsSequence& x, const ModelSpec& spec,
                   const ParamMatrices& theta_train,
                   const std::vector<StatePath>& starts,
                   const BaumWelchOptions& options) {
  std::vector<ParamMatrices> inits;
  inits.push_back(theta_train);
  for (const auto& s : starts) inits.push_back(count_theta(s, x, spec));
  std::optional<BaumWelchResult> best;
  for (const auto& theta0 : inits) {
    BaumWelchResult r;
    try {
      r = baum_welch(x, theta0, spec, options);
    } catch (const NoAdmissiblePath&) {
      continue;
    }
    if (!best || r.loglik > best->loglik) best = std::move(r);
  }
  if (!best) throw DataError("Baum-Welch failed from every start");
  return {viterbi(x, best->theta, spec), best->loglik, best->iterations};
}

std::vector<StatePath> draw_start_paths(
    const ObsSequence& x, const ModelSpec& spec,
    const std::vector<ParamMatrices>& models, int count, std::uint64_t seed) {
  std::vector<StatePath> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k)
    out.push_back(sample_posterior_path(x, models[k % models.size()], spec,
                                        derive_seed(seed, std::uint64_t(k))));
  return out;
}

void write_prior_summary(const TrainingModel& tm, const RunConfig& cfg,
                         const std::string& json_path,
                         const std::string& text_path) {
  const auto& s = tm.summary;
  const int K = tm.spec.num_states();
  json j;
  j["schema"] = "bayesseg.priors/1";
  j["config_hash"] = cfg.hash;
  j["states"] = K;
  j["alphabet"] = tm.spec.alphabet();
  j["pairs"] = tm.corpus.size();
  j["p0"] = tm.spec.p0();
  j["trans_mask"] = mask_json(tm.spec.trans_mask());
  j["emit_mask"] = mask_json(tm.spec.emit_mask());
  j["p_star"] = table_json(s.estimates.p_star);
  j["q_star"] = table_json(s.estimates.q_star);
  j["p_hat"] = table_json(s.estimates.p_hat);
  j["q_hat"] = table_json(s.estimates.q_hat);
  j["trans_variance"] = table_json(s.variances.trans);
  j["emit_variance"] = table_json(s.variances.emit);
  j["trans_variance_sum"] = s.variances.trans_sum;
  j["emit_variance_sum"] = s.variances.emit_sum;
  j["N"] = s.concentrations.N;
  j["M"] = s.concentrations.M;
  j["N1"] = tm.n1;
  j["M1"] = tm.m1;
  j["warnings"] = s.concentrations.warnings;
  write_file(json_path, j.dump(2) + "\n");

  std::string text = header(cfg, "estimate-priors");
  text += fmt::format("{:>5}  {:>14}  {:>14}  {:>12}  {:>12}\n", "state", "N_i",
                      "M_i", "sum V(P)", "sum V(Q)");
  for (int i = 0; i < K; ++i)
    text += fmt::format("{:>5}  {:>14.4f}  {:>14.4f}  {:>12.6g}  {:>12.6g}\n",
                        i + 1, s.concentrations.N[i], s.concentrations.M[i],
                        s.variances.trans_sum[i], s.variances.emit_sum[i]);
  text += fmt::format("N1 = {:.4f}  M1 = {:.4f}\n", tm.n1, tm.m1);
  write_file(text_path, text);
}

void cmd_estimate_priors(const RunConfig& cfg, std::ostream& log) {
  const TrainingModel tm = load_training(cfg);
  for (const auto& w : tm.summary.concentrations.warnings) warn(log, w);
  write_prior_summary(tm, cfg, out_path(cfg, "priors.json"),
                      out_path(cfg, "priors.txt"));
}

std::vector<SegmentRow> cmd_segment(const RunConfig& cfg, std::ostream& log) {
  const TrainingModel tm = load_training(cfg);
  const Corpus test = read_required(cfg.paths.test, cfg, "test");
  const auto& sc = cfg.segmentation;
  const ParamMatrices freq = frequentist_theta(tm, sc.frequentist);
  const auto models = init_models(tm);

  auto per_pair = per_item(test.size(), sc.jobs, [&](std::size_t k) {
    const LabeledPair& pair = test[k];
    const std::uint64_t seed = derive_seed(sc.seed, k);
    std::vector<SegmentRow> rows;
    auto make = [&](const std::string& method) {
      SegmentRow r;
      r.id = pair.id;
      r.pair_index = k;
      r.method = method;
      r.length = pair.x.size();
      return r;
    };
    if (!explainable(pair.x, tm.spec)) {
      for (const auto& m : sc.methods) {
        SegmentRow r = make(m);
        r.status = "inadmissible";
        rows.push_back(std::move(r));
      }
      return rows;
    }
    const bool labelled = pair.y.size() == pair.x.size();
    for (std::size_t mi = 0; mi < sc.methods.size(); ++mi) {
      const std::string& m = sc.methods[mi];
      SegmentRow r = make(m);
      try {
        const HyperParams hp = hyperparams_for(tm, cfg, pair.x.size());
        const std::uint64_t mseed = derive_seed(seed, mi);
        if (m == "viterbi") {
          r.path = viterbi(pair.x, freq, tm.spec);
          r.iterations = 1;
          r.distinct = 1;
        } else if (m == "em") {
          const auto starts = draw_start_paths(pair.x, tm.spec, models,
                                               sc.em_starts, mseed);
          EmDecode d = em_decode(pair.x, tm.spec, freq, starts,
                                 {sc.em_max_iter, sc.em_tol});
          r.path = std::move(d.path);
          r.iterations = d.iterations;
          r.distinct = 1;
        } else {
          SegConfig seg;
          seg.method = parse_method(m);
          seg.max_iter = sc.max_iter;
          seg.n_initial = sc.n_initial;
          seg.rng_seed = mseed;
          seg.applicability = sc.applicability;
          RunResult res = multistart(pair.x, hp, tm.spec, seg, models);
          if (!res.applicable) {
            r.status = "na";
            rows.push_back(std::move(r));
            continue;
          }
          r.path = std::move(res.best_path);
          r.iterations = res.iterations_of_best;
          r.distinct = res.distinct_outputs;
          r.path0 = res.best_initial.value();
        }
        r.log_joint = log_joint(r.path, pair.x, hp, tm.spec).value();
        r.stats = path_stats(r.path, pair.x, tm.spec,
                             labelled ? std::optional<StatePath>(pair.y)
                                      : std::nullopt);
        r.status = "ok";
      } catch (const NotApplicable&) {
        throw;
      } catch (const std::exception& e) {
        r.status = std::string("error: ") + e.what();
      }
      rows.push_back(std::move(r));
    }
    return rows;
  });

  std::vector<SegmentRow> rows;
  for (auto& v : per_pair)
    for (auto& r : v) rows.push_back(std::move(r));

  std::string csv =
      "id,method,length,status,log_joint,path0,distinct,iterations,blocks,"
      "entropy,hamming,constant\n";
  std::string text = header(cfg, "segment");
  text += fmt::format("{:<16} {:<8} {:>6} {:>16} {:>16} {:>8} {:>6} {:>7} {:>9} {:>8}  {}\n",
                      "id", "method", "n", "ln p(v,x)", "path0", "distinct",
                      "iter", "blocks", "entropy", "hamming", "status");
  Corpus paths;
  for (const auto& r : rows) {
    const bool ok = r.status == "ok";
    const bool has_path0 = ok && r.method != "viterbi" && r.method != "em";
    const std::string hamming =
        ok && r.stats->hamming_to_ref ? std::to_string(*r.stats->hamming_to_ref) : "";
    std::string status = r.status;
    for (char& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    csv += fmt::format(
        "{},{},{},{},{},{},{},{},{},{},{},{}\n", r.id, r.method, r.length,
        status, ok ? num(r.log_joint) : "", has_path0 ? num(r.path0) : "",
        ok ? std::to_string(r.distinct) : "", ok ? std::to_string(r.iterations) : "",
        ok ? std::to_string(r.stats->block_count) : "",
        ok ? num(r.stats->entropy) : "", hamming,
        ok ? (is_constant(r.path) ? "1" : "0") : "");
    if (ok) {
      text += fmt::format(
          "{:<16} {:<8} {:>6} {:>16.4f} {:>16} {:>8} {:>6} {:>7} {:>9.4f} {:>8}  ok\n",
          r.id, r.method, r.length, r.log_joint,
          has_path0 ? fmt::format("{:.4f}", r.path0) : "-", r.distinct,
          r.iterations, r.stats->block_count, r.stats->entropy,
          hamming.empty() ? "-" : hamming);
      paths.push_back({r.id + "|" + r.method, test[r.pair_index].x, r.path});
    } else {
      text += fmt::format("{:<16} {:<8} {:>6} {:>16} {:>16} {:>8} {:>6} {:>7} {:>9} {:>8}  {}\n",
                          r.id, r.method, r.length, "-", "-", "-", "-", "-",
                          "-", "-", status);
      if (r.status != "na") warn(log, fmt::format("{} / {}: {}", r.id, r.method, r.status));
    }
  }
  write_file(out_path(cfg, "segment.csv"), csv);
  write_file(out_path(cfg, "segment.txt"), text);
  std::ostringstream ps;
  write_corpus(ps, paths, tm.spec.alphabet());
  write_file(out_path(cfg, "segment_paths.txt"), ps.str());
  return rows;
}

CompareReport cmd_compare(const RunConfig& cfg, std::ostream& log) {
  const TrainingModel tm = load_training(cfg);
  const Corpus test_all = read_required(cfg.paths.test, cfg, "test");
  const auto& sc = cfg.segmentation;
  const ParamMatrices freq = frequentist_theta(tm, sc.frequentist);
  const auto models = init_models(tm);

  CompareReport report;
  report.methods = {"Freq", "sEM", "VB", "EM"};
  Corpus test;
  for (const auto& pair : test_all) {
    if (is_admissible(pair.y, pair.x, tm.spec)) {
      test.push_back(pair);
    } else {
      report.skipped.push_back(pair.id);
      warn(log, fmt::format("{}: not admissible under the training masks; skipped",
                            pair.id));
    }
  }
  if (test.empty()) throw DataError("no usable test pairs");
  report.pairs_used = test.size();

  const std::size_t methods = report.methods.size();
  auto estimates_by_pair = per_item(test.size(), sc.jobs, [&](std::size_t k) {
    const LabeledPair& pair = test[k];
    const std::uint64_t seed = derive_seed(sc.seed, k);
    const HyperParams hp = hyperparams_for(tm, cfg, pair.x.size());
    std::vector<StatePath> out;
    out.push_back(viterbi(pair.x, freq, tm.spec));
    for (Method m : {Method::sEM, Method::VB}) {
      SegConfig seg;
      seg.method = m;
      seg.max_iter = sc.max_iter;
      seg.n_initial = sc.n_initial;
      seg.rng_seed = derive_seed(seed, static_cast<std::uint64_t>(m));
      out.push_back(multistart(pair.x, hp, tm.spec, seg, models).best_path);
    }
    const auto starts =
        draw_start_paths(pair.x, tm.spec, models, sc.em_starts, derive_seed(seed, 99));
    out.push_back(
        em_decode(pair.x, tm.spec, freq, starts, {sc.em_max_iter, sc.em_tol}).path);
    return out;
  });

  std::vector<std::vector<StatePath>> estimates(methods);
  std::vector<ObsSequence> xs;
  for (std::size_t k = 0; k < test.size(); ++k) {
    xs.push_back(test[k].x);
    for (std::size_t j = 0; j < methods; ++j)
      estimates[j].push_back(estimates_by_pair[k][j]);
  }
  report.constant_paths.assign(methods, 0);
  for (std::size_t j = 0; j < methods; ++j)
    for (const auto& p : estimates[j]) report.constant_paths[j] += is_constant(p);

  report.table.methods = report.methods;
  report.table.c_values = cfg.evaluation.c;
  const auto& est = tm.summary.estimates;
  const auto& conc = tm.summary.concentrations;
  for (double c : cfg.evaluation.c) {
    auto thetas = per_item(test.size(), sc.jobs, [&](std::size_t k) {
      return posterior_mean_c(est, conc.N, conc.M, test[k], c, tm.spec);
    });
    auto targets = per_item(test.size(), sc.jobs, [&](std::size_t k) {
      return viterbi(xs[k], thetas[k], tm.spec);
    });
    int constant = 0;
    for (const auto& t : targets) constant += is_constant(t);
    report.target_constant_paths.push_back(constant);
    report.table.rows.push_back(relative_sums(estimates, targets, thetas, xs, tm.spec));
  }

  std::string csv = "c,method,relative_sum,mean_ratio\n";
  std::string text = header(cfg, "compare");
  text += fmt::format("pairs used: {} (skipped {})\n\n", report.pairs_used,
                      report.skipped.size());
  std::string left = fmt::format("{:>10}", "c");
  std::string right = left;
  for (const auto& m : report.methods) {
    left += fmt::format(" {:>10}", m);
    right += fmt::format(" {:>10}", m);
  }
  left += "\n";
  right += "\n";
  for (std::size_t r = 0; r < report.table.rows.size(); ++r) {
    const double c = report.table.c_values[r];
    const auto& row = report.table.rows[r];
    left += fmt::format("{:>10g}", c);
    right += fmt::format("{:>10g}", c);
    for (std::size_t j = 0; j < methods; ++j) {
      csv += fmt::format("{},{},{},{}\n", num(c), report.methods[j],
                         num(row.relative_sum[j]), num(row.mean_ratio[j]));
      left += fmt::format(" {:>10.4f}", row.relative_sum[j]);
      right += fmt::format(" {:>10.4f}", row.mean_ratio[j]);
    }
    left += "\n";
    right += "\n";
  }
  text += "relative sums (percent)\n" + left + "\nmean relative scores\n" + right;
  text += "\nconstant paths:";
  for (std::size_t j = 0; j < methods; ++j)
    text += fmt::format(" {} {}", report.methods[j], report.constant_paths[j]);
  text += "\nconstant target paths:";
  for (std::size_t r = 0; r < report.target_constant_paths.size(); ++r)
    text += fmt::format(" c={:g}: {}", report.table.c_values[r],
                        report.target_constant_paths[r]);
  text += "\n";
  write_file(out_path(cfg, "compare.csv"), csv);
  write_file(out_path(cfg, "compare.txt"), text);
  return report;
}

SampleReport cmd_sample(const RunConfig& cfg, std::ostream& log) {
  const auto& s = cfg.sample;
  const int K = cfg.model.states;
  const int L = static_cast<int>(cfg.model.alphabet.size());
  if (!cfg.model.p0) throw ConfigError("sample needs an explicit model.p0");
  if (s.trans.rows() != std::size_t(K) || s.trans.cols() != std::size_t(K))
    throw ConfigError(fmt::format("sample.trans must be {}x{}", K, K));
  if (s.emit.rows() != std::size_t(K) || s.emit.cols() != std::size_t(L))
    throw ConfigError(fmt::format("sample.emit must be {}x{}", K, L));
  if (cfg.paths.train.empty()) throw ConfigError("paths.train is required");
  if (s.test_pairs > 0 && cfg.paths.test.empty())
    throw ConfigError("paths.test is required when sample.test_pairs > 0");
  if (s.mode != SampleMode::HMM && (!(s.N > 0.0) || !(s.M > 0.0)))
    throw ConfigError("sample.N and sample.M must be positive");

  const ParamMatrices theta{normalized_rows(s.trans, "trans"),
                            normalized_rows(s.emit, "emit")};
  ModelSpec spec;
  try {
    spec = ModelSpec(cfg.model.alphabet, *cfg.model.p0, positive_mask(theta.trans),
                     positive_mask(theta.emit));
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("sample model: {}", e.what()));
  }
  std::vector<double> Nv(K, s.N), Mv(K, s.M);
  Table<double> alpha(K, K, 0.0), beta(K, L, 0.0);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) alpha(i, j) = s.N * theta.trans(i, j);
    for (int l = 0; l < L; ++l) beta(i, l) = s.M * theta.emit(i, l);
  }
  const HyperParams hp(std::move(alpha), std::move(beta));

  const int total = s.pairs + s.test_pairs;
  Rng lengths(derive_seed(cfg.segmentation.seed, 0x5eed));
  std::vector<std::size_t> sizes(total);
  for (auto& n : sizes)
    n = std::size_t(std::uniform_int_distribution<int>(s.length - s.spread,
                                                       s.length + s.spread)(lengths));

  Corpus all;
  const int width = std::max(4, int(std::to_string(total).size()));
  for (int k = 0; k < total; ++k) {
    const std::uint64_t seed = derive_seed(cfg.segmentation.seed, std::uint64_t(k) + 1);
    LabeledSample ls;
    switch (s.mode) {
      case SampleMode::HMM:
        ls = sample_hmm_pair(theta, spec, sizes[k], seed);
        break;
      case SampleMode::Hierarchical: {
        Rng rng(derive_seed(seed, 1));
        const ParamMatrices tk{draw_dirichlet_rows(theta.trans, s.N, rng),
                               draw_dirichlet_rows(theta.emit, s.M, rng)};
        ls = sample_hmm_pair(tk, spec, sizes[k], derive_seed(seed, 2));
        break;
      }
      case SampleMode::Polya:
        ls = sample_polya_pair(hp, spec, sizes[k], seed);
        break;
    }
    all.push_back({fmt::format("seq{:0{}}", k + 1, width), std::move(ls.x),
                   std::move(ls.y)});
  }
  SampleReport report;
  report.train.assign(all.begin(), all.begin() + s.pairs);
  report.test.assign(all.begin() + s.pairs, all.end());
  fs::path train(cfg.paths.train);
  if (train.has_parent_path()) fs::create_directories(train.parent_path());
  write_corpus_file(cfg.paths.train, report.train, cfg.model.alphabet);
  if (s.test_pairs > 0) {
    fs::path tp(cfg.paths.test);
    if (tp.has_parent_path()) fs::create_directories(tp.parent_path());
    write_corpus_file(cfg.paths.test, report.test, cfg.model.alphabet);
  }
  log << fmt::format("wrote {} training and {} test pairs\n", report.train.size(),
                     report.test.size());
  return report;
}

void cmd_stats(const RunConfig& cfg, const std::string& input, std::ostream& out) {
  const std::string path = input.empty() ? cfg.paths.test : input;
  const Corpus corpus = read_required(path, cfg, input.empty() ? "test" : "input");
  const int K = cfg.model.states;
  const int L = static_cast<int>(cfg.model.alphabet.size());
  Mask tm(K, K, 1), em(K, L, 1);
  const ModelSpec spec(cfg.model.alphabet, std::vector<double>(K, 1.0 / K), tm, em);
  out << fmt::format("{:<16} {:>6} {:>7} {:>9} {:>8}  {}\n", "id", "n", "blocks",
                     "entropy", "constant", "state counts");
  std::vector<long long> freq(K, 0);
  long long blocks = 0, constant = 0, length = 0;
  for (const auto& pair : corpus) {
    const PathStats st = path_stats(pair.y, pair.x, spec);
    std::string counts;
    for (int i = 0; i < K; ++i) {
      counts += fmt::format("{}{}", i ? " " : "", st.state_freq[i]);
      freq[i] += st.state_freq[i];
    }
    const bool c = is_constant(pair.y);
    out << fmt::format("{:<16} {:>6} {:>7} {:>9.4f} {:>8}  {}\n", pair.id,
                       pair.x.size(), st.block_count, st.entropy, c ? "yes" : "no",
                       counts);
    blocks += st.block_count;
    constant += c;
    length += static_cast<long long>(pair.x.size());
  }
  std::string counts;
  for (int i = 0; i < K; ++i) counts += fmt::format("{}{}", i ? " " : "", freq[i]);
  out << fmt::format("{} records, {} symbols, {} blocks, {} constant paths; state counts {}\n",
                     corpus.size(), length, blocks, constant, counts);
}

}  // namespace bayesseg
