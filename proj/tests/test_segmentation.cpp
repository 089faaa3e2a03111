#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "bayesseg/errors.hpp"
#include "bayesseg/random.hpp"
#include "bayesseg/segmentation.hpp"
#include "oracles.hpp"

using namespace bayesseg;

namespace {

struct Instance {
  ModelSpec spec;
  HyperParams hp;
  ObsSequence x;
};

Instance random_instance(std::mt19937_64& rng, int K, int L, std::size_t n, double lo,
                         double hi, bool sparse = false) {
  Instance in;
  in.spec = sparse ? oracle::random_sparse_spec(K, L, rng) : oracle::random_full_spec(K, L, rng);
  in.hp = oracle::random_hyperparams(in.spec, rng, lo, hi);
  const ParamMatrices theta = oracle::random_theta(in.spec, rng);
  in.x = sample_hmm_pair(theta, in.spec, n, rng()).x;
  return in;
}

// A uniform random path when admissible, else a posterior draw.
StatePath random_start(const Instance& in, std::mt19937_64& rng) {
  StatePath s = oracle::random_path(in.spec.num_states(), in.x.size(), rng);
  if (is_admissible(s, in.x, in.spec)) return s;
  return sample_posterior_path(in.x, uniform_on_masks(in.spec), in.spec, rng());
}

}  // namespace

TEST_CASE("sEM scores from digamma") {
  const ModelSpec spec = ModelSpec::full({"a"}, {1.0, 0.0});
  const HyperParams hp(Table<double>(2, 2, 1.0), Table<double>(2, 1, 1.0));
  SUBCASE("no counts") {
    const ScoreMatrices u = sem_scores(CountTables(2, 1), hp, spec);
    CHECK(u.trans(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(u.trans(0, 0) == doctest::Approx(0.367879).epsilon(1e-6));
  }
  SUBCASE("one count") {
    const ScoreMatrices u = sem_scores(count_path({{0, 0}}, {{0, 0}}, spec), hp, spec);
    CHECK(u.trans(0, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(u.trans(0, 0) == doctest::Approx(0.606531).epsilon(1e-6));
  }
  SUBCASE("zero off the masks") {
    Mask tm(2, 2, 1), em(2, 1, 1);
    tm(1, 0) = 0;
    const ModelSpec sparse({"a"}, {1.0, 0.0}, tm, em);
    Table<double> a(2, 2, 1.0);
    a(1, 0) = 0.0;
    const ScoreMatrices u =
        sem_scores(CountTables(2, 1), HyperParams(a, Table<double>(2, 1, 1.0)), sparse);
    CHECK(u.trans(1, 0) == 0.0);
    CHECK_NOTHROW(u.check(sparse));
  }
}

TEST_CASE("sMM posterior mode") {
  const ModelSpec spec = ModelSpec::full({"a"}, {1.0, 0.0});
  SUBCASE("alpha (2,2), counts (3,1)") {
    const HyperParams hp(Table<double>(2, 2, 2.0), Table<double>(2, 1, 1.0));
    const ParamMatrices m = smm_matrices(count_path({{0, 0, 0, 0, 1}}, {{0, 0, 0, 0, 0}}, spec), hp, spec);
    CHECK(m.trans(0, 0) == doctest::Approx(4.0 / 6));
    CHECK(m.trans(0, 1) == doctest::Approx(2.0 / 6));
  }
  SUBCASE("degenerate row falls back to uniform with a warning") {
    const HyperParams hp(Table<double>(2, 2, 1.0), Table<double>(2, 1, 1.0));
    std::vector<std::string> warnings;
    const ParamMatrices m = smm_matrices(CountTables(2, 1), hp, spec, &warnings);
    CHECK(m.trans(0, 0) == doctest::Approx(0.5));
    CHECK(m.trans(1, 1) == doctest::Approx(0.5));
    CHECK_FALSE(warnings.empty());
  }
  SUBCASE("hyperparameters below one are rejected") {
    Table<double> a(2, 2, 2.0);
    a(1, 0) = 0.5;
    const HyperParams hp(a, Table<double>(2, 1, 1.0));
    CHECK_FALSE(is_applicable(hp, spec));
    CHECK_THROWS_AS(smm_step({{0, 0}}, {{0, 0}}, hp, spec), NotApplicable);
    CHECK_THROWS_AS(bem_run({{0, 0}}, {{0, 0}}, hp, spec, 10), NotApplicable);
    CHECK_NOTHROW(sem_step({{0, 0}}, {{0, 0}}, hp, spec));
  }
  SUBCASE("large counts bring the mode and the digamma score together") {
    const HyperParams hp(Table<double>(2, 2, 2.0), Table<double>(2, 1, 1.0));
    double prev = 1.0;
    for (int n : {10, 100, 1000, 10000}) {
      StatePath s{std::vector<int>(n, 0)};
      for (int t = 0; t < n; t += 3) s.states[t] = 1;
      const ObsSequence x{std::vector<int>(n, 0)};
      const CountTables c = count_path(s, x, spec);
      const double gap = std::abs(smm_matrices(c, hp, spec).trans(0, 1) -
                                  sem_scores(c, hp, spec).trans(0, 1));
      CHECK(gap < prev);
      prev = gap;
    }
    CHECK(prev < 1e-4);
  }
}

TEST_CASE("log Dirichlet density") {
  const ModelSpec spec = ModelSpec::full({"a", "b"}, {1.0});
  Table<double> P(1, 1, 1.0), Q(1, 2);
  Q(0, 0) = 0.3;
  Q(0, 1) = 0.7;
  // Dir(2, 3) density at (0.3, 0.7): Gamma(5)/(Gamma(2)Gamma(3)) 0.3 0.7^2.
  const HyperParams hp(Table<double>(1, 1, 1.0), [] {
    Table<double> b(1, 2);
    b(0, 0) = 2.0;
    b(0, 1) = 3.0;
    return b;
  }());
  CHECK(log_dirichlet_density({P, Q}, hp, spec) ==
        doctest::Approx(std::log(12.0 * 0.3 * 0.49)));
  // alpha = 1 on a zero cell contributes nothing.
  Q(0, 0) = 0.0;
  Q(0, 1) = 1.0;
  const HyperParams flat(Table<double>(1, 1, 1.0), Table<double>(1, 2, 1.0));
  CHECK(log_dirichlet_density({P, Q}, flat, spec) == doctest::Approx(0.0));
}

TEST_CASE("sEM increases ln p(s, x) at every step") {
  std::mt19937_64 rng(100);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 2 + int(rng() % 3);
    const Instance in = random_instance(rng, K, 3 + int(rng() % 3), 10 + rng() % 60, 0.1, 4.0,
                                        trial % 2 == 1);
    const auto out = sem_run(in.x, random_start(in, rng), in.hp, in.spec, 100, true);
    for (std::size_t k = 1; k < out.trace.size(); ++k)
      CHECK(out.trace[k] - out.trace[k - 1] >= -1e-9);
    CHECK(is_admissible(out.path, in.x, in.spec));
  }
}

TEST_CASE("sMM increases the joint posterior at every step") {
  std::mt19937_64 rng(200);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance in = random_instance(rng, 2 + int(rng() % 3), 3, 10 + rng() % 60, 1.0, 4.0,
                                        trial % 2 == 1);
    const auto out = smm_run(in.x, random_start(in, rng), in.hp, in.spec, 100, true);
    for (std::size_t k = 1; k < out.trace.size(); ++k)
      CHECK(out.trace[k] - out.trace[k - 1] >= -1e-9);
  }
}

TEST_CASE("BEM increases the posterior likelihood at every step") {
  std::mt19937_64 rng(300);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance in = random_instance(rng, 2 + int(rng() % 2), 3, 10 + rng() % 40, 1.0, 4.0,
                                        trial % 2 == 1);
    const auto out = bem_run(in.x, random_start(in, rng), in.hp, in.spec, 100, true);
    for (std::size_t k = 1; k < out.trace.size(); ++k)
      CHECK(out.trace[k] - out.trace[k - 1] >= -1e-8);
  }
}

TEST_CASE("BEM on a forced instance") {
  // Only the alternating path can emit (a b a b ...).
  Mask tm(2, 2, 0), em(2, 2, 0);
  tm(0, 1) = tm(1, 0) = 1;
  em(0, 0) = em(1, 1) = 1;
  const ModelSpec spec({"a", "b"}, {1.0, 0.0}, tm, em);
  Table<double> a(2, 2, 0.0), b(2, 2, 0.0);
  a(0, 1) = a(1, 0) = 2.0;
  b(0, 0) = b(1, 1) = 3.0;
  const HyperParams hp(a, b);
  const ObsSequence x{{0, 1, 0, 1, 0}};
  const StatePath forced{{0, 1, 0, 1, 0}};
  const auto out = bem_run(x, forced, hp, spec, 100);
  CHECK(out.path == forced);
  CHECK(out.iterations <= 2);
  CHECK(out.converged);
}

TEST_CASE("BEM ends in the top of the enumerated ranking") {
  std::mt19937_64 rng(400);
  int top_half = 0;
  const int trials = 30;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = 4 + rng() % 5;
    const Instance in = random_instance(rng, 2, 2, n, 1.0, 3.0);
    const auto out = bem_run(in.x, random_start(in, rng), in.hp, in.spec, 100);
    const double v = log_joint(out.path, in.x, in.hp, in.spec).value();
    int above = 0;
    const auto paths = oracle::all_paths(2, n);
    for (const auto& s : paths)
      above += log_joint(s, in.x, in.hp, in.spec).value() > v + 1e-12;
    CHECK(is_admissible(out.path, in.x, in.spec));
    top_half += above < int(paths.size()) / 2;
  }
  CHECK(top_half == trials);
}

TEST_CASE("VB's first matrices coincide with sEM's") {
  std::mt19937_64 rng(500);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance in = random_instance(rng, 3, 3, 30, 0.2, 3.0);
    const StatePath s0 = random_start(in, rng);
    CHECK(vb_run(in.x, s0, in.hp, in.spec, 1).path == sem_step(s0, in.x, in.hp, in.spec));
  }
}

TEST_CASE("VB does not beat exhaustive sEM") {
  std::mt19937_64 rng(600);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng() % 4;
    const Instance in = random_instance(rng, 2, 2, n, 0.3, 3.0);
    SegConfig cfg;
    cfg.method = Method::sEM;
    const auto starts = oracle::all_paths(2, n);
    const RunResult best = multistart_from_paths(in.x, in.hp, in.spec, cfg, starts);
    const auto vb = vb_run(in.x, starts[rng() % starts.size()], in.hp, in.spec, 100);
    CHECK(log_joint(vb.path, in.x, in.hp, in.spec).value() <= best.best_logjoint.value() + 1e-12);
  }
}

TEST_CASE("every method terminates with an admissible path") {
  std::mt19937_64 rng(700);
  for (int trial = 0; trial < 40; ++trial) {
    const Instance in = random_instance(rng, 3, 4, 50, 1.0, 5.0, true);
    const StatePath s0 = random_start(in, rng);
    for (Method m : {Method::sEM, Method::sMM, Method::BEM, Method::VB}) {
      const auto out = run_method(m, in.x, s0, in.hp, in.spec, 25);
      CHECK(out.iterations >= 1);
      CHECK(out.iterations <= 25);
      CHECK(is_admissible(out.path, in.x, in.spec));
      if (out.converged) CHECK(out.iterations >= 1);
    }
  }
}

TEST_CASE("sEM and sMM agree when every alpha + n is large") {
  std::mt19937_64 rng(800);
  int same = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Instance in = random_instance(rng, 3, 4, 60, 100.0, 400.0);
    const StatePath s0 = random_start(in, rng);
    same += sem_step(s0, in.x, in.hp, in.spec) == smm_step(s0, in.x, in.hp, in.spec);
  }
  CHECK(same >= 95);
}

TEST_CASE("multistart") {
  std::mt19937_64 rng(900);
  const Instance in = random_instance(rng, 3, 4, 40, 0.5, 3.0);
  const std::vector<ParamMatrices> models{uniform_on_masks(in.spec),
                                          oracle::random_theta(in.spec, rng)};
  SegConfig cfg;
  cfg.n_initial = 40;
  cfg.rng_seed = 17;

  SUBCASE("a single start is the plain run") {
    SegConfig one = cfg;
    one.n_initial = 1;
    const RunResult r = multistart(in.x, in.hp, in.spec, one, models);
    const StatePath s0 = sample_posterior_path(in.x, models[0], in.spec, derive_seed(17, 0));
    const auto plain = sem_run(in.x, s0, in.hp, in.spec, cfg.max_iter);
    CHECK(r.best_path == plain.path);
    CHECK(r.distinct_outputs == 1);
    CHECK(r.iterations_of_best == plain.iterations);
    CHECK(r.best_initial.value() == doctest::Approx(log_joint(s0, in.x, in.hp, in.spec).value()));
  }
  SUBCASE("best value is the maximum over starts") {
    const RunResult r = multistart(in.x, in.hp, in.spec, cfg, models);
    double best = -INFINITY;
    for (const auto& s : r.starts) best = std::max(best, s.final_value);
    CHECK(r.best_logjoint.value() == best);
    CHECK(r.starts.size() == 40);
    CHECK(r.distinct_outputs >= 1);
    CHECK(is_admissible(r.best_path, in.x, in.spec));
  }
  SUBCASE("deterministic and independent of threads") {
    const RunResult a = multistart(in.x, in.hp, in.spec, cfg, models);
    SegConfig threaded = cfg;
    threaded.jobs = 4;
    const RunResult b = multistart(in.x, in.hp, in.spec, threaded, models);
    CHECK(a.best_path == b.best_path);
    CHECK(a.best_logjoint == b.best_logjoint);
    CHECK(a.distinct_outputs == b.distinct_outputs);
    CHECK(a.iterations_of_best == b.iterations_of_best);
    for (std::size_t k = 0; k < a.starts.size(); ++k)
      CHECK(a.starts[k].output_hash == b.starts[k].output_hash);
  }
  SUBCASE("order of the start list does not matter") {
    std::vector<StatePath> starts;
    for (int k = 0; k < 30; ++k) starts.push_back(random_start(in, rng));
    const RunResult a = multistart_from_paths(in.x, in.hp, in.spec, cfg, starts);
    std::reverse(starts.begin(), starts.end());
    std::shuffle(starts.begin(), starts.end(), rng);
    const RunResult b = multistart_from_paths(in.x, in.hp, in.spec, cfg, starts);
    CHECK(a.best_path == b.best_path);
    CHECK(a.distinct_outputs == b.distinct_outputs);
    CHECK(a.iterations_of_best == b.iterations_of_best);
  }
  SUBCASE("applicability modes") {
    SegConfig smm = cfg;
    smm.method = Method::sMM;
    Table<double> a = in.hp.alpha;
    a(0, 0) = 0.5;
    const HyperParams low(a, in.hp.beta);
    CHECK_THROWS_AS(multistart(in.x, low, in.spec, smm, models), NotApplicable);
    smm.applicability = Applicability::Warn;
    const RunResult r = multistart(in.x, low, in.spec, smm, models);
    CHECK_FALSE(r.applicable);
    CHECK_FALSE(r.warnings.empty());
  }
  SUBCASE("bad configuration") {
    SegConfig bad = cfg;
    bad.max_iter = 0;
    CHECK_THROWS_AS(multistart(in.x, in.hp, in.spec, bad, models), InvalidArgument);
    bad = cfg;
    bad.n_initial = 0;
    CHECK_THROWS_AS(multistart(in.x, in.hp, in.spec, bad, models), InvalidArgument);
  }
  SUBCASE("inadmissible starts fail individually") {
    Mask tm(2, 2, 1), em(2, 2, 1);
    tm(0, 1) = 0;
    const ModelSpec spec({"a", "b"}, {0.5, 0.5}, tm, em);
    Table<double> a(2, 2, 1.0);
    a(0, 1) = 0.0;
    const HyperParams hp(a, Table<double>(2, 2, 1.0));
    const ObsSequence x{{0, 1, 0}};
    const RunResult r =
        multistart_from_paths(x, hp, spec, cfg, {StatePath{{0, 1, 1}}, StatePath{{0, 0, 0}}});
    CHECK(r.starts[0].failed);
    CHECK_FALSE(r.starts[1].failed);
    CHECK_THROWS_AS(multistart_from_paths(x, hp, spec, cfg, {StatePath{{0, 1, 1}}}), DataError);
  }
}

TEST_CASE("exhaustive sEM finds the global maximum") {
  std::mt19937_64 rng(1000);
  for (int trial = 0; trial < 25; ++trial) {
    const int K = 2 + int(rng() % 2);
    const std::size_t n = 2 + rng() % (K == 2 ? 6 : 4);
    const Instance in = random_instance(rng, K, 3, n, 0.1, 5.0);
    std::vector<StatePath> starts;
    for (const auto& s : oracle::all_paths(K, n))
      if (is_admissible(s, in.x, in.spec)) starts.push_back(s);
    double best = 0;
    const StatePath expect = oracle::argmax_path(
        K, n, [&](const StatePath& s) { return log_joint(s, in.x, in.hp, in.spec).value(); },
        &best);
    SegConfig cfg;
    const RunResult r = multistart_from_paths(in.x, in.hp, in.spec, cfg, starts);
    CHECK(r.best_logjoint.value() == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.best_path == expect);
  }
}

TEST_CASE("method names") {
  CHECK(parse_method("SEM") == Method::sEM);
  CHECK(parse_method("vb") == Method::VB);
  CHECK(method_name(Method::BEM) == "BEM");
  CHECK_THROWS_AS(parse_method("mcmc"), InvalidArgument);
}
