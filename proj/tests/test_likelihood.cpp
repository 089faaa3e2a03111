#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "bayesseg/errors.hpp"
#include "bayesseg/likelihood.hpp"
#include "bayesseg/random.hpp"
#include "oracles.hpp"

using namespace bayesseg;

namespace {

ModelSpec two_state(std::vector<double> p0 = {0.5, 0.5}) {
  return ModelSpec::full({"a", "b"}, std::move(p0));
}

HyperParams ones(int K, int L) {
  return HyperParams(Table<double>(K, K, 1.0), Table<double>(K, L, 1.0));
}

// Midpoint rule for the integral of f over [0, 1].
template <typename F>
double quadrature(F&& f, int steps = 200000) {
  long double acc = 0.0L;
  for (int k = 0; k < steps; ++k) acc += f((k + 0.5) / steps);
  return static_cast<double>(acc / steps);
}

}  // namespace

TEST_CASE("log_path_prior examples") {
  const ModelSpec spec = two_state();
  const HyperParams hp = ones(2, 2);
  SUBCASE("s=(1,2)") {
    // p0(1) * integral of P_12 over Dir(1,1) rows.
    const double oracle = 0.5 * quadrature([](double p) { return p; });
    CHECK(std::exp(log_path_prior({{0, 1}}, hp, spec).value()) ==
          doctest::Approx(oracle).epsilon(1e-9));
    CHECK(log_path_prior({{0, 1}}, hp, spec).value() == doctest::Approx(std::log(0.25)));
  }
  SUBCASE("constant s=(1,1,1)") {
    const double oracle = 0.5 * quadrature([](double p) { return p * p; });
    CHECK(std::exp(log_path_prior({{0, 0, 0}}, hp, spec).value()) ==
          doctest::Approx(oracle).epsilon(1e-9));
    CHECK(log_path_prior({{0, 0, 0}}, hp, spec).value() ==
          doctest::Approx(std::log(0.5 / 3)));
  }
  SUBCASE("masked-out transition") {
    Mask tm(2, 2, 1), em(2, 2, 1);
    tm(0, 1) = 0;
    const ModelSpec sparse({"a", "b"}, {0.5, 0.5}, tm, em);
    Table<double> a(2, 2, 1.0);
    a(0, 1) = 0.0;
    const HyperParams h(a, Table<double>(2, 2, 1.0));
    CHECK(log_path_prior({{0, 1}}, h, sparse).is_impossible());
    CHECK(log_path_prior({{0, 0}}, h, sparse).value() == doctest::Approx(std::log(0.5)));
  }
}

TEST_CASE("log_emission_given_path examples") {
  SUBCASE("K=1, L=2, beta=(1,1), x=(a1,a2)") {
    const ModelSpec spec = ModelSpec::full({"a", "b"}, {1.0});
    const double v = log_emission_given_path({{0, 1}}, {{0, 0}}, ones(1, 2), spec).value();
    // m1! m2! / (n+1)!
    CHECK(v == doctest::Approx(std::log(1.0 / 6.0)));
    const double oracle = quadrature([](double q) { return q * (1 - q); });
    CHECK(std::exp(v) == doctest::Approx(oracle).epsilon(1e-9));
  }
  SUBCASE("single possible emission") {
    Mask tm(1, 1, 1), em(1, 2, 0);
    em(0, 0) = 1;
    const ModelSpec spec({"a", "b"}, {1.0}, tm, em);
    Table<double> b(1, 2, 0.0);
    b(0, 0) = 2.5;
    const HyperParams hp(Table<double>(1, 1, 1.0), b);
    CHECK(log_emission_given_path({{0, 0, 0}}, {{0, 0, 0}}, hp, spec).value() ==
          doctest::Approx(0.0));
    CHECK(log_emission_given_path({{0, 1, 0}}, {{0, 0, 0}}, hp, spec).is_impossible());
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(log_emission_given_path({{0}}, {{0, 0}}, ones(2, 2), two_state()),
                    InvalidArgument);
  }
}

TEST_CASE("log_joint is additive and matches a Monte Carlo integral") {
  const ModelSpec spec = two_state({0.3, 0.7});
  Table<double> a(2, 2), b(2, 2);
  a(0, 0) = 2.0; a(0, 1) = 0.5; a(1, 0) = 1.5; a(1, 1) = 3.0;
  b(0, 0) = 0.7; b(0, 1) = 1.2; b(1, 0) = 2.0; b(1, 1) = 0.4;
  const HyperParams hp(a, b);
  const StatePath s{{0, 0, 1, 1, 0}};
  const ObsSequence x{{0, 1, 1, 0, 1}};
  const double lj = log_joint(s, x, hp, spec).value();
  CHECK(lj == doctest::Approx(log_path_prior(s, hp, spec).value() +
                              log_emission_given_path(x, s, hp, spec).value()));

  const int draws = 1000000;
  std::mt19937_64 rng(2024);
  long double sum = 0.0L, sumsq = 0.0L;
  for (int d = 0; d < draws; ++d) {
    ParamMatrices theta{Table<double>(2, 2), Table<double>(2, 2)};
    for (int i = 0; i < 2; ++i) {
      const auto pa = oracle::draw_dirichlet({a(i, 0), a(i, 1)}, rng);
      const auto pb = oracle::draw_dirichlet({b(i, 0), b(i, 1)}, rng);
      theta.trans(i, 0) = pa[0]; theta.trans(i, 1) = pa[1];
      theta.emit(i, 0) = pb[0]; theta.emit(i, 1) = pb[1];
    }
    const double v = oracle::direct_product(s, x, theta, spec);
    sum += v;
    sumsq += v * v;
  }
  const double mean = double(sum / draws);
  const double se = std::sqrt(double(sumsq / draws) - mean * mean) / std::sqrt(double(draws));
  CHECK(std::abs(std::exp(lj) - mean) < 4 * se);
}

TEST_CASE("log_joint_hmm examples") {
  const ModelSpec spec = two_state({0.25, 0.75});
  SUBCASE("deterministic chain") {
    Table<double> P(2, 2, 0.0), Q(2, 2, 0.0);
    P(0, 1) = P(1, 0) = 1.0;
    Q(0, 0) = Q(1, 1) = 1.0;
    const ParamMatrices theta{P, Q};
    CHECK(log_joint_hmm({{1, 0, 1}}, {{1, 0, 1}}, theta, spec).value() ==
          doctest::Approx(std::log(0.75)));
    CHECK(log_joint_hmm({{1, 1, 1}}, {{1, 1, 1}}, theta, spec).is_impossible());
  }
  SUBCASE("random theta equals the direct product") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      const ParamMatrices theta = oracle::random_theta(spec, rng);
      const auto s = oracle::random_path(2, 6, rng);
      const auto x = oracle::random_sequence(2, 6, rng);
      const double direct = oracle::direct_product(s, x, theta, spec);
      CHECK(std::exp(log_joint_hmm(s, x, theta, spec).value()) ==
            doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("log_joint is impossible exactly for inadmissible pairs") {
  Mask tm(2, 2, 1), em(2, 2, 1);
  em(1, 0) = 0;
  const ModelSpec spec({"a", "b"}, {0.5, 0.5}, tm, em);
  Table<double> b(2, 2, 1.0);
  b(1, 0) = 0.0;
  const HyperParams hp(Table<double>(2, 2, 1.0), b);
  CHECK(log_joint({{0, 1}}, {{0, 0}}, hp, spec).is_impossible());
  CHECK_FALSE(log_joint({{0, 1}}, {{0, 1}}, hp, spec).is_impossible());
}

TEST_CASE("digamma") {
  CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-14));
  CHECK(digamma(2.0) - digamma(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(digamma(0.5) == doctest::Approx(-0.5772156649015329 - 2 * std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(digamma(0.0), InvalidArgument);
  CHECK_THROWS_AS(digamma(-1.5), InvalidArgument);
  // Log-spaced grid against an independent implementation. Near the root of
  // psi (z ~ 1.4616) relative error is meaningless, so the tolerance is
  // relative or absolute, whichever is looser.
  double worst = 0.0;
  for (int k = 0; k <= 900; ++k) {
    const double z = std::pow(10.0, -3.0 + 9.0 * k / 900.0);
    const double ref = boost::math::digamma(static_cast<long double>(z));
    const double err = std::abs(digamma(z) - ref) / std::max(1.0, std::abs(ref));
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("normalization over paths and sequences") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 1 + int(rng() % 3);
    const int L = 1 + int(rng() % 3);
    const std::size_t n = 1 + rng() % 6;
    const ModelSpec spec = trial % 2 ? oracle::random_sparse_spec(K, L, rng)
                                     : oracle::random_full_spec(K, L, rng);
    const HyperParams hp = oracle::random_hyperparams(spec, rng);
    long double total = 0.0L;
    for (const auto& s : oracle::all_paths(K, n))
      total += std::exp(static_cast<long double>(log_path_prior(s, hp, spec).value()));
    CHECK(std::abs(double(total) - 1.0) < 1e-9);

    // An admissible path: follow the diagonal, which random_sparse_spec keeps.
    StatePath s{std::vector<int>(n, 0)};
    for (int i = 0; i < K; ++i)
      if (spec.p0()[i] > 0) {
        s.states.assign(n, i);
        break;
      }
    long double tx = 0.0L;
    oracle::for_each_sequence(L, n, [&](const std::vector<int>& v) {
      tx += std::exp(static_cast<long double>(
          log_emission_given_path({v}, s, hp, spec).value()));
    });
    CHECK(std::abs(double(tx) - 1.0) < 1e-9);
  }
}

TEST_CASE("constant path under uniform rows decays like p0(1)/n") {
  const ModelSpec spec = two_state({0.3, 0.7});
  const HyperParams hp = ones(2, 2);
  for (std::size_t n : {2u, 10u, 100u, 1000u, 10000u}) {
    const double v = std::exp(log_path_prior({std::vector<int>(n, 0)}, hp, spec).value());
    CHECK(std::abs(v / (0.3 / double(n)) - 1.0) < 1e-12);
  }
}

TEST_CASE("log_path_prior depends on the path only through counts and s_1") {
  const ModelSpec spec = ModelSpec::full({"a"}, {0.2, 0.3, 0.5});
  std::mt19937_64 rng(4);
  const HyperParams hp = oracle::random_hyperparams(spec, rng);
  // Same first state and the same multiset of transitions.
  const StatePath a{{0, 0, 1, 1, 0, 2, 2}};
  const StatePath b{{0, 1, 1, 0, 0, 2, 2}};
  CHECK(count_transitions(a, 3) == count_transitions(b, 3));
  CHECK(log_path_prior(a, hp, spec).value() ==
        doctest::Approx(log_path_prior(b, hp, spec).value()).epsilon(1e-14));
}

TEST_CASE("sample_hmm_pair") {
  const ModelSpec spec = two_state({1.0, 0.0});
  SUBCASE("deterministic theta forces the pair") {
    Table<double> P(2, 2, 0.0), Q(2, 2, 0.0);
    P(0, 1) = P(1, 0) = 1.0;
    Q(0, 1) = Q(1, 0) = 1.0;
    const auto ls = sample_hmm_pair({P, Q}, spec, 5, 1);
    CHECK(ls.y.states == std::vector<int>{0, 1, 0, 1, 0});
    CHECK(ls.x.symbols == std::vector<int>{1, 0, 1, 0, 1});
  }
  SUBCASE("transition frequencies and determinism") {
    Table<double> P(2, 2), Q(2, 2, 0.5);
    P(0, 0) = 0.8; P(0, 1) = 0.2; P(1, 0) = 0.35; P(1, 1) = 0.65;
    const ParamMatrices theta{P, Q};
    const auto ls = sample_hmm_pair(theta, spec, 100000, 77);
    const CountTables c = count_path(ls.y, ls.x, spec);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double n = double(c.trans_row[i]);
        const double p = P(i, j);
        CHECK(std::abs(c.trans(i, j) / n - p) < 3 * std::sqrt(p * (1 - p) / n));
      }
    const auto again = sample_hmm_pair(theta, spec, 100000, 77);
    CHECK(again.x == ls.x);
    CHECK(again.y == ls.y);
  }
  SUBCASE("length zero") {
    CHECK_THROWS_AS(sample_hmm_pair(uniform_on_masks(spec), spec, 0, 1), InvalidArgument);
  }
}

TEST_CASE("sample_polya_pair") {
  SUBCASE("path frequencies match the marginal path prior") {
    const ModelSpec spec = ModelSpec::full({"a", "b"}, {0.4, 0.6});
    Table<double> a(2, 2);
    a(0, 0) = 0.7; a(0, 1) = 1.3; a(1, 0) = 2.0; a(1, 1) = 0.5;
    const HyperParams hp(a, Table<double>(2, 2, 1.0));
    const int draws = 100000;
    std::map<std::vector<int>, int> freq;
    for (int d = 0; d < draws; ++d)
      ++freq[sample_polya_pair(hp, spec, 3, derive_seed(99, d)).y.states];
    for (const auto& s : oracle::all_paths(2, 3)) {
      const double p = std::exp(log_path_prior(s, hp, spec).value());
      const double f = double(freq[s.states]) / draws;
      CHECK(std::abs(f - p) < 3 * std::sqrt(p * (1 - p) / draws));
    }
  }
  SUBCASE("single possible successor") {
    Mask tm(2, 2, 0), em(2, 1, 1);
    tm(0, 1) = tm(1, 0) = 1;
    const ModelSpec spec({"a"}, {1.0, 0.0}, tm, em);
    Table<double> a(2, 2, 0.0);
    a(0, 1) = 0.3;
    a(1, 0) = 4.0;
    const auto ls = sample_polya_pair(HyperParams(a, Table<double>(2, 1, 1.0)), spec, 6, 5);
    CHECK(ls.y.states == std::vector<int>{0, 1, 0, 1, 0, 1});
  }
  SUBCASE("determinism and length zero") {
    const ModelSpec spec = two_state();
    const HyperParams hp = ones(2, 2);
    const auto p = sample_polya_pair(hp, spec, 50, 8);
    const auto q = sample_polya_pair(hp, spec, 50, 8);
    CHECK(p.x == q.x);
    CHECK(p.y == q.y);
    CHECK_THROWS_AS(sample_polya_pair(hp, spec, 0, 8), InvalidArgument);
  }
}
