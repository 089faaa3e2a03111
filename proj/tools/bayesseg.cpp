#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "bayesseg/config.hpp"
#include "bayesseg/drivers.hpp"
#include "bayesseg/errors.hpp"

namespace {

constexpr const char* kConcentrationHelp =
    "Concentration overrides ([prior] mode = override, N = ..., M = ...) take\n"
    "one expression for all rows or a comma-separated expression per row:\n"
    "  350        constant\n"
    "  20n, n/2   multiples of the test sequence length n\n"
    "  N1+1, M1/4 relative to N1 = 1/min p* and M1 = 1/min q* (training)\n"
    "  empirical  the moment-matched value for that row\n";

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> output_dir;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "INI configuration file")->required();
  cmd->add_option("--seed", c.seed, "override [segmentation] seed");
  cmd->add_option("-j,--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("-o,--output-dir", c.output_dir, "override [paths] output_dir");
}

bayesseg::RunConfig load(const Common& c) {
  auto cfg = bayesseg::RunConfig::load(c.config);
  if (c.seed) cfg.segmentation.seed = *c.seed;
  if (c.jobs) cfg.segmentation.jobs = *c.jobs;
  if (c.output_dir) cfg.paths.output_dir = *c.output_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian MAP segmentation of labelled sequence corpora"};
  app.footer(kConcentrationHelp);
  app.require_subcommand(1);

  Common common;
  std::string input;
  auto* est = app.add_subcommand("estimate-priors",
                                 "empirical Dirichlet priors from the training corpus");
  auto* seg = app.add_subcommand("segment", "segment the test corpus");
  auto* cmp = app.add_subcommand("compare", "relative scores against theta-bar-c targets");
  auto* smp = app.add_subcommand("sample", "write a synthetic corpus");
  auto* sts = app.add_subcommand("stats", "block, entropy and state counts of a corpus");
  for (auto* cmd : {est, seg, cmp, smp, sts}) add_common(cmd, common);
  sts->add_option("-i,--input", input, "corpus file (default: [paths] test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = load(common);
    if (est->parsed()) bayesseg::cmd_estimate_priors(cfg, std::cerr);
    if (seg->parsed()) bayesseg::cmd_segment(cfg, std::cerr);
    if (cmp->parsed()) bayesseg::cmd_compare(cfg, std::cerr);
    if (smp->parsed()) bayesseg::cmd_sample(cfg, std::cerr);
    if (sts->parsed()) bayesseg::cmd_stats(cfg, input, std::cout);
  } catch (const bayesseg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const bayesseg::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
