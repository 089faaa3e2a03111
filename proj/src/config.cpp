#include "bayesseg/config.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "bayesseg/corpus.hpp"
#include "bayesseg/errors.hpp"

namespace bayesseg {

namespace {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

const std::map<std::string, std::set<std::string>> kKeys = {
    {"model", {"states", "alphabet", "p0"}},
    {"prior", {"mode", "N", "M", "floor", "cap"}},
    {"segmentation",
     {"methods", "n_initial", "max_iter", "seed", "jobs", "applicability",
      "frequentist", "em_starts", "em_max_iter", "em_tol"}},
    {"evaluation", {"c"}},
    {"paths", {"train", "test", "output_dir"}},
    {"sample",
     {"mode", "pairs", "test_pairs", "length", "spread", "trans", "emit", "N",
      "M"}},
};

const std::set<std::string> kMethods = {"viterbi", "sem", "smm",
                                        "bem",     "vb",  "em"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("{}: '{}' is not a number", key, v));
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
}

int positive_int(const std::string& key, const std::string& v, int min = 1) {
  const long long d = to_int(key, v);
  if (d < min || d > 1'000'000'000)
    throw ConfigError(fmt::format("{}: {} is out of range", key, v));
  return static_cast<int>(d);
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(fmt::format("{}: empty list", key));
  return out;
}

Table<double> to_matrix(const std::string& key, const std::string& v) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : split_list(v, ';')) rows.push_back(to_doubles(key, row));
  if (rows.empty()) throw ConfigError(fmt::format("{}: empty matrix", key));
  Table<double> t(rows.size(), rows[0].size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != t.cols())
      throw ConfigError(fmt::format("{}: row {} has {} entries, expected {}",
                                    key, r + 1, rows[r].size(), t.cols()));
    for (std::size_t c = 0; c < t.cols(); ++c) t(r, c) = rows[r][c];
  }
  return t;
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || base.empty()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path parent = fs::path(path).parent_path();
  RunConfig cfg = parse(ss.str(), parent.empty() ? "." : parent.string());
  cfg.source = path;
  return cfg;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }

  RunConfig cfg;
  cfg.hash = fnv1a_hex(text);
  cfg.paths.output_dir = resolve(base_dir, ".");
  for (const auto& [section, body] : tree) {
    const auto known = kKeys.find(section);
    if (known == kKeys.end())
      throw ConfigError(fmt::format("unknown config section [{}]", section));
    if (!body.data().empty())
      throw ConfigError(fmt::format("key '{}' outside any section", section));
    for (const auto& [key, value] : body) {
      if (!known->second.count(key))
        throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, section));
      const std::string v = trim(value.data());
      const std::string name = section + "." + key;
      try {
        if (section == "model") {
          if (key == "states") cfg.model.states = positive_int(name, v);
          if (key == "alphabet") cfg.model.alphabet = parse_alphabet(v);
          if (key == "p0" && v != "estimate") cfg.model.p0 = to_doubles(name, v);
        } else if (section == "prior") {
          if (key == "mode") {
            if (v != "empirical" && v != "override")
              throw ConfigError(fmt::format("{}: expected empirical|override", name));
            cfg.prior.override_mode = v == "override";
          }
          if (key == "N") cfg.prior.N = ConcentrationOverride::parse(v);
          if (key == "M") cfg.prior.M = ConcentrationOverride::parse(v);
          if (key == "floor") cfg.prior.options.floor = to_double(name, v);
          if (key == "cap") cfg.prior.options.cap = to_double(name, v);
        } else if (section == "segmentation") {
          auto& s = cfg.segmentation;
          if (key == "methods") {
            s.methods.clear();
            for (auto m : split_list(v)) {
              for (char& ch : m) ch = char(std::tolower(static_cast<unsigned char>(ch)));
              if (!kMethods.count(m))
                throw ConfigError(fmt::format("{}: unknown method '{}'", name, m));
              s.methods.push_back(m);
            }
            if (s.methods.empty()) throw ConfigError(name + ": empty list");
          }
          if (key == "n_initial") s.n_initial = positive_int(name, v);
          if (key == "max_iter") s.max_iter = positive_int(name, v);
          if (key == "seed") s.seed = std::uint64_t(to_int(name, v));
          if (key == "jobs") s.jobs = positive_int(name, v);
          if (key == "applicability") {
            if (v != "strict" && v != "warn")
              throw ConfigError(fmt::format("{}: expected strict|warn", name));
            s.applicability = v == "strict" ? Applicability::Strict : Applicability::Warn;
          }
          if (key == "frequentist") {
            if (v != "pstar" && v != "mle")
              throw ConfigError(fmt::format("{}: expected pstar|mle", name));
            s.frequentist = v == "mle" ? FrequentistEstimate::MLE : FrequentistEstimate::PStar;
          }
          if (key == "em_starts") s.em_starts = positive_int(name, v);
          if (key == "em_max_iter") s.em_max_iter = positive_int(name, v);
          if (key == "em_tol") s.em_tol = to_double(name, v);
        } else if (section == "evaluation") {
          cfg.evaluation.c = to_doubles(name, v);
          for (double c : cfg.evaluation.c)
            if (!(c > 0.0)) throw ConfigError(fmt::format("{}: c must be positive", name));
        } else if (section == "paths") {
          if (key == "train") cfg.paths.train = resolve(base_dir, v);
          if (key == "test") cfg.paths.test = resolve(base_dir, v);
          if (key == "output_dir") cfg.paths.output_dir = resolve(base_dir, v);
        } else if (section == "sample") {
          auto& s = cfg.sample;
          if (key == "mode") {
            if (v == "hmm") s.mode = SampleMode::HMM;
            else if (v == "hierarchical") s.mode = SampleMode::Hierarchical;
            else if (v == "polya") s.mode = SampleMode::Polya;
            else throw ConfigError(fmt::format("{}: expected hmm|hierarchical|polya", name));
          }
          if (key == "pairs") s.pairs = positive_int(name, v, 0);
          if (key == "test_pairs") s.test_pairs = positive_int(name, v, 0);
          if (key == "length") s.length = positive_int(name, v);
          if (key == "spread") s.spread = positive_int(name, v, 0);
          if (key == "trans") s.trans = to_matrix(name, v);
          if (key == "emit") s.emit = to_matrix(name, v);
          if (key == "N") s.N = to_double(name, v);
          if (key == "M") s.M = to_double(name, v);
        }
      } catch (const InvalidArgument& e) {
        throw ConfigError(fmt::format("{}: {}", name, e.what()));
      }
    }
  }

  if (cfg.model.states < 1) throw ConfigError("model.states is required");
  if (cfg.model.alphabet.empty()) throw ConfigError("model.alphabet is required");
  if (cfg.model.p0 && cfg.model.p0->size() != std::size_t(cfg.model.states))
    throw ConfigError(fmt::format("model.p0 has {} entries, expected {}",
                                  cfg.model.p0->size(), cfg.model.states));
  if (cfg.prior.override_mode && !cfg.prior.N && !cfg.prior.M)
    throw ConfigError("prior.mode = override needs prior.N or prior.M");
  if (!cfg.prior.override_mode && (cfg.prior.N || cfg.prior.M))
    throw ConfigError("prior.N / prior.M require prior.mode = override");
  if (cfg.sample.spread >= cfg.sample.length)
    throw ConfigError("sample.spread must be smaller than sample.length");
  return cfg;
}

}  // namespace bayesseg
