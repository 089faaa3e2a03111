#include "bayesseg/corpus.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

#include "bayesseg/errors.hpp"

namespace bayesseg {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool single_char(const std::vector<std::string>& alphabet) {
  for (const auto& a : alphabet)
    if (a.size() != 1) return false;
  return true;
}

struct Line {
  std::size_t number;
  std::string text;
};

}  // namespace

std::vector<std::string> parse_alphabet(const std::string& text) {
  const std::string t = trim(text);
  std::vector<std::string> out;
  if (t.find(',') != std::string::npos) {
    out = split(t, ',');
  } else {
    for (char ch : t)
      if (ch != ' ' && ch != '\t') out.emplace_back(1, ch);
  }
  if (out.empty()) throw InvalidArgument("empty alphabet");
  for (const auto& a : out)
    if (a.empty()) throw InvalidArgument("empty symbol in alphabet");
  return out;
}

Corpus parse_corpus(std::istream& in, const std::vector<std::string>& alphabet,
                    int num_states, const std::string& source) {
  std::unordered_map<std::string, int> index;
  for (std::size_t l = 0; l < alphabet.size(); ++l)
    index.emplace(alphabet[l], static_cast<int>(l));
  const bool compact = single_char(alphabet);

  std::vector<std::vector<Line>> records;
  std::vector<Line> current;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string text = trim(raw);
    if (text.empty()) {
      if (!current.empty()) records.push_back(std::move(current));
      current.clear();
      continue;
    }
    current.push_back({number, std::move(text)});
  }
  if (!current.empty()) records.push_back(std::move(current));

  Corpus corpus;
  for (const auto& rec : records) {
    const std::string id =
        rec[0].text[0] == '>' ? trim(rec[0].text.substr(1)) : std::string();
    auto fail = [&](std::size_t line, const std::string& msg) {
      return DataError(fmt::format("{}:{}: record '{}': {}", source, line,
                                   id.empty() ? "?" : id, msg));
    };
    if (rec[0].text[0] != '>')
      throw fail(rec[0].number, "expected a '>' id line");
    if (id.empty()) throw fail(rec[0].number, "empty record id");
    if (rec.size() != 3)
      throw fail(rec[0].number,
                 fmt::format("expected 3 lines (id, observations, states), "
                             "found {}",
                             rec.size()));

    LabeledPair pair;
    pair.id = id;
    const Line& obs = rec[1];
    std::vector<std::string> symbols;
    if (compact) {
      for (char ch : obs.text) symbols.emplace_back(1, ch);
    } else {
      symbols = split(obs.text, ',');
    }
    for (const auto& sym : symbols) {
      const auto it = index.find(sym);
      if (it == index.end())
        throw fail(obs.number, fmt::format("symbol '{}' is not in the alphabet", sym));
      pair.x.symbols.push_back(it->second);
    }

    const Line& st = rec[2];
    for (const auto& tok : split(st.text, ',')) {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw fail(st.number, fmt::format("bad state label '{}'", tok));
      if (v < 1 || v > num_states)
        throw fail(st.number,
                   fmt::format("state {} outside 1..{}", v, num_states));
      pair.y.states.push_back(v - 1);
    }
    if (pair.x.size() != pair.y.size())
      throw fail(st.number,
                 fmt::format("{} observations but {} states", pair.x.size(),
                             pair.y.size()));
    corpus.push_back(std::move(pair));
  }
  return corpus;
}

Corpus read_corpus(const std::string& path,
                   const std::vector<std::string>& alphabet, int num_states) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open corpus file '{}'", path));
  return parse_corpus(in, alphabet, num_states, path);
}

std::string format_sequence(const ObsSequence& x,
                            const std::vector<std::string>& alphabet) {
  const bool compact = single_char(alphabet);
  std::string out;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (!compact && t > 0) out += ',';
    out += alphabet.at(x[t]);
  }
  return out;
}

std::string format_path(const StatePath& s) {
  std::string out;
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (t > 0) out += ',';
    out += std::to_string(s[t] + 1);
  }
  return out;
}

void write_corpus(std::ostream& out, const Corpus& corpus,
                  const std::vector<std::string>& alphabet) {
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    if (k > 0) out << '\n';
    out << '>' << corpus[k].id << '\n'
        << format_sequence(corpus[k].x, alphabet) << '\n'
        << format_path(corpus[k].y) << '\n';
  }
}

void write_corpus_file(const std::string& path, const Corpus& corpus,
                       const std::vector<std::string>& alphabet) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path));
  write_corpus(out, corpus, alphabet);
}

}  // namespace bayesseg
