#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bayesseg/model.hpp"

namespace bayesseg {

// Record format, one blank line between records:
//
//   >id
//   observation symbols (no separator for one-character alphabets,
//   comma-separated otherwise)
//   comma-separated 1-based states
//
// Parse errors are DataError with the line number and record id.
Corpus parse_corpus(std::istream& in, const std::vector<std::string>& alphabet,
                    int num_states, const std::string& source = "<input>");
Corpus read_corpus(const std::string& path,
                   const std::vector<std::string>& alphabet, int num_states);

void write_corpus(std::ostream& out, const Corpus& corpus,
                  const std::vector<std::string>& alphabet);
void write_corpus_file(const std::string& path, const Corpus& corpus,
                       const std::vector<std::string>& alphabet);

// "ACGT" splits into characters, "H,E,C" on commas.
std::vector<std::string> parse_alphabet(const std::string& text);

std::string format_sequence(const ObsSequence& x,
                            const std::vector<std::string>& alphabet);
std::string format_path(const StatePath& s);

}  // namespace bayesseg
