#pragma once

#include <stdexcept>
#include <string>

namespace bayesseg {

// Bad inputs to a library call: length mismatches, out-of-range symbols,
// masks and hyperparameters that disagree.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Problems with the data itself: unparsable corpus files, states absent
// from a training corpus, observation sequences no path can explain.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No path through the masked model can emit the observation sequence.
class NoAdmissiblePath : public DataError {
 public:
  NoAdmissiblePath(const std::string& what, std::size_t position)
      : DataError(what), position_(position) {}
  // 0-based index of the first observation that cannot be reached.
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// sMM and BEM need every masked-in hyperparameter to be at least one.
class NotApplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bayesseg
