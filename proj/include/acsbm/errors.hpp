#pragma once

#include <stdexcept>
#include <string>

namespace acsbm {

// Shapes of matrices or vectors do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A label, index or parameter lies outside its declared range.
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// The model does not induce valid edge probabilities.
class ModelValidityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The coefficient recovery system is rank deficient.
class IdentifiabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A fitting stage failed; the message is prefixed with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace acsbm
