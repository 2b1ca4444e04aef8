#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mtsplan {

/// Malformed input text (JSON syntax or schema shape).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A pipeline stage failed; `stage()` names it ("load_scene", "greedy_deploy", ...).
/// `invalid_input()` is set when the underlying cause was a parse or validation error.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, bool invalid_input = false)
      : std::runtime_error(stage + ": " + what),
        stage_(std::move(stage)),
        invalid_input_(invalid_input) {}
  const std::string& stage() const noexcept { return stage_; }
  bool invalid_input() const noexcept { return invalid_input_; }

 private:
  std::string stage_;
  bool invalid_input_;
};

}  // namespace mtsplan
