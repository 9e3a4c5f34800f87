#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace unresolved {

// Malformed or inconsistent input data. Maps to exit code 2 in the CLI.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or configuration files. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal invariant was broken. Maps to exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Unresolved is the positive class everywhere (precision/recall, probabilities).
enum class Label { Resolved, Unresolved };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

inline bool is_positive(Label label) { return label == Label::Unresolved; }

}  // namespace unresolved
