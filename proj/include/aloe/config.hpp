#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aloe/harness.hpp"

namespace aloe {

/// Malformed text. Line and column are 1-based.
class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed text that names unknown keys, holds values of the wrong type
/// or violates a constraint. Carries every problem found, not just the first.
class ConfigValidationError : public std::invalid_argument {
 public:
  explicit ConfigValidationError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Grammar: docs/config.md. An empty document yields the defaults.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// One "section.key = value" line per semantic field, in a fixed order, with
/// round-trip number formatting. Worker count is excluded since results do
/// not depend on it.
std::string canonical_config(const ExperimentConfig& config);

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// sha256_hex(canonical_config(config)).
std::string config_digest(const ExperimentConfig& config);

std::string_view to_string(PSource s);
PSource parse_p_source(std::string_view name);
std::string_view to_string(ZerothKind k);
std::string_view to_string(FirstKind k);

}  // namespace aloe
