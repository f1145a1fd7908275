#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carnot/error.hpp"

namespace carnot::cli {

/// Malformed or inconsistent configuration; exits with the precondition code.
class ConfigError : public PreconditionError {
 public:
  explicit ConfigError(const std::string& what) : PreconditionError("config: " + what) {}
};

/// Key-value run configuration. Values are normalized on parse so that
/// to_text(parse(text)) is canonical and parse(to_text(c)) == c.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);  ///< IoError when unreadable

  /// Canonical text: known keys in schema order, one `key = value` per line.
  std::string to_text() const;
  /// FNV-1a 64 of the canonical text, as 16 hex digits.
  std::string hash() const;

  bool has(const std::string& key) const;
  /// Sets or replaces a non-repeatable key; the value is validated and normalized.
  void set(const std::string& key, const std::string& value);
  void add(const std::string& key, const std::string& value);  ///< appends to a repeatable key

  std::string text(const std::string& key) const;  ///< ConfigError when missing
  std::string text_or(const std::string& key, const std::string& fallback) const;
  std::vector<std::string> all(const std::string& key) const;  ///< every value of a repeatable key
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::optional<std::vector<double>> numbers_if(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;
  bool flag_or(const std::string& key, bool fallback) const;

  bool operator==(const RunConfig&) const = default;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// FNV-1a 64-bit hash of arbitrary bytes.
std::uint64_t fnv1a64(const std::string& bytes);

/// Documented keys, in canonical order.
const std::vector<std::string>& config_keys();

}  // namespace carnot::cli
