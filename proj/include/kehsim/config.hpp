#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kehsim {

/// Flat `key = value` text configuration. `#` starts a comment; blank lines are
/// ignored; later keys override earlier ones.
class KeyValueConfig {
public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list, items trimmed, empties dropped.
  std::vector<std::string> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return values_; }

private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
/// Strict number parse: whole string must be consumed and the value finite.
std::optional<double> parse_double(std::string_view s);

} // namespace kehsim
