#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace graphfam {

/// Ordered key/value store with [section] headers; the on-disk config and
/// manifest format. Insertion order is preserved so serialization is
/// deterministic.
class Config {
 public:
  void set(const std::string& section, const std::string& key, const std::string& value);
  void set_double(const std::string& section, const std::string& key, double value);
  void set_int(const std::string& section, const std::string& key, std::int64_t value);
  void set_uint(const std::string& section, const std::string& key, std::uint64_t value);

  bool has(const std::string& section, const std::string& key) const;
  const std::string& get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& section, const std::string& key,
                         std::uint64_t fallback) const;

  std::vector<std::string> section_names() const;
  const std::vector<std::pair<std::string, std::string>>* section(const std::string& name) const;

  void write(std::ostream& out) const;
  static Config parse(std::istream& in);
  static Config load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections_;
};

/// Comma-separated integer list helpers for config values.
std::vector<int> parse_int_list(const std::string& text);
std::string format_int_list(const std::vector<int>& values);

/// FNV-1a 64-bit, used for manifest content hashes.
std::uint64_t fnv1a64(const std::string& text);

}  // namespace graphfam
