#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace app {

/// Flat key=value settings. Later sets overwrite earlier ones, so flags applied after the
/// file win. Lines starting with '#' are comments.
class Settings {
 public:
  static Settings parse(std::istream& in, const std::string& source = "<config>");
  static Settings from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// Accepts "key=value".
  void set_assignment(const std::string& assignment);
  bool has(const std::string& key) const;

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  /// Comma-separated list, or an inclusive range "a:b".
  std::vector<std::int64_t> get_ints(const std::string& key, const std::vector<std::int64_t>& fallback) const;

  /// Keys set but never read.
  std::vector<std::string> unused() const;

  /// Every key read or set, sorted, as key=value lines. Defaults that were read are included.
  void echo(std::ostream& out) const;

 private:
  const std::string* find(const std::string& key) const;
  void record_default(const std::string& key, const std::string& value) const;

  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> defaults_;
  mutable std::set<std::string> read_;
};

}  // namespace app
