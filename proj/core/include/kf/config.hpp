#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace kf {

// Flat key-value configuration: one "key = value" per line, '#' comments,
// versioned by the kf_config_version key (schema 1). Every key read through
// a getter is recorded with its effective value, so echo() lists the full set
// of knobs a run actually consulted, defaults included.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig load(const std::filesystem::path& path);
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  // Required variants throw when the key is absent.
  std::string require_string(const std::string& key) const;

  int version() const;

  // Sorted "key = value" lines covering every stored and every consulted key.
  std::string echo() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> consulted_;
};

}  // namespace kf
