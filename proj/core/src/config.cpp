#include "kf/config.hpp"

#include "kf/mesh_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kf {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse(buffer.str(), path.string());
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    cfg.values_[key] = value;
  }
  const int v = cfg.version();
  if (v != 1) {
    throw std::runtime_error(origin + ": unsupported kf_config_version " + std::to_string(v));
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  auto it = values_.find(key);
  const std::string value = it == values_.end() ? fallback : it->second;
  consulted_[key] = value;
  return value;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  double value = fallback;
  if (it != values_.end()) {
    try {
      value = std::stod(it->second);
    } catch (const std::exception&) {
      throw std::runtime_error("config key '" + key + "': not a number: '" + it->second + "'");
    }
  }
  consulted_[key] = format_double(value);
  return value;
}

long KeyValueConfig::get_long(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  long value = fallback;
  if (it != values_.end()) {
    try {
      value = std::stol(it->second);
    } catch (const std::exception&) {
      throw std::runtime_error("config key '" + key + "': not an integer: '" + it->second + "'");
    }
  }
  consulted_[key] = std::to_string(value);
  return value;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  bool value = fallback;
  if (it != values_.end()) {
    const std::string& s = it->second;
    if (s == "true" || s == "1" || s == "on" || s == "yes") {
      value = true;
    } else if (s == "false" || s == "0" || s == "off" || s == "no") {
      value = false;
    } else {
      throw std::runtime_error("config key '" + key + "': not a boolean: '" + s + "'");
    }
  }
  consulted_[key] = value ? "true" : "false";
  return value;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key,
                                                const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  std::vector<double> value;
  if (it == values_.end()) {
    value = fallback;
  } else {
    std::istringstream is(it->second);
    double x;
    while (is >> x) value.push_back(x);
  }
  std::string echoed;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (i) echoed += ' ';
    echoed += format_double(value[i]);
  }
  consulted_[key] = echoed;
  return value;
}

std::string KeyValueConfig::require_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("missing required config key '" + key + "'");
  consulted_[key] = it->second;
  return it->second;
}

int KeyValueConfig::version() const {
  auto it = values_.find("kf_config_version");
  if (it == values_.end()) return 1;
  return static_cast<int>(std::stol(it->second));
}

std::string KeyValueConfig::echo() const {
  std::map<std::string, std::string> merged = consulted_;
  for (const auto& [k, v] : values_) merged[k] = v;
  merged["kf_config_version"] = std::to_string(version());
  std::ostringstream os;
  for (const auto& [k, v] : merged) os << k << " = " << v << "\n";
  return os.str();
}

}  // namespace kf
