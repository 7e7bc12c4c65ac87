#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eegfwd/core.hpp"

namespace eegfwd {

/// Key=value run configuration with [section] headers; keys are addressed
/// as "section.key". A `units` section declaring mm and S/m is mandatory
/// before a config drives any computation.
class RunConfig {
 public:
  static RunConfig fromStream(std::istream& is) {
    RunConfig cfg;
    std::string line, section;
    while (std::getline(is, line)) {
      const auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line.erase(hash);
      std::string t = trim(line);
      if (t.empty()) continue;
      if (t.front() == '[' && t.back() == ']') {
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw InvalidInput("config: expected key = value: " + t);
      const std::string key = trim(t.substr(0, eq));
      const std::string value = trim(t.substr(eq + 1));
      if (key.empty()) throw InvalidInput("config: empty key");
      cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  static RunConfig fromFile(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("cannot open config " + path);
    return fromStream(is);
  }

  static RunConfig fromString(const std::string& text) {
    std::istringstream is(text);
    return fromStream(is);
  }

  /// Apply a command line override "section.key=value".
  void setOverride(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("override must look like section.key=value: " + assignment);
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw InvalidInput("config: missing key " + key);
    return it->second;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double num(const std::string& key) const { return parseNum(key, str(key)); }
  double num(const std::string& key, double fallback) const {
    return has(key) ? num(key) : fallback;
  }
  int integer(const std::string& key) const { return static_cast<int>(num(key)); }
  int integer(const std::string& key, int fallback) const {
    return has(key) ? integer(key) : fallback;
  }
  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidInput("config: boolean expected for " + key);
  }
  std::vector<double> numbers(const std::string& key) const {
    std::istringstream is(str(key));
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    if (is.fail() && !is.eof()) throw InvalidInput("config: bad number list for " + key);
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : fallback;
  }

  /// Reject configs without the declared unit system.
  void requireUnits() const {
    if (str("units.length", "") != "mm")
      throw InvalidInput("config: [units] length = mm is mandatory");
    const std::string s = str("units.conductivity", "");
    if (s != "S/m" && s != "S_per_m")
      throw InvalidInput("config: [units] conductivity = S/m is mandatory");
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }
  static double parseNum(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      throw InvalidInput("config: bad number for " + key + ": " + v);
    }
    if (pos != v.size()) throw InvalidInput("config: bad number for " + key + ": " + v);
    return out;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace eegfwd
