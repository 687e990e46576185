#pragma once

// Flat dotted-key configuration: `section.key = value` lines, '#' comments.
// CLI flags overlay file keys; the effective map is echoed into every report.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spoofbench/errors.hpp"
#include "spoofbench/util.hpp"

namespace spoofbench {

class FlatConfig {
public:
  FlatConfig() = default;

  static FlatConfig parse(const std::string& text) {
    FlatConfig cfg;
    std::size_t line_no = 0;
    for (const auto& raw : split_on(text, '\n')) {
      ++line_no;
      std::string line = raw;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      auto trim = [](std::string s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
          s.pop_back();
        return s;
      };
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stod(it->second);
    } catch (...) {
      throw ConfigError("key " + key + ": not a number: " + it->second);
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    try {
      return std::stoull(it->second);
    } catch (...) {
      throw ConfigError("key " + key + ": not an integer: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("key " + key + ": not a boolean: " + it->second);
  }

  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<double> out;
    for (const auto& tok : split_on(it->second, ',')) {
      if (tok.empty()) continue;
      try {
        out.push_back(std::stod(tok));
      } catch (...) {
        throw ConfigError("key " + key + ": not a number: " + tok);
      }
    }
    return out;
  }

  std::vector<std::string> get_strings(const std::string& key,
                                       const std::vector<std::string>& dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    std::vector<std::string> out;
    for (const auto& tok : split_on(it->second, ','))
      if (!tok.empty()) out.push_back(tok);
    return out;
  }

  const std::map<std::string, std::string>& items() const { return values_; }

  std::string serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
  }

  std::uint64_t digest() const { return fnv1a64(serialize()); }

private:
  std::map<std::string, std::string> values_;
};

}  // namespace spoofbench
