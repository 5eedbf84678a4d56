// SPDX-License-Identifier: Apache-2.0
#include "dloamp/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dloamp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("config: bad numeric value for '" + key + "': " + v);
  return x;
}

}  // namespace

ConfigMap ConfigMap::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

ConfigMap ConfigMap::from_string(const std::string& text) {
  ConfigMap cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) + " has no '='");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config: line " + std::to_string(lineno) + " has empty key");
    cfg.entries_[key] = value;
  }
  return cfg;
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) > 0; }

void ConfigMap::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(key, it->second);
}

long ConfigMap::get_long(const std::string& key, long fallback) const {
  return static_cast<long>(get_double(key, static_cast<double>(fallback)));
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  return std::strtoull(it->second.c_str(), nullptr, 10);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config: bad boolean for '" + key + "': " + v);
}

std::vector<double> ConfigMap::get_double_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  for (const auto& tok : split_commas(it->second)) out.push_back(parse_double(key, tok));
  return out;
}

std::vector<std::string> ConfigMap::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  return split_commas(it->second);
}

}  // namespace dloamp
