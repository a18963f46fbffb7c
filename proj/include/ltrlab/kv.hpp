// Flat `key = value` config files: one pair per line, # comments, blank
// lines ignored. Used for synthetic specs, feature-split manifests, and
// truth-constant sidecars.
#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltrlab::kv {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::map<std::string, std::string> parse(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected `key = value`, got: " + t);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty key");
    out[key] = value;
  }
  return out;
}

inline std::map<std::string, std::string> parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  return parse(is);
}

inline void write_file(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>&
                           pairs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write config file " + path);
  for (const auto& [k, v] : pairs) os << k << " = " << v << "\n";
}

inline std::vector<std::size_t> parse_id_list(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const std::string t = trim(tok);
    if (t.empty()) continue;
    out.push_back(std::stoul(t));
  }
  return out;
}

}  // namespace ltrlab::kv
