/*
 Copyright 2026 The ringrotor Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "ringrotor/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ringrotor::config {

namespace {

constexpr int kMaxIncludeDepth = 8;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

[[noreturn]] void fail(const std::string& source, int lineno,
                       const std::string& what) {
  std::ostringstream os;
  os << source << ":" << lineno << ": " << what;
  throw ConfigError(os.str());
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '-';
  });
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse '" + value +
                      "' as a number");
  }
}

}  // namespace

Config Config::from_file(const std::string& path) {
  Config cfg;
  const std::filesystem::path p(path);
  cfg.parse(read_file(path), path, p.parent_path().string(), 0);
  return cfg;
}

Config Config::from_string(const std::string& text,
                           const std::string& base_dir) {
  Config cfg;
  cfg.parse(text, "<string>", base_dir, 0);
  return cfg;
}

void Config::parse(const std::string& text, const std::string& source_name,
                   const std::string& base_dir, int depth) {
  if (depth > kMaxIncludeDepth) {
    throw ConfigError(source_name + ": include nesting too deep");
  }
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(source_name, lineno, "unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) {
        fail(source_name, lineno, "invalid section name '" + section + "'");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(source_name, lineno, "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_name(key)) {
      fail(source_name, lineno, "invalid key '" + key + "'");
    }

    if (key == "include") {
      std::filesystem::path inc(value);
      if (inc.is_relative() && !base_dir.empty()) {
        inc = std::filesystem::path(base_dir) / inc;
      }
      parse(read_file(inc.string()), inc.string(),
            inc.parent_path().string(), depth + 1);
      continue;
    }

    const std::string full = section.empty() ? key : section + "." + key;
    values_[full] = value;
  }
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = trim(value);
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  const std::string value = get_string(key);
  int v = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("key '" + key + "': cannot parse '" + value +
                      "' as an integer");
  }
  return v;
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
  std::string v = get_string(key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError("key '" + key + "': cannot parse '" + v +
                    "' as a boolean");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::string value = get_string(key);
  std::replace(value.begin(), value.end(), ',', ' ');
  std::istringstream in(value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(key, tok));
  return out;
}

Eigen::Vector3d Config::get_vec3(const std::string& key) const {
  const std::vector<double> v = get_list(key);
  if (v.size() != 3) {
    throw ConfigError("key '" + key + "': expected 3 numbers, got " +
                      std::to_string(v.size()));
  }
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

Eigen::Vector3d Config::get_vec3(const std::string& key,
                                 const Eigen::Vector3d& fallback) const {
  return has(key) ? get_vec3(key) : fallback;
}

std::vector<std::string> Config::keys_with_prefix(
    const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  }
  return out;
}

}  // namespace ringrotor::config
