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

/// Minimal INI-style configuration files:
///
///   # comment
///   [vehicle]            # sections, dotted subsections allowed
///   mass = 1.665
///   [controller.nmpc]
///   horizon = 20
///   include = base.cfg   # splice another file in at this point
///
/// Keys are flattened to "section.sub.key".  Later assignments override
/// earlier ones, so an include acts as defaults for everything below it.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ringrotor::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  Config() = default;

  /// Parse a file on disk.  Includes resolve relative to the file.
  static Config from_file(const std::string& path);

  /// Parse from memory.  Includes resolve relative to base_dir ("" = cwd).
  static Config from_string(const std::string& text,
                            const std::string& base_dir = "");

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  /// Getters take fully qualified keys ("section.key").  The overloads
  /// without a fallback throw ConfigError when the key is missing; all of
  /// them throw when a value does not parse.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Comma- or space-separated list of numbers.
  std::vector<double> get_list(const std::string& key) const;
  Eigen::Vector3d get_vec3(const std::string& key) const;
  Eigen::Vector3d get_vec3(const std::string& key,
                           const Eigen::Vector3d& fallback) const;

  /// All keys sharing a prefix ("disturbance." etc.), sorted.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  /// Set/override one entry programmatically (same syntax as a file value).
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& entries() const {
    return values_;
  }

 private:
  void parse(const std::string& text, const std::string& source_name,
             const std::string& base_dir, int depth);

  std::map<std::string, std::string> values_;
};

}  // namespace ringrotor::config
