#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cade/eval.hpp"

namespace cade {

// Flat "key = value" settings. Every key has a default; unknown keys are
// rejected with ConfigError.
class ConfigMap {
 public:
  ConfigMap();

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool is_default(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // Reads '#' comments and "key = value" lines.
  void merge_file(const std::filesystem::path& path);
  // "key=value"
  void merge_assignment(const std::string& assignment);

  // Resolved settings, one "key = value" line each in key order. Keys under
  // "paths." are left out when `include_paths` is false.
  std::string echo(bool include_paths = true) const;

  static std::vector<std::string> known_keys();

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> defaults_;
};

struct Paths {
  std::filesystem::path edges;
  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path checkpoint;
  std::filesystem::path embeddings;
  std::filesystem::path report;
  std::filesystem::path log;
  std::filesystem::path dump_walks;
};

struct RunConfig {
  RunSpec spec;
  Method method = Method::kCadeMs;
  Paths paths;
  std::size_t threads = 1;
};

// Typed view of a ConfigMap; throws ConfigError on malformed values.
RunConfig resolve(const ConfigMap& map);

}  // namespace cade
