#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cade/encoder.hpp"

namespace cade {

enum class DualMode {
  kMultiSampling,     // K sampled trees through one shared encoder
  kMultiAggregating,  // one tree through K encoder parameter sets
};

const char* to_string(DualMode m);
DualMode parse_dual_mode(const std::string& s);

inline constexpr std::size_t kMaxCandidates = 32;

struct ModelConfig {
  EncoderConfig encoder;
  DualMode mode = DualMode::kMultiSampling;
  std::size_t num_candidates = 10;  // K
  bool use_global_bias = true;

  void validate() const;
};

// All trainable state: the encoder parameter sets (one for multi-sampling,
// K for multi-aggregating), the shared global bias table and, for
// multi-aggregating, the attention weight vector A of length 2d.
struct Model {
  ModelConfig config;
  std::vector<EncoderWeights> encoders;
  std::optional<GlobalBias> bias;
  ad::Parameter attention;  // [1 x 2d], multi-aggregating only
  std::uint64_t seed = 0;

  // bias_nodes: nodes that receive a global-bias row.
  static Model create(const ModelConfig& config, std::size_t num_nodes,
                      std::span<const NodeId> bias_nodes, std::uint64_t seed);

  GlobalBias* bias_ptr() { return bias ? &*bias : nullptr; }
  std::vector<ad::Parameter*> parameters();
  void zero_grad();
};

// Checkpoint directory: one CADEMAT1 file per parameter, bias_nodes.txt
// (row -> node id) and a "key = value" manifest.
void save_checkpoint(const Model& model, const std::filesystem::path& dir);
Model load_checkpoint(const std::filesystem::path& dir);
std::map<std::string, std::string> read_manifest(const std::filesystem::path& dir);

// FNV-1a over the sorted file names and contents of a directory.
std::uint64_t directory_hash(const std::filesystem::path& dir);
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace cade
