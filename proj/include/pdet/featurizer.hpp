#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pdet/matrix.hpp"

namespace pdet {

// Frozen text encoder surrogate: tokens are hashed into a fixed Gaussian
// embedding table generated once from hash_seed. Nothing in the system ever
// trains these parameters.
struct FeaturizerConfig {
  std::size_t embed_dim = 64;
  std::size_t max_tokens = 128;
  std::uint64_t hash_seed = 0x9E3779B97F4A7C15ull;
  std::size_t table_size = 65536;

  void validate() const;  // throws std::invalid_argument
  bool operator==(const FeaturizerConfig&) const = default;
};

class Featurizer {
 public:
  explicit Featurizer(const FeaturizerConfig& config);

  // Lowercased, split on every non-alphanumeric byte; punctuation is dropped.
  static std::vector<std::string> tokenize(std::string_view text);

  // Per-token embedding rows, truncated at max_tokens. Empty text is an
  // error.
  EmbeddingMatrix embed(std::string_view text) const;

  std::size_t token_index(std::string_view token) const;
  const FeaturizerConfig& config() const { return config_; }
  // FNV-1a over the table bytes; used to assert the encoder stayed frozen.
  std::uint64_t table_checksum() const;

 private:
  FeaturizerConfig config_;
  Matrix table_;  // table_size x embed_dim
};

}  // namespace pdet
