#include "pdet/featurizer.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pdet/rng.hpp"

namespace pdet {

void FeaturizerConfig::validate() const {
  if (embed_dim < 2) throw std::invalid_argument("embed_dim must be >= 2");
  if (max_tokens < 3) throw std::invalid_argument("max_tokens must be >= 3");
  if (table_size < 1024)
    throw std::invalid_argument("table_size must be >= 1024");
}

Featurizer::Featurizer(const FeaturizerConfig& config) : config_(config) {
  config_.validate();
  table_ = Matrix(config_.table_size, config_.embed_dim);
  rng::Stream rs(config_.hash_seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(config_.embed_dim));
  for (double& x : table_.data) x = stddev * rs.gaussian();
}

std::vector<std::string> Featurizer::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (const char ch : text) {
    const auto b = static_cast<unsigned char>(ch);
    const bool word_byte =
        (b >= 'a' && b <= 'z') || (b >= 'A' && b <= 'Z') ||
        (b >= '0' && b <= '9') || b >= 0x80;  // keep UTF-8 continuation intact
    if (word_byte) {
      cur += (b >= 'A' && b <= 'Z') ? static_cast<char>(b - 'A' + 'a')
                                    : static_cast<char>(b);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::size_t Featurizer::token_index(std::string_view token) const {
  // seeded FNV-1a, finalized with a splitmix-style mix
  std::uint64_t h = 0xCBF29CE484222325ull ^ config_.hash_seed;
  for (const char c : token) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
  h ^= h >> 31;
  return static_cast<std::size_t>(h % config_.table_size);
}

EmbeddingMatrix Featurizer::embed(std::string_view text) const {
  if (text.empty()) throw std::invalid_argument("embed: empty text");
  std::vector<std::string> tokens = tokenize(text);
  if (tokens.empty())
    throw std::invalid_argument("embed: text has no tokens: '" +
                                std::string(text) + "'");
  if (tokens.size() > config_.max_tokens) tokens.resize(config_.max_tokens);

  EmbeddingMatrix out(tokens.size(), config_.embed_dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double* src = table_.row(token_index(tokens[i]));
    std::memcpy(out.row(i), src, config_.embed_dim * sizeof(double));
  }
  return out;
}

std::uint64_t Featurizer::table_checksum() const {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const double x : table_.data) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xFFu;
      h *= 0x100000001B3ull;
    }
  }
  return h;
}

}  // namespace pdet
