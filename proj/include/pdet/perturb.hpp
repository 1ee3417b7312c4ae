#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pdet/matrix.hpp"
#include "pdet/rng.hpp"

namespace pdet {

enum class NoiseFamily { gaussian, uniform };

struct NoiseBounds {
  double mu_lo = -0.5;
  double mu_hi = 0.5;
  double sigma_lo = 0.01;
  double sigma_hi = 1.0;

  void validate() const;
  bool operator==(const NoiseBounds&) const = default;
};

// The perturbation distribution the agent steers: mean and standard
// deviation, kept inside fixed bounds. This pair is also the RL state.
struct NoiseState {
  double mu = 0.0;
  double sigma = 0.1;
  NoiseFamily family = NoiseFamily::gaussian;
  NoiseBounds bounds;

  void validate() const;
  bool operator==(const NoiseState&) const = default;
};

// i.i.d. noise matrix. The uniform family uses support
// [mu - sqrt(3) sigma, mu + sqrt(3) sigma] so both families share their
// first two moments.
Matrix sample_noise(const NoiseState& state, std::size_t rows,
                    std::size_t cols, rng::Stream& rs);

// elementwise sum; inputs are untouched
EmbeddingMatrix inject(const EmbeddingMatrix& embedding, const Matrix& noise);

using Lexicon = std::map<std::string, std::vector<std::string>>;

// JSON file: object mapping token -> array of synonyms.
Lexicon load_lexicon(const std::filesystem::path& path);

enum class AttackKind { synonym, paraphrase_surrogate };

struct AttackConfig {
  AttackKind kind = AttackKind::synonym;
  double ratio = 0.2;  // synonym replacement fraction of eligible tokens
  Lexicon lexicon;
  // paraphrase surrogate stages
  double para_synonym_ratio = 0.35;
  double para_delete_rate = 0.10;
  double para_reorder_rate = 0.15;

  void validate() const;
};

// Replace exactly floor(ratio * m) of the m lexicon-covered tokens, chosen
// uniformly without replacement; everything else (count, order, affixed
// punctuation) is preserved.
std::string synonym_attack(std::string_view text, const AttackConfig& config,
                           rng::Stream& rs);

// Rule-based stand-in for an LLM rewriter: synonym pass, then random token
// deletion, then local window reordering.
std::string paraphrase_surrogate(std::string_view text,
                                 const AttackConfig& config, rng::Stream& rs);

// token-level Levenshtein distance divided by the longer token count
double normalized_token_edit_distance(std::string_view a, std::string_view b);

}  // namespace pdet
