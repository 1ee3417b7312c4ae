#include "pdet/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "pdet/kernels.hpp"

namespace pdet {

void NoiseBounds::validate() const {
  if (sigma_lo <= 0.0) throw std::invalid_argument("sigma_lo must be > 0");
  if (mu_lo > mu_hi) throw std::invalid_argument("mu bounds inverted");
  if (sigma_lo > sigma_hi) throw std::invalid_argument("sigma bounds inverted");
}

void NoiseState::validate() const {
  bounds.validate();
  if (mu < bounds.mu_lo || mu > bounds.mu_hi)
    throw std::invalid_argument("mu outside bounds");
  if (sigma < bounds.sigma_lo || sigma > bounds.sigma_hi)
    throw std::invalid_argument("sigma outside bounds");
}

Matrix sample_noise(const NoiseState& state, std::size_t rows,
                    std::size_t cols, rng::Stream& rs) {
  state.validate();
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("sample_noise: rows and cols must be > 0");
  Matrix noise(rows, cols);
  if (state.family == NoiseFamily::gaussian) {
    for (double& x : noise.data) x = state.mu + state.sigma * rs.gaussian();
  } else {
    const double half = std::sqrt(3.0) * state.sigma;
    for (double& x : noise.data)
      x = rs.uniform(state.mu - half, state.mu + half);
  }
  return noise;
}

EmbeddingMatrix inject(const EmbeddingMatrix& embedding, const Matrix& noise) {
  if (!embedding.same_shape(noise))
    throw std::invalid_argument("inject: shape mismatch");
  EmbeddingMatrix out(embedding.rows, embedding.cols);
  kernels::add(out.data.data(), embedding.data.data(), noise.data.data(),
               embedding.size());
  return out;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open lexicon file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("lexicon parse error in " + path.string() + ": " +
                             e.what());
  }
  if (!j.is_object())
    throw std::runtime_error("lexicon must be a JSON object: " + path.string());
  Lexicon lex;
  for (const auto& [key, value] : j.items()) {
    if (key.empty())
      throw std::runtime_error("lexicon has an empty token key");
    if (!value.is_array() || value.empty())
      throw std::runtime_error("lexicon entry '" + key +
                               "' must be a non-empty array");
    std::vector<std::string> alts;
    for (const auto& alt : value) {
      if (!alt.is_string())
        throw std::runtime_error("lexicon entry '" + key +
                                 "' has a non-string synonym");
      alts.push_back(alt.get<std::string>());
    }
    lex.emplace(key, std::move(alts));
  }
  return lex;
}

void AttackConfig::validate() const {
  if (ratio < 0.0 || ratio > 1.0)
    throw std::invalid_argument("attack ratio must be in [0,1]");
  if (para_synonym_ratio < 0.0 || para_synonym_ratio > 1.0 ||
      para_delete_rate < 0.0 || para_delete_rate > 1.0 ||
      para_reorder_rate < 0.0 || para_reorder_rate > 1.0)
    throw std::invalid_argument("paraphrase rates must be in [0,1]");
  for (const auto& [key, alts] : lexicon)
    if (alts.empty())
      throw std::invalid_argument("lexicon entry '" + key + "' is empty");
}

namespace {

struct WsToken {
  std::string gap;   // whitespace before the token
  std::string body;  // the token itself
};

struct WsSplit {
  std::vector<WsToken> tokens;
  std::string trailing;
};

WsSplit split_whitespace(std::string_view text) {
  WsSplit out;
  std::string gap;
  std::string body;
  for (const char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!body.empty()) {
        out.tokens.push_back({std::move(gap), std::move(body)});
        gap.clear();
        body.clear();
      }
      gap += c;
    } else {
      body += c;
    }
  }
  if (!body.empty())
    out.tokens.push_back({std::move(gap), std::move(body)});
  else
    out.trailing = std::move(gap);
  return out;
}

std::string join_exact(const WsSplit& split) {
  std::string out;
  for (const WsToken& t : split.tokens) {
    out += t.gap;
    out += t.body;
  }
  out += split.trailing;
  return out;
}

// strip non-alphanumeric affixes and lowercase the core for lexicon lookup
struct CoreView {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past
  std::string key;
};

bool is_word_byte(unsigned char b) {
  return (b >= 'a' && b <= 'z') || (b >= 'A' && b <= 'Z') ||
         (b >= '0' && b <= '9') || b >= 0x80;
}

CoreView token_core(const std::string& body) {
  CoreView cv;
  std::size_t b = 0;
  std::size_t e = body.size();
  while (b < e && !is_word_byte(static_cast<unsigned char>(body[b]))) ++b;
  while (e > b && !is_word_byte(static_cast<unsigned char>(body[e - 1]))) --e;
  cv.begin = b;
  cv.end = e;
  for (std::size_t i = b; i < e; ++i) {
    const auto c = static_cast<unsigned char>(body[i]);
    cv.key += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                     : static_cast<char>(c);
  }
  return cv;
}

// choose k of n positions uniformly without replacement, returned ascending
std::vector<std::size_t> choose_positions(std::vector<std::size_t> pool,
                                          std::size_t k, rng::Stream& rs) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rs.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// replace floor(ratio*m) lexicon-covered tokens in-place; returns how many
std::size_t synonym_pass(WsSplit& split, const Lexicon& lexicon, double ratio,
                         rng::Stream& rs) {
  std::vector<std::size_t> eligible;
  std::vector<CoreView> cores(split.tokens.size());
  for (std::size_t i = 0; i < split.tokens.size(); ++i) {
    cores[i] = token_core(split.tokens[i].body);
    if (!cores[i].key.empty() && lexicon.count(cores[i].key))
      eligible.push_back(i);
  }
  const auto k = static_cast<std::size_t>(
      std::floor(ratio * static_cast<double>(eligible.size())));
  if (k == 0) return 0;
  for (const std::size_t pos : choose_positions(eligible, k, rs)) {
    const std::vector<std::string>& alts = lexicon.at(cores[pos].key);
    const std::string& pick = alts[rs.below(alts.size())];
    std::string& body = split.tokens[pos].body;
    body = body.substr(0, cores[pos].begin) + pick +
           body.substr(cores[pos].end);
  }
  return k;
}

}  // namespace

std::string synonym_attack(std::string_view text, const AttackConfig& config,
                           rng::Stream& rs) {
  config.validate();
  WsSplit split = split_whitespace(text);
  if (split.tokens.empty()) return std::string(text);
  if (synonym_pass(split, config.lexicon, config.ratio, rs) == 0)
    return std::string(text);
  return join_exact(split);
}

std::string paraphrase_surrogate(std::string_view text,
                                 const AttackConfig& config, rng::Stream& rs) {
  config.validate();
  WsSplit split = split_whitespace(text);
  if (split.tokens.empty()) return std::string(text);

  const std::size_t replaced =
      synonym_pass(split, config.lexicon, config.para_synonym_ratio, rs);

  std::vector<std::string> tokens;
  tokens.reserve(split.tokens.size());
  for (WsToken& t : split.tokens) tokens.push_back(std::move(t.body));

  // deletion, capped so at least 60% of the tokens survive
  const auto n = tokens.size();
  std::size_t want_delete = static_cast<std::size_t>(
      std::floor(config.para_delete_rate * static_cast<double>(n)));
  want_delete = std::min(
      want_delete,
      static_cast<std::size_t>(std::floor(0.4 * static_cast<double>(n))));
  if (want_delete > 0) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    const std::vector<std::size_t> doomed =
        choose_positions(std::move(all), want_delete, rs);
    std::vector<std::string> kept;
    kept.reserve(n - want_delete);
    std::size_t di = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (di < doomed.size() && doomed[di] == i) {
        ++di;
        continue;
      }
      kept.push_back(std::move(tokens[i]));
    }
    tokens = std::move(kept);
  }

  // local reordering in windows of three
  std::size_t reordered = 0;
  if (tokens.size() >= 3 && config.para_reorder_rate > 0.0) {
    const std::size_t windows = tokens.size() - 2;
    const auto k = static_cast<std::size_t>(std::floor(
        config.para_reorder_rate * static_cast<double>(windows)));
    if (k > 0) {
      static constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                           {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      std::vector<std::size_t> starts(windows);
      for (std::size_t i = 0; i < windows; ++i) starts[i] = i;
      for (const std::size_t s : choose_positions(std::move(starts), k, rs)) {
        const int* perm = kPerms[rs.below(6)];
        std::string w0 = std::move(tokens[s + static_cast<std::size_t>(perm[0])]);
        std::string w1 = std::move(tokens[s + static_cast<std::size_t>(perm[1])]);
        std::string w2 = std::move(tokens[s + static_cast<std::size_t>(perm[2])]);
        tokens[s] = std::move(w0);
        tokens[s + 1] = std::move(w1);
        tokens[s + 2] = std::move(w2);
      }
      reordered = k;
    }
  }

  if (replaced == 0 && want_delete == 0 && reordered == 0)
    return std::string(text);
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

double normalized_token_edit_distance(std::string_view a, std::string_view b) {
  const auto tok = [](std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : s) {
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        if (!cur.empty()) {
          out.push_back(std::move(cur));
          cur.clear();
        }
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
  };
  const std::vector<std::string> ta = tok(a);
  const std::vector<std::string> tb = tok(b);
  if (ta.empty() && tb.empty()) return 0.0;

  std::vector<std::size_t> prev(tb.size() + 1);
  std::vector<std::size_t> cur(tb.size() + 1);
  for (std::size_t j = 0; j <= tb.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ta.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= tb.size(); ++j) {
      const std::size_t sub =
          prev[j - 1] + (ta[i - 1] == tb[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[tb.size()]) /
         static_cast<double>(std::max(ta.size(), tb.size()));
}

}  // namespace pdet
