#include "pdet/featurizer.hpp"

#include <cstring>

#include <stdexcept>

#include "doctest.h"
#include "pdet/kernels.hpp"

using namespace pdet;

namespace {

FeaturizerConfig small_config() {
  FeaturizerConfig cfg;
  cfg.embed_dim = 16;
  cfg.max_tokens = 8;
  cfg.table_size = 1024;
  cfg.hash_seed = 77;
  return cfg;
}

}  // namespace

TEST_CASE("tokenizer lowercases and drops punctuation") {
  CHECK(Featurizer::tokenize("Hello, world") ==
        std::vector<std::string>{"hello", "world"});
  CHECK(Featurizer::tokenize("a a a") ==
        std::vector<std::string>{"a", "a", "a"});
  CHECK(Featurizer::tokenize("don't stop-me now!") ==
        std::vector<std::string>{"don", "t", "stop", "me", "now"});
  CHECK(Featurizer::tokenize("...") == std::vector<std::string>{});
}

TEST_CASE("embed is deterministic and respects the tokenizer contract") {
  const Featurizer fz(small_config());
  const EmbeddingMatrix a = fz.embed("Hello, world");
  CHECK(a.rows == 2);
  CHECK(a.cols == 16);
  const EmbeddingMatrix b = fz.embed("Hello, world");
  CHECK(std::memcmp(a.data.data(), b.data.data(),
                    a.size() * sizeof(double)) == 0);

  const EmbeddingMatrix rep = fz.embed("a a a");
  REQUIRE(rep.rows == 3);
  for (std::size_t c = 0; c < rep.cols; ++c) {
    CHECK(rep.at(0, c) == rep.at(1, c));
    CHECK(rep.at(0, c) == rep.at(2, c));
  }

  CHECK_THROWS_AS(fz.embed(""), std::invalid_argument);
  CHECK_THROWS_AS(fz.embed("!!!"), std::invalid_argument);
}

TEST_CASE("embed truncates at max_tokens") {
  const Featurizer fz(small_config());
  std::string text;
  for (int i = 0; i < 30; ++i) text += "tok" + std::to_string(i) + " ";
  CHECK(fz.embed(text).rows == 8);
}

TEST_CASE("row norms match the 1/d entry variance") {
  FeaturizerConfig cfg = small_config();
  cfg.embed_dim = 64;
  const Featurizer fz(cfg);
  double total = 0.0;
  int rows = 0;
  for (int i = 0; i < 1200; ++i) {
    const EmbeddingMatrix e = fz.embed("token" + std::to_string(i));
    total += kernels::dot(e.row(0), e.row(0), e.cols);
    ++rows;
  }
  const double mean_sq_norm = total / rows;
  CHECK(mean_sq_norm > 0.8);
  CHECK(mean_sq_norm < 1.2);
}

TEST_CASE("changing hash_seed rewrites nearly every row value") {
  FeaturizerConfig cfg = small_config();
  const Featurizer fz1(cfg);
  cfg.hash_seed = 78;
  const Featurizer fz2(cfg);

  std::string text;
  for (int i = 0; i < 8; ++i) text += "w" + std::to_string(i) + " ";
  const EmbeddingMatrix a = fz1.embed(text);
  const EmbeddingMatrix b = fz2.embed(text);
  REQUIRE(a.size() == b.size());
  std::size_t changed = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.data[i] != b.data[i]) ++changed;
  CHECK(static_cast<double>(changed) >= 0.99 * static_cast<double>(a.size()));
}

TEST_CASE("table checksum is stable") {
  const Featurizer fz(small_config());
  const std::uint64_t sum = fz.table_checksum();
  CHECK(sum == Featurizer(small_config()).table_checksum());
  CHECK(sum != 0);
}
