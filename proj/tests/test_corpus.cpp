#include "pdet/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <stdexcept>

#include "doctest.h"

using namespace pdet;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double type_token_ratio(const std::string& text) {
  std::set<std::string> types;
  std::size_t count = 0;
  std::stringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    types.insert(tok);
    ++count;
  }
  return count ? static_cast<double>(types.size()) / static_cast<double>(count)
               : 0.0;
}

}  // namespace

TEST_CASE("load_corpus reads valid lines in order") {
  const fs::path p = temp_file(
      "pdet_corpus_ok.jsonl",
      "{\"text\":\"alpha beta\",\"label\":0,\"domain\":\"d1\"}\n"
      "{\"text\":\"gamma\",\"label\":1,\"domain\":\"d2\"}\n");
  const Corpus c = load_corpus(p, "t");
  REQUIRE(c.size() == 2);
  CHECK(c.samples[0].text == "alpha beta");
  CHECK(c.samples[0].label == 0);
  CHECK(c.samples[1].domain == "d2");

  const Corpus again = load_corpus(p, "t");
  CHECK(again.samples[0].text == c.samples[0].text);
  CHECK(again.samples[1].text == c.samples[1].text);
}

TEST_CASE("load_corpus names the offending line") {
  const fs::path empty_text = temp_file(
      "pdet_corpus_empty.jsonl",
      "{\"text\":\"ok\",\"label\":0,\"domain\":\"d\"}\n"
      "{\"text\":\"\",\"label\":1,\"domain\":\"d\"}\n");
  CHECK_THROWS_WITH_AS(load_corpus(empty_text, "t"), "empty text at line 2",
                       std::runtime_error);

  const fs::path bad_label = temp_file(
      "pdet_corpus_label.jsonl",
      "{\"text\":\"ok\",\"label\":2,\"domain\":\"d\"}\n");
  CHECK_THROWS_WITH_AS(load_corpus(bad_label, "t"),
                       "label outside {0,1} at line 1", std::runtime_error);

  const fs::path missing = temp_file(
      "pdet_corpus_missing.jsonl", "{\"text\":\"ok\",\"label\":0}\n");
  CHECK_THROWS_AS(load_corpus(missing, "t"), std::runtime_error);

  CHECK_THROWS_AS(load_corpus("/nonexistent/nope.jsonl", "t"),
                  std::runtime_error);
}

TEST_CASE("write_corpus round-trips with fixed key order") {
  Corpus c;
  c.name = "rt";
  c.samples = {{"one two", 0, "da"}, {"three", 1, "db"}};
  const fs::path p = fs::temp_directory_path() / "pdet_corpus_rt.jsonl";
  write_corpus(c, p);
  const std::string bytes = slurp(p);
  CHECK(bytes ==
        "{\"text\":\"one two\",\"label\":0,\"domain\":\"da\"}\n"
        "{\"text\":\"three\",\"label\":1,\"domain\":\"db\"}\n");
  const Corpus back = load_corpus(p, "rt");
  REQUIRE(back.size() == 2);
  CHECK(back.samples[0].text == c.samples[0].text);
  const fs::path p2 = fs::temp_directory_path() / "pdet_corpus_rt2.jsonl";
  write_corpus(back, p2);
  CHECK(slurp(p2) == bytes);
}

TEST_CASE("synth_corpus is deterministic and correctly sized") {
  SynthSpec spec;
  spec.samples_per_class = 100;
  spec.seed = 9;
  const auto a = synth_corpus(spec);
  const auto b = synth_corpus(spec);
  REQUIRE(a.size() == 2);
  for (const auto& [tag, corpus] : a) {
    CHECK(corpus.size() == 200);
    CHECK(corpus.name == tag);
    CHECK(b.at(tag).samples[0].text == corpus.samples[0].text);
    CHECK(b.at(tag).samples[199].text == corpus.samples[199].text);
  }
}

TEST_CASE("class Zipf exponents separate type/token ratios") {
  SynthSpec spec;
  spec.samples_per_class = 100;
  spec.zipf_exponent = {1.1, 1.6};
  spec.seed = 4;
  const auto corpora = synth_corpus(spec);
  const Corpus& c = corpora.begin()->second;
  double ttr0 = 0.0, ttr1 = 0.0;
  int n0 = 0, n1 = 0;
  for (const Sample& s : c.samples) {
    if (s.label == 0) {
      ttr0 += type_token_ratio(s.text);
      ++n0;
    } else {
      ttr1 += type_token_ratio(s.text);
      ++n1;
    }
  }
  ttr0 /= n0;
  ttr1 /= n1;
  // the flatter exponent (class 0) spreads over more of the vocabulary
  CHECK(ttr0 > ttr1 + 0.02);
}

TEST_CASE("synth_corpus validates its spec") {
  SynthSpec bad;
  bad.len_min = 2;
  CHECK_THROWS_AS(synth_corpus(bad), std::invalid_argument);
  SynthSpec bad2;
  bad2.template_weights1 = {0.5, 0.4};  // sums to 0.9
  CHECK_THROWS_AS(synth_corpus(bad2), std::invalid_argument);
}

TEST_CASE("split is a deterministic stratified partition") {
  Corpus c;
  c.name = "s";
  for (int i = 0; i < 100; ++i)
    c.samples.push_back({"tok" + std::to_string(i), i % 2, "d"});

  const SplitResult r = split(c, {0.8, 0.1, 0.1}, 5);
  CHECK(r.train.size() == 80);
  CHECK(r.val.size() == 10);
  CHECK(r.test.size() == 10);

  // partition: every text appears exactly once across the three parts
  std::set<std::string> seen;
  for (const Corpus* part : {&r.train, &r.val, &r.test})
    for (const Sample& s : part->samples) CHECK(seen.insert(s.text).second);
  CHECK(seen.size() == 100);

  // stratification within one sample per class
  const auto count1 = [](const Corpus& part) {
    int n = 0;
    for (const Sample& s : part.samples) n += s.label;
    return n;
  };
  CHECK(count1(r.train) == 40);
  CHECK(count1(r.val) == 5);

  const SplitResult r2 = split(c, {0.8, 0.1, 0.1}, 5);
  CHECK(r2.train.samples[0].text == r.train.samples[0].text);
  CHECK(r2.test.samples[9].text == r.test.samples[9].text);

  const SplitResult all = split(c, {1.0, 0.0, 0.0}, 5);
  CHECK(all.train.size() == 100);
  CHECK(all.val.empty());
  CHECK(all.test.empty());

  CHECK_THROWS_AS(split(c, {0.5, 0.1, 0.1}, 5), std::invalid_argument);
}
