#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pdet {

// One labeled text. label 0 = human-written, 1 = AI-generated.
struct Sample {
  std::string text;
  int label = 0;
  std::string domain;
};

struct Corpus {
  std::string name;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Recipe for the synthetic multi-domain corpora. The two classes differ in
// Zipf exponent (flatter = richer vocabulary) and in how concentrated their
// template mix is; distinct domains shift the vocabulary window so
// cross-domain feature distributions differ.
struct SynthSpec {
  int domains = 2;
  int vocab_size = 2000;
  // rank shift between consecutive domains, as a fraction of vocab_size
  double domain_offset_frac = 0.5;
  std::array<double, 2> zipf_exponent = {1.1, 1.6};  // class 0, class 1
  std::vector<double> template_weights0 = {0.25, 0.25, 0.25, 0.25};
  std::vector<double> template_weights1 = {0.70, 0.20, 0.05, 0.05};
  int samples_per_class = 200;
  int len_min = 30;
  int len_max = 60;
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

// JSONL loader: one object per line with keys text/label/domain. Extra keys
// are ignored (one warning per file); invalid records name the line number.
Corpus load_corpus(const std::filesystem::path& path, const std::string& name);

// Writer emits keys in the fixed order text, label, domain.
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Deterministic synthetic corpora, one per domain, keyed by domain tag.
std::map<std::string, Corpus> synth_corpus(const SynthSpec& spec);

// Rank-neighbor synonym lexicon covering the content tokens the spec's
// corpora draw from (template marker tokens carry the class signal and have
// no meaning-preserving substitute, so they are not listed).
std::map<std::string, std::vector<std::string>> synth_lexicon(
    const SynthSpec& spec);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SplitResult {
  Corpus train;
  Corpus val;
  Corpus test;
};

// Stratified partition, largest-remainder rounding, deterministic in seed.
SplitResult split(const Corpus& corpus, const SplitRatios& ratios,
                  std::uint64_t seed);

}  // namespace pdet
