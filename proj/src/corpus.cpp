#include "pdet/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pdet/rng.hpp"

namespace pdet {

namespace {

[[noreturn]] void fail_line(const std::string& what, std::size_t line) {
  throw std::runtime_error(what + " at line " + std::to_string(line));
}

void check_weights(const std::vector<double>& w, const char* which) {
  if (w.empty())
    throw std::invalid_argument(std::string(which) + ": empty template mix");
  double total = 0.0;
  for (const double x : w) {
    if (x < 0.0)
      throw std::invalid_argument(std::string(which) +
                                  ": negative template weight");
    total += x;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(which) +
                                ": template weights must sum to 1");
}

}  // namespace

void SynthSpec::validate() const {
  if (domains < 1) throw std::invalid_argument("domains must be >= 1");
  if (vocab_size < 8) throw std::invalid_argument("vocab_size must be >= 8");
  if (domain_offset_frac < 0.0 || domain_offset_frac > 1.0)
    throw std::invalid_argument("domain_offset_frac must be in [0,1]");
  if (zipf_exponent[0] <= 0.0 || zipf_exponent[1] <= 0.0)
    throw std::invalid_argument("zipf exponents must be positive");
  check_weights(template_weights0, "class 0");
  check_weights(template_weights1, "class 1");
  if (template_weights0.size() != template_weights1.size())
    throw std::invalid_argument("template mixes must have equal length");
  if (samples_per_class < 1)
    throw std::invalid_argument("samples_per_class must be >= 1");
  if (len_min < 3) throw std::invalid_argument("len_min must be >= 3 tokens");
  if (len_min > len_max)
    throw std::invalid_argument("len_min must not exceed len_max");
}

Corpus load_corpus(const std::filesystem::path& path, const std::string& name) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open corpus file: " + path.string());

  Corpus corpus;
  corpus.name = name;
  std::string line;
  std::size_t line_no = 0;
  std::size_t extra_key_lines = 0;
  while (std::getline(in, line)) {
    ++line_no;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      fail_line("malformed JSON", line_no);
    }
    if (!j.is_object()) fail_line("record is not a JSON object", line_no);
    for (const char* key : {"text", "label", "domain"})
      if (!j.contains(key))
        fail_line(std::string("missing key '") + key + "'", line_no);
    if (j.size() > 3) ++extra_key_lines;

    Sample s;
    if (!j["text"].is_string()) fail_line("text is not a string", line_no);
    s.text = j["text"].get<std::string>();
    if (s.text.empty()) fail_line("empty text", line_no);
    if (!j["label"].is_number_integer())
      fail_line("label is not an integer", line_no);
    s.label = j["label"].get<int>();
    if (s.label != 0 && s.label != 1) fail_line("label outside {0,1}", line_no);
    if (!j["domain"].is_string()) fail_line("domain is not a string", line_no);
    s.domain = j["domain"].get<std::string>();
    if (s.domain.empty()) fail_line("empty domain", line_no);
    corpus.samples.push_back(std::move(s));
  }
  if (in.bad())
    throw std::runtime_error("I/O error while reading " + path.string());
  if (extra_key_lines > 0)
    std::fprintf(stderr, "warning: %s: ignored extra keys on %zu line(s)\n",
                 path.string().c_str(), extra_key_lines);
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  for (const Sample& s : corpus.samples) {
    nlohmann::ordered_json j;
    j["text"] = s.text;
    j["label"] = s.label;
    j["domain"] = s.domain;
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

// cumulative Zipf weights over ranks 0..V-1, weight (r+1)^-z
std::vector<double> zipf_cdf(int vocab, double exponent) {
  std::vector<double> cdf(static_cast<std::size_t>(vocab));
  double total = 0.0;
  for (int r = 0; r < vocab; ++r) {
    total += std::pow(static_cast<double>(r + 1), -exponent);
    cdf[static_cast<std::size_t>(r)] = total;
  }
  for (double& x : cdf) x /= total;
  return cdf;
}

int draw_from_cdf(const std::vector<double>& cdf, rng::Stream& rs) {
  const double u = rs.uniform01();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto idx = static_cast<std::size_t>(it - cdf.begin());
  return static_cast<int>(std::min(idx, cdf.size() - 1));
}

int draw_template(const std::vector<double>& weights, rng::Stream& rs) {
  const double u = rs.uniform01();
  double acc = 0.0;
  for (std::size_t t = 0; t < weights.size(); ++t) {
    acc += weights[t];
    if (u < acc) return static_cast<int>(t);
  }
  return static_cast<int>(weights.size()) - 1;
}

std::string domain_tag(int d) { return "synth" + std::to_string(d); }

}  // namespace

std::map<std::string, Corpus> synth_corpus(const SynthSpec& spec) {
  spec.validate();
  rng::Stream rs = rng::substream(spec.seed, "synth");

  const std::array<std::vector<double>, 2> cdf = {
      zipf_cdf(spec.vocab_size, spec.zipf_exponent[0]),
      zipf_cdf(spec.vocab_size, spec.zipf_exponent[1])};
  const std::array<const std::vector<double>*, 2> mixes = {
      &spec.template_weights0, &spec.template_weights1};
  const int offset_step = static_cast<int>(
      std::lround(spec.domain_offset_frac * spec.vocab_size));

  std::map<std::string, Corpus> out;
  for (int d = 0; d < spec.domains; ++d) {
    const std::string tag = domain_tag(d);
    const int offset = d * offset_step;
    Corpus corpus;
    corpus.name = tag;
    for (int cls = 0; cls < 2; ++cls) {
      for (int i = 0; i < spec.samples_per_class; ++i) {
        const int len =
            spec.len_min +
            static_cast<int>(rs.below(
                static_cast<std::uint64_t>(spec.len_max - spec.len_min + 1)));
        const int tpl = draw_template(*mixes[cls], rs);
        const int period = 3 + tpl;
        std::string text;
        for (int pos = 0; pos < len; ++pos) {
          if (pos > 0) text += ' ';
          if (pos % period == 0) {
            text += 'm';
            text += std::to_string(tpl);
          } else {
            const int rank = draw_from_cdf(cdf[static_cast<std::size_t>(cls)], rs);
            text += 'w';
            text += std::to_string(offset + rank);
          }
        }
        corpus.samples.push_back({std::move(text), cls, tag});
      }
    }
    out.emplace(tag, std::move(corpus));
  }
  return out;
}

std::map<std::string, std::vector<std::string>> synth_lexicon(
    const SynthSpec& spec) {
  spec.validate();
  const int offset_step = static_cast<int>(
      std::lround(spec.domain_offset_frac * spec.vocab_size));
  const int span = (spec.domains - 1) * offset_step + spec.vocab_size;

  std::map<std::string, std::vector<std::string>> lex;
  for (int id = 0; id < span; ++id) {
    std::vector<std::string> alts;
    for (const int delta : {-2, -1, 1, 2}) {
      const int nb = id + delta;
      if (nb >= 0 && nb < span) alts.push_back("w" + std::to_string(nb));
    }
    lex.emplace("w" + std::to_string(id), std::move(alts));
  }
  return lex;
}

SplitResult split(const Corpus& corpus, const SplitRatios& ratios,
                  std::uint64_t seed) {
  const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
  double total = 0.0;
  for (const double x : r) {
    if (x < 0.0) throw std::invalid_argument("split ratios must be >= 0");
    total += x;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must sum to 1");

  rng::Stream rs = rng::substream(seed, "split");
  std::array<std::vector<std::size_t>, 3> assigned;

  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i)
      if (corpus.samples[i].label == cls) idx.push_back(i);
    // Fisher-Yates
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = rs.below(i);
      std::swap(idx[i - 1], idx[j]);
    }

    // largest-remainder apportionment of this class across the three parts
    const auto n = static_cast<double>(idx.size());
    std::array<std::size_t, 3> count;
    std::array<double, 3> frac;
    std::size_t used = 0;
    for (int k = 0; k < 3; ++k) {
      const double exact = r[static_cast<std::size_t>(k)] * n;
      count[static_cast<std::size_t>(k)] =
          static_cast<std::size_t>(std::floor(exact));
      frac[static_cast<std::size_t>(k)] =
          exact - std::floor(exact);
      used += count[static_cast<std::size_t>(k)];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const double fa = frac[static_cast<std::size_t>(a)];
      const double fb = frac[static_cast<std::size_t>(b)];
      if (fa != fb) return fa > fb;
      return a < b;
    });
    for (std::size_t extra = idx.size() - used, k = 0; k < extra; ++k)
      ++count[static_cast<std::size_t>(order[k % 3])];

    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k)
      for (std::size_t c = 0; c < count[static_cast<std::size_t>(k)]; ++c)
        assigned[static_cast<std::size_t>(k)].push_back(idx[pos++]);
  }

  SplitResult out;
  const std::array<Corpus*, 3> parts = {&out.train, &out.val, &out.test};
  const std::array<const char*, 3> suffix = {"-train", "-val", "-test"};
  for (int k = 0; k < 3; ++k) {
    auto& part_idx = assigned[static_cast<std::size_t>(k)];
    std::sort(part_idx.begin(), part_idx.end());
    parts[static_cast<std::size_t>(k)]->name =
        corpus.name + suffix[static_cast<std::size_t>(k)];
    for (const std::size_t i : part_idx)
      parts[static_cast<std::size_t>(k)]->samples.push_back(corpus.samples[i]);
  }
  return out;
}

}  // namespace pdet
