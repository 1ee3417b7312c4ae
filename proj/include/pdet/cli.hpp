#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pdet/corpus.hpp"
#include "pdet/perturb.hpp"
#include "pdet/trainer.hpp"

namespace pdet::cli {

// Flat key=value configuration with a closed key registry: every key has a
// documented default and unknown keys are rejected. Files are UTF-8 lines
// "key = value" with '#' comments; later sources override earlier ones
// (defaults < config file < --set pairs < dedicated flags).
class RunConfig {
 public:
  RunConfig();  // defaults

  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  TrainConfig train_config() const;
  SynthSpec synth_spec() const;
  AttackConfig attack_config() const;  // loads lexicon if lexicon_path set
  FeaturizerConfig featurizer_config() const;
  NoiseState noise_state() const;

  const std::map<std::string, std::string>& values() const { return values_; }
  static const std::map<std::string, std::string>& defaults();

 private:
  std::map<std::string, std::string> values_;
};

int run_cli(int argc, char** argv);

}  // namespace pdet::cli
