#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pdet/corpus.hpp"
#include "pdet/featurizer.hpp"
#include "pdet/perturb.hpp"
#include "pdet/rlcontrol.hpp"
#include "pdet/trainer.hpp"

namespace pdet {

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auroc = 0.0;
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

// Exact pairwise AUROC: (#{p > n} + 0.5 #{p = n}) / (|pos| |neg|).
double auroc(std::span<const double> scores_pos,
             std::span<const double> scores_neg);

// Derived metrics from a confusion matrix (auroc left at 0.5; callers with
// scores fill it in).
Metrics metrics_from_counts(long tp, long fp, long tn, long fn);

// embed -> extract -> predict per sample; class 1 iff p1 >= threshold.
// Honors PERTURB_DETECT_THREADS for the per-sample forward passes; the
// reduction order is fixed so results do not depend on the thread count.
Metrics evaluate(const DetectorModel& model, const Featurizer& featurizer,
                 const Corpus& corpus, double threshold = 0.5);

std::map<std::string, Metrics> cross_domain_eval(
    const Checkpoint& ckpt, const std::map<std::string, Corpus>& targets);

struct AttackEvalResult {
  Metrics clean;
  Metrics attacked;
};

// Rewrite class-1 (AI) texts with the attack; class-0 texts, labels, and
// domains are untouched.
Corpus attack_corpus(const Corpus& corpus, const AttackConfig& attack,
                     std::uint64_t seed);

AttackEvalResult attack_eval(const Checkpoint& ckpt, const Corpus& corpus,
                             const AttackConfig& attack, std::uint64_t seed);

// Closed-form KL(A||B) between diagonal Gaussians given their moments.
double kl_diag_gaussian(std::span<const double> mean_a,
                        std::span<const double> var_a,
                        std::span<const double> mean_b,
                        std::span<const double> var_b);

// Fit diagonal Gaussians (MLE moments, variance floor 1e-6) to two feature
// sets and return KL(A||B). Each set needs at least 2*dim points.
double kl_shift(const std::vector<std::vector<double>>& features_a,
                const std::vector<std::vector<double>>& features_b);

struct ShiftPair {
  std::string a;
  std::string b;
  double kl = 0.0;
};

struct DomainShiftReport {
  std::vector<ShiftPair> pairs;
  std::string estimator = "diag-gaussian";
};

// Per-sample features for shift analysis: extractor output z by default, or
// the mean-pooled raw embedding when use_extractor is false. The optional
// noise state adds a "<name>+noise" distribution per corpus.
std::vector<std::vector<double>> shift_features(
    const DetectorModel& model, const Featurizer& featurizer,
    const Corpus& corpus, const std::optional<NoiseState>& noise,
    std::uint64_t seed, bool use_extractor);

// All ordered pairs of distinct corpora, plus (X, X+noise) per corpus when a
// noise state is given.
DomainShiftReport shift_report(const DetectorModel& model,
                               const Featurizer& featurizer,
                               const std::map<std::string, Corpus>& corpora,
                               const std::optional<NoiseState>& noise,
                               std::uint64_t seed, bool use_extractor = true);

struct BiasVarianceReport {
  double bias = 0.0;
  double variance = 0.0;
  double noise_term = 0.0;  // 0 by construction on synthetic labels
  int resamples = 0;
};

// 0/1-loss decomposition given per-resample predictions on the probe set:
// majority-vote main prediction (ties to class 1), bias = main-vs-label
// error rate, variance = mean disagreement with the main prediction.
BiasVarianceReport bias_variance_from_predictions(
    const std::vector<std::vector<int>>& predictions,
    const std::vector<int>& labels);

// Trains `resamples` detectors on bootstrap resamples (or on the identical
// corpus when bootstrap=false) and applies the decomposition above.
BiasVarianceReport bias_variance_probe(const TrainConfig& config,
                                       const Corpus& train_corpus,
                                       const Corpus& probe_corpus,
                                       int resamples, std::uint64_t seed,
                                       bool bootstrap = true);

// Planted-optimum environment for validating the controllers in isolation:
// reward(s) = r_max - (sigma - sigma*)^2 - (mu - mu*)^2.
struct SyntheticRlEnv {
  double mu_star = 0.0;
  double sigma_star = 0.5;
  double r_max = 10.0;
  NoiseBounds bounds;

  double reward_at(const NoiseState& s) const;
  void validate() const;
};

struct EnvRunConfig {
  int episodes = 100;
  int steps_per_episode = 3;
  AgentConfig agent;
  std::size_t batch = 32;
  std::size_t warmup = 64;
  int updates_per_step = 8;
  // the actor (and target sync) moves once per this many critic updates,
  // giving the value estimate a head start
  int actor_period = 8;
  std::size_t capacity = 10000;
  double initial_mu = 0.0;
  double initial_sigma = 0.1;
};

struct EnvRunResult {
  std::vector<double> rewards;                  // one per step
  std::vector<std::array<double, 2>> trace;     // (mu, sigma) per step
  NoiseState final_state;
  NoiseState best_state;  // argmax reward, earliest on ties
};

EnvRunResult run_ddpg_on_env(const SyntheticRlEnv& env,
                             const EnvRunConfig& config, std::uint64_t seed);
EnvRunResult run_dqn_on_env(const SyntheticRlEnv& env,
                            const EnvRunConfig& config, std::uint64_t seed);

struct TimingReport {
  double total_seconds = 0.0;
  double per_sample_seconds = 0.0;
  std::size_t samples = 0;
};

// Wall-clock embed -> extract -> predict over the corpus.
TimingReport timing_bench(const Checkpoint& ckpt, const Corpus& corpus);

// CSV writers (deterministic shortest-round-trip number formatting). The
// manifest hash column ties rows back to the run that produced them.
void write_metrics_csv(const std::map<std::string, Metrics>& rows,
                       const std::filesystem::path& path,
                       const std::string& manifest_hash);
void write_attack_csv(const AttackEvalResult& result, const std::string& kind,
                      double ratio, const std::filesystem::path& path,
                      const std::string& manifest_hash);
void write_shift_csv(const DomainShiftReport& report,
                     const std::filesystem::path& path,
                     const std::string& manifest_hash);
void write_timing_csv(const TimingReport& report,
                      const std::filesystem::path& path,
                      const std::string& manifest_hash);
// one row per sample: domain,label,z1..zk (corpus order)
void export_features(const Checkpoint& ckpt, const Corpus& corpus,
                     const std::filesystem::path& path);

}  // namespace pdet
