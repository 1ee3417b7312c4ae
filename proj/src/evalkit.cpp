#include "pdet/evalkit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "pdet/textio.hpp"

namespace pdet {

double auroc(std::span<const double> scores_pos,
             std::span<const double> scores_neg) {
  if (scores_pos.empty() || scores_neg.empty())
    throw std::invalid_argument("auroc: both score lists must be non-empty");
  std::uint64_t wins = 0;
  std::uint64_t ties = 0;
  for (const double p : scores_pos)
    for (const double n : scores_neg) {
      if (p > n)
        ++wins;
      else if (p == n)
        ++ties;
    }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(scores_pos.size()) *
          static_cast<double>(scores_neg.size()));
}

namespace {

std::size_t eval_thread_cap() {
  if (const char* env = std::getenv("PERTURB_DETECT_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return 1;
}

// class-1 probability per sample, corpus order; parallel map with a fixed
// slot per sample so the thread count never changes the result
std::vector<double> score_corpus(const DetectorModel& model,
                                 const Featurizer& featurizer,
                                 const Corpus& corpus) {
  std::vector<double> scores(corpus.size());
  const std::size_t threads =
      std::min(eval_thread_cap(), std::max<std::size_t>(corpus.size(), 1));
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const EmbeddingMatrix e = featurizer.embed(corpus.samples[i].text);
      const std::vector<double> z = extract(model, e);
      scores[i] = predict(model, z)[1];
    }
  };
  if (threads <= 1) {
    work(0, corpus.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (corpus.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(begin + chunk, corpus.size());
      if (begin >= end) break;
      pool.emplace_back(work, begin, end);
    }
    for (std::thread& th : pool) th.join();
  }
  return scores;
}

}  // namespace

Metrics metrics_from_counts(long tp, long fp, long tn, long fn) {
  if (tp < 0 || fp < 0 || tn < 0 || fn < 0)
    throw std::invalid_argument("metrics_from_counts: negative count");
  const long total = tp + fp + tn + fn;
  if (total == 0) throw std::invalid_argument("metrics_from_counts: no samples");
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
  m.precision =
      tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall =
      tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  m.auroc = 0.5;
  return m;
}

Metrics evaluate(const DetectorModel& model, const Featurizer& featurizer,
                 const Corpus& corpus, double threshold) {
  if (corpus.empty()) throw std::invalid_argument("evaluate: empty corpus");
  const std::vector<double> scores = score_corpus(model, featurizer, corpus);

  long tp = 0, fp = 0, tn = 0, fn = 0;
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const int label = corpus.samples[i].label;
    const int pred = scores[i] >= threshold ? 1 : 0;
    if (label == 1) {
      pos.push_back(scores[i]);
      pred == 1 ? ++tp : ++fn;
    } else {
      neg.push_back(scores[i]);
      pred == 1 ? ++fp : ++tn;
    }
  }
  Metrics m = metrics_from_counts(tp, fp, tn, fn);
  m.auroc = (!pos.empty() && !neg.empty()) ? auroc(pos, neg) : 0.5;
  return m;
}

std::map<std::string, Metrics> cross_domain_eval(
    const Checkpoint& ckpt, const std::map<std::string, Corpus>& targets) {
  const Featurizer featurizer(ckpt.detector.featurizer_config);
  std::map<std::string, Metrics> out;
  for (const auto& [name, corpus] : targets)
    out.emplace(name, evaluate(ckpt.detector, featurizer, corpus));
  return out;
}

Corpus attack_corpus(const Corpus& corpus, const AttackConfig& attack,
                     std::uint64_t seed) {
  attack.validate();
  rng::Stream attack_rs = rng::substream(seed, "attack");
  Corpus attacked;
  attacked.name = corpus.name + "+attack";
  attacked.samples.reserve(corpus.size());
  for (const Sample& s : corpus.samples) {
    Sample copy = s;
    if (s.label == 1) {
      copy.text = attack.kind == AttackKind::synonym
                      ? synonym_attack(s.text, attack, attack_rs)
                      : paraphrase_surrogate(s.text, attack, attack_rs);
    }
    attacked.samples.push_back(std::move(copy));
  }
  return attacked;
}

AttackEvalResult attack_eval(const Checkpoint& ckpt, const Corpus& corpus,
                             const AttackConfig& attack, std::uint64_t seed) {
  const Featurizer featurizer(ckpt.detector.featurizer_config);
  AttackEvalResult result;
  result.clean = evaluate(ckpt.detector, featurizer, corpus);
  result.attacked =
      evaluate(ckpt.detector, featurizer, attack_corpus(corpus, attack, seed));
  return result;
}

double kl_diag_gaussian(std::span<const double> mean_a,
                        std::span<const double> var_a,
                        std::span<const double> mean_b,
                        std::span<const double> var_b) {
  const std::size_t dim = mean_a.size();
  if (var_a.size() != dim || mean_b.size() != dim || var_b.size() != dim)
    throw std::invalid_argument("kl_diag_gaussian: dimension mismatch");
  double kl = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    if (var_a[j] <= 0.0 || var_b[j] <= 0.0)
      throw std::invalid_argument("kl_diag_gaussian: non-positive variance");
    const double dmu = mean_a[j] - mean_b[j];
    kl += 0.5 * std::log(var_b[j] / var_a[j]) +
          (var_a[j] + dmu * dmu) / (2.0 * var_b[j]) - 0.5;
  }
  return kl;
}

namespace {

constexpr double kVarianceFloor = 1e-6;

void fit_moments(const std::vector<std::vector<double>>& features,
                 std::vector<double>& mean, std::vector<double>& var) {
  const std::size_t n = features.size();
  const std::size_t dim = features.front().size();
  mean.assign(dim, 0.0);
  var.assign(dim, 0.0);
  for (const std::vector<double>& f : features) {
    if (f.size() != dim)
      throw std::invalid_argument("kl_shift: ragged feature set");
    for (std::size_t j = 0; j < dim; ++j) mean[j] += f[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  for (const std::vector<double>& f : features)
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = f[j] - mean[j];
      var[j] += d * d;
    }
  for (double& v : var) v = std::max(v / static_cast<double>(n), kVarianceFloor);
}

}  // namespace

double kl_shift(const std::vector<std::vector<double>>& features_a,
                const std::vector<std::vector<double>>& features_b) {
  if (features_a.empty() || features_b.empty())
    throw std::invalid_argument("kl_shift: empty feature set");
  const std::size_t dim = features_a.front().size();
  if (features_a.size() < 2 * dim || features_b.size() < 2 * dim)
    throw std::invalid_argument(
        "kl_shift: each feature set needs at least 2*dim points");
  std::vector<double> mean_a, var_a, mean_b, var_b;
  fit_moments(features_a, mean_a, var_a);
  fit_moments(features_b, mean_b, var_b);
  return kl_diag_gaussian(mean_a, var_a, mean_b, var_b);
}

std::vector<std::vector<double>> shift_features(
    const DetectorModel& model, const Featurizer& featurizer,
    const Corpus& corpus, const std::optional<NoiseState>& noise,
    std::uint64_t seed, bool use_extractor) {
  rng::Stream noise_rs = rng::substream(seed, "shift_noise");
  std::vector<std::vector<double>> out;
  out.reserve(corpus.size());
  for (const Sample& s : corpus.samples) {
    EmbeddingMatrix e = featurizer.embed(s.text);
    if (noise) {
      const Matrix n = sample_noise(*noise, e.rows, e.cols, noise_rs);
      e = inject(e, n);
    }
    if (use_extractor) {
      out.push_back(extract(model, e));
    } else {
      std::vector<double> pooled(e.cols, 0.0);
      for (std::size_t r = 0; r < e.rows; ++r)
        for (std::size_t c = 0; c < e.cols; ++c) pooled[c] += e.at(r, c);
      for (double& x : pooled) x /= static_cast<double>(e.rows);
      out.push_back(std::move(pooled));
    }
  }
  return out;
}

DomainShiftReport shift_report(const DetectorModel& model,
                               const Featurizer& featurizer,
                               const std::map<std::string, Corpus>& corpora,
                               const std::optional<NoiseState>& noise,
                               std::uint64_t seed, bool use_extractor) {
  if (corpora.empty())
    throw std::invalid_argument("shift_report: no corpora given");
  if (corpora.size() < 2 && !noise)
    throw std::invalid_argument(
        "shift_report: need at least two corpora or a noise state");

  std::map<std::string, std::vector<std::vector<double>>> features;
  for (const auto& [name, corpus] : corpora)
    features.emplace(name, shift_features(model, featurizer, corpus,
                                          std::nullopt, seed, use_extractor));

  DomainShiftReport report;
  for (const auto& [na, fa] : features)
    for (const auto& [nb, fb] : features) {
      if (na == nb) continue;
      report.pairs.push_back({na, nb, kl_shift(fa, fb)});
    }
  if (noise) {
    for (const auto& [name, corpus] : corpora) {
      const std::vector<std::vector<double>> noisy = shift_features(
          model, featurizer, corpus, noise, seed, use_extractor);
      report.pairs.push_back(
          {name, name + "+noise", kl_shift(features.at(name), noisy)});
    }
  }
  return report;
}

BiasVarianceReport bias_variance_from_predictions(
    const std::vector<std::vector<int>>& predictions,
    const std::vector<int>& labels) {
  const int resamples = static_cast<int>(predictions.size());
  if (resamples < 2)
    throw std::invalid_argument("bias_variance: need at least 2 resamples");
  if (labels.empty())
    throw std::invalid_argument("bias_variance: empty probe set");
  for (const std::vector<int>& row : predictions)
    if (row.size() != labels.size())
      throw std::invalid_argument("bias_variance: ragged prediction rows");

  BiasVarianceReport report;
  report.resamples = resamples;
  const double inv_points = 1.0 / static_cast<double>(labels.size());
  const double inv_b = 1.0 / static_cast<double>(resamples);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    int ones = 0;
    for (int b = 0; b < resamples; ++b)
      ones += predictions[static_cast<std::size_t>(b)][p];
    const int main_pred = 2 * ones >= resamples ? 1 : 0;  // ties -> class 1
    if (main_pred != labels[p]) report.bias += inv_points;
    double disagree = 0.0;
    for (int b = 0; b < resamples; ++b)
      if (predictions[static_cast<std::size_t>(b)][p] != main_pred)
        disagree += inv_b;
    report.variance += disagree * inv_points;
  }
  return report;
}

BiasVarianceReport bias_variance_probe(const TrainConfig& config,
                                       const Corpus& train_corpus,
                                       const Corpus& probe_corpus,
                                       int resamples, std::uint64_t seed,
                                       bool bootstrap) {
  if (resamples < 2)
    throw std::invalid_argument("bias_variance_probe: resamples must be >= 2");
  if (probe_corpus.empty())
    throw std::invalid_argument("bias_variance_probe: empty probe set");

  rng::Stream resample_rs = rng::substream(seed, "bootstrap");
  const std::size_t n = train_corpus.size();
  std::vector<std::vector<int>> preds;  // [resample][probe point]
  for (int b = 0; b < resamples; ++b) {
    Corpus resample;
    resample.name = train_corpus.name + "-boot" + std::to_string(b);
    if (bootstrap) {
      resample.samples.reserve(n);
      for (std::size_t i = 0; i < n; ++i)
        resample.samples.push_back(train_corpus.samples[resample_rs.below(n)]);
    } else {
      resample.samples = train_corpus.samples;
    }
    const Checkpoint ckpt = train(config, resample);
    const Featurizer featurizer(ckpt.detector.featurizer_config);
    std::vector<int> row;
    row.reserve(probe_corpus.size());
    for (const Sample& s : probe_corpus.samples) {
      const EmbeddingMatrix e = featurizer.embed(s.text);
      const std::vector<double> z = extract(ckpt.detector, e);
      row.push_back(predict(ckpt.detector, z)[1] >= 0.5 ? 1 : 0);
    }
    preds.push_back(std::move(row));
  }

  std::vector<int> labels;
  labels.reserve(probe_corpus.size());
  for (const Sample& s : probe_corpus.samples) labels.push_back(s.label);
  return bias_variance_from_predictions(preds, labels);
}

void SyntheticRlEnv::validate() const {
  bounds.validate();
  if (mu_star < bounds.mu_lo || mu_star > bounds.mu_hi ||
      sigma_star < bounds.sigma_lo || sigma_star > bounds.sigma_hi)
    throw std::invalid_argument("synthetic env optimum outside bounds");
}

double SyntheticRlEnv::reward_at(const NoiseState& s) const {
  const double dm = s.mu - mu_star;
  const double ds = s.sigma - sigma_star;
  return r_max - ds * ds - dm * dm;
}

namespace {

NoiseState env_initial_state(const SyntheticRlEnv& env,
                             const EnvRunConfig& config) {
  NoiseState s;
  s.bounds = env.bounds;
  s.mu = config.initial_mu;
  s.sigma = config.initial_sigma;
  s.validate();
  return s;
}

void track_best(EnvRunResult& result, const NoiseState& s, double r,
                double& best_r) {
  result.rewards.push_back(r);
  result.trace.push_back({s.mu, s.sigma});
  if (r > best_r) {
    best_r = r;
    result.best_state = s;
  }
}

}  // namespace

EnvRunResult run_ddpg_on_env(const SyntheticRlEnv& env,
                             const EnvRunConfig& config, std::uint64_t seed) {
  env.validate();
  rng::Stream init_rs = rng::substream(seed, "agent_init");
  rng::Stream explore_rs = rng::substream(seed, "explore");
  rng::Stream replay_rs = rng::substream(seed, "replay");
  AgentModel agent = AgentModel::init(config.agent, env.bounds, init_rs);
  ReplayBuffer<Transition> replay(config.capacity);

  EnvRunResult result;
  NoiseState s = env_initial_state(env, config);
  result.best_state = s;
  double best_r = -std::numeric_limits<double>::infinity();
  long update_count = 0;
  for (int episode = 0; episode < config.episodes; ++episode) {
    agent.on_episode(episode);
    for (int step = 0; step < config.steps_per_episode; ++step) {
      const Action a = select_action(agent, s, /*explore=*/true, explore_rs);
      const NoiseState s_next = apply_action(s, a);
      const double r = env.reward_at(s_next);
      // the learner sees rewards centered at r_max (policy-preserving
      // shift; the constant offset would otherwise dominate the little
      // critic's fitting budget). Recorded traces keep the raw reward.
      replay.push({s, a, r - env.r_max, s_next});
      if (replay.size() >= config.warmup) {
        for (int u = 0; u < config.updates_per_step; ++u) {
          const std::vector<Transition> batch =
              replay.sample(config.batch, replay_rs);
          critic_update(agent, batch);
          ++update_count;
          if (update_count % config.actor_period == 0) {
            actor_update(agent, batch);
            soft_update_targets(agent);
          }
        }
      }
      track_best(result, s_next, r, best_r);
      s = s_next;
    }
  }
  result.final_state = s;
  return result;
}

EnvRunResult run_dqn_on_env(const SyntheticRlEnv& env,
                            const EnvRunConfig& config, std::uint64_t seed) {
  env.validate();
  rng::Stream init_rs = rng::substream(seed, "agent_init");
  rng::Stream explore_rs = rng::substream(seed, "explore");
  rng::Stream replay_rs = rng::substream(seed, "replay");
  DqnAgent agent = DqnAgent::init(config.agent, env.bounds, init_rs);
  ReplayBuffer<DqnTransition> replay(config.capacity);

  EnvRunResult result;
  NoiseState s = env_initial_state(env, config);
  result.best_state = s;
  double best_r = -std::numeric_limits<double>::infinity();
  for (int episode = 0; episode < config.episodes; ++episode) {
    if (episode > 0) agent.on_episode();
    for (int step = 0; step < config.steps_per_episode; ++step) {
      const int a = dqn_select(agent, s, /*explore=*/true, explore_rs);
      const NoiseState s_next =
          apply_action(s, dqn_action_delta(a, agent.delta));
      const double r = env.reward_at(s_next);
      replay.push({s, a, r - env.r_max, s_next});
      if (replay.size() >= config.warmup) {
        for (int u = 0; u < config.updates_per_step; ++u) {
          const std::vector<DqnTransition> batch =
              replay.sample(config.batch, replay_rs);
          dqn_update(agent, batch);
          dqn_soft_update(agent);
        }
      }
      track_best(result, s_next, r, best_r);
      s = s_next;
    }
  }
  result.final_state = s;
  return result;
}

TimingReport timing_bench(const Checkpoint& ckpt, const Corpus& corpus) {
  if (corpus.empty()) throw std::invalid_argument("timing_bench: empty corpus");
  const Featurizer featurizer(ckpt.detector.featurizer_config);

  const auto start = std::chrono::steady_clock::now();
  double sink = 0.0;
  for (const Sample& s : corpus.samples) {
    const EmbeddingMatrix e = featurizer.embed(s.text);
    const std::vector<double> z = extract(ckpt.detector, e);
    sink += predict(ckpt.detector, z)[1];
  }
  const auto stop = std::chrono::steady_clock::now();
  if (!std::isfinite(sink))
    throw std::runtime_error("timing_bench: non-finite prediction");

  TimingReport report;
  report.samples = corpus.size();
  report.total_seconds =
      std::chrono::duration<double>(stop - start).count();
  report.per_sample_seconds =
      report.total_seconds / static_cast<double>(corpus.size());
  return report;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

void metrics_row(std::ofstream& out, const std::string& name, const Metrics& m,
                 const std::string& manifest_hash) {
  out << name << ',' << textio::fmt(m.accuracy) << ','
      << textio::fmt(m.precision) << ',' << textio::fmt(m.recall) << ','
      << textio::fmt(m.f1) << ',' << textio::fmt(m.auroc) << ',' << m.tp << ','
      << m.fp << ',' << m.tn << ',' << m.fn << ',' << manifest_hash << '\n';
}

}  // namespace

void write_metrics_csv(const std::map<std::string, Metrics>& rows,
                       const std::filesystem::path& path,
                       const std::string& manifest_hash) {
  std::ofstream out = open_csv(path);
  out << "target,accuracy,precision,recall,f1,auroc,tp,fp,tn,fn,manifest\n";
  double acc = 0.0, f1 = 0.0, au = 0.0;
  for (const auto& [name, m] : rows) {
    metrics_row(out, name, m, manifest_hash);
    acc += m.accuracy;
    f1 += m.f1;
    au += m.auroc;
  }
  if (rows.size() > 1) {
    const double inv = 1.0 / static_cast<double>(rows.size());
    out << "average," << textio::fmt(acc * inv) << ",,,"
        << textio::fmt(f1 * inv) << ',' << textio::fmt(au * inv) << ",,,,,"
        << manifest_hash << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_attack_csv(const AttackEvalResult& result, const std::string& kind,
                      double ratio, const std::filesystem::path& path,
                      const std::string& manifest_hash) {
  std::ofstream out = open_csv(path);
  out << "condition,attack,ratio,accuracy,precision,recall,f1,auroc,tp,fp,tn,"
         "fn,manifest\n";
  const auto row = [&](const char* cond, const Metrics& m) {
    out << cond << ',' << kind << ',' << textio::fmt(ratio) << ','
        << textio::fmt(m.accuracy) << ',' << textio::fmt(m.precision) << ','
        << textio::fmt(m.recall) << ',' << textio::fmt(m.f1) << ','
        << textio::fmt(m.auroc) << ',' << m.tp << ',' << m.fp << ',' << m.tn
        << ',' << m.fn << ',' << manifest_hash << '\n';
  };
  row("clean", result.clean);
  row("attacked", result.attacked);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_shift_csv(const DomainShiftReport& report,
                     const std::filesystem::path& path,
                     const std::string& manifest_hash) {
  std::ofstream out = open_csv(path);
  out << "from,to,kl,estimator,manifest\n";
  for (const ShiftPair& p : report.pairs)
    out << p.a << ',' << p.b << ',' << textio::fmt(p.kl) << ','
        << report.estimator << ',' << manifest_hash << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_timing_csv(const TimingReport& report,
                      const std::filesystem::path& path,
                      const std::string& manifest_hash) {
  std::ofstream out = open_csv(path);
  out << "samples,total_seconds,per_sample_seconds,manifest\n";
  out << report.samples << ',' << textio::fmt(report.total_seconds) << ','
      << textio::fmt(report.per_sample_seconds) << ',' << manifest_hash
      << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void export_features(const Checkpoint& ckpt, const Corpus& corpus,
                     const std::filesystem::path& path) {
  const Featurizer featurizer(ckpt.detector.featurizer_config);
  std::ofstream out = open_csv(path);
  out << "domain,label";
  for (std::size_t k = 0; k < ckpt.detector.repr_dim(); ++k)
    out << ",z" << (k + 1);
  out << '\n';
  for (const Sample& s : corpus.samples) {
    const EmbeddingMatrix e = featurizer.embed(s.text);
    const std::vector<double> z = extract(ckpt.detector, e);
    out << s.domain << ',' << s.label;
    for (const double v : z) out << ',' << textio::fmt(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace pdet
