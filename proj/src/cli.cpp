#include "pdet/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdet/evalkit.hpp"
#include "pdet/textio.hpp"

namespace pdet::cli {

namespace {

// key -> default value; the full set of recognized configuration keys
const std::map<std::string, std::string>& registry() {
  static const std::map<std::string, std::string> keys = {
      {"seed", "1"},
      // featurizer
      {"embed_dim", "64"},
      {"max_tokens", "128"},
      {"hash_seed", "11400714819323198485"},
      {"table_size", "65536"},
      // loss weights
      {"lambda1", "0.5"},
      {"lambda2", "0.5"},
      {"lambda3", "0.01"},
      // noise state
      {"noise_family", "gaussian"},
      {"mu_init", "0"},
      {"sigma_init", "0.1"},
      {"mu_lo", "-0.5"},
      {"mu_hi", "0.5"},
      {"sigma_lo", "0.01"},
      {"sigma_hi", "1"},
      // trainer
      {"regime", "dpnet"},
      {"max_episode", "30"},
      {"max_step", "10"},
      {"epsilon", "1"},
      {"reward_max", "10"},
      {"lr_encoder", "8e-05"},
      {"lr_actor_critic", "0.0003"},
      {"lr_decay", "0.995"},
      {"batch_budget", "0"},
      {"repr_dim", "32"},
      {"hidden", "64"},
      // RL agent
      {"rl_batch", "64"},
      {"rl_warmup_factor", "5"},
      {"rl_capacity", "10000"},
      {"gamma", "0.99"},
      {"tau", "0.005"},
      {"explore_std", "0.01"},
      {"explore_decay", "0.99"},
      {"agent_hidden", "64"},
      // attacks
      {"attack_kind", "synonym"},
      {"attack_ratio", "0.2"},
      {"lexicon_path", ""},
      {"para_synonym_ratio", "0.35"},
      {"para_delete_rate", "0.1"},
      {"para_reorder_rate", "0.15"},
      // synthetic corpora
      {"synth_domains", "2"},
      {"synth_vocab", "2000"},
      {"synth_offset_frac", "0.5"},
      {"synth_zipf0", "1.1"},
      {"synth_zipf1", "1.6"},
      {"synth_templates0", "0.25,0.25,0.25,0.25"},
      {"synth_templates1", "0.7,0.2,0.05,0.05"},
      {"synth_samples_per_class", "200"},
      {"synth_len_min", "30"},
      {"synth_len_max", "60"},
      // evaluation / analysis
      {"threshold", "0.5"},
      {"shift_features", "extractor"},
  };
  return keys;
}

[[noreturn]] void unknown_key(const std::string& key) {
  std::ostringstream msg;
  msg << "unknown config key '" << key << "'. Valid keys:";
  for (const auto& [name, value] : registry()) msg << ' ' << name;
  throw std::invalid_argument(msg.str());
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

RunConfig::RunConfig() : values_(registry()) {}

const std::map<std::string, std::string>& RunConfig::defaults() {
  return registry();
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path.string() + ":" +
                                  std::to_string(line_no) +
                                  ": expected 'key = value'");
    set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!registry().count(key)) unknown_key(key);
  values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) unknown_key(key);
  return it->second;
}

int RunConfig::get_int(const std::string& key) const {
  try {
    return std::stoi(get(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not an integer: '" +
                                get(key) + "'");
  }
}

std::size_t RunConfig::get_size(const std::string& key) const {
  const int v = get_int(key);
  if (v < 0)
    throw std::invalid_argument("config key '" + key + "': must be >= 0");
  return static_cast<std::size_t>(v);
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number: '" +
                                get(key) + "'");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  try {
    return std::stoull(get(key));
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "': not an unsigned integer: '" + get(key) +
                                "'");
  }
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stod(trim(part)));
    } catch (const std::exception&) {
      throw std::invalid_argument("config key '" + key +
                                  "': bad number list: '" + get(key) + "'");
    }
  }
  return out;
}

FeaturizerConfig RunConfig::featurizer_config() const {
  FeaturizerConfig fz;
  fz.embed_dim = get_size("embed_dim");
  fz.max_tokens = get_size("max_tokens");
  fz.hash_seed = get_u64("hash_seed");
  fz.table_size = get_size("table_size");
  return fz;
}

NoiseState RunConfig::noise_state() const {
  NoiseState s;
  const std::string family = get("noise_family");
  if (family == "gaussian")
    s.family = NoiseFamily::gaussian;
  else if (family == "uniform")
    s.family = NoiseFamily::uniform;
  else
    throw std::invalid_argument(
        "noise_family must be 'gaussian' or 'uniform', got '" + family + "'");
  s.mu = get_double("mu_init");
  s.sigma = get_double("sigma_init");
  s.bounds.mu_lo = get_double("mu_lo");
  s.bounds.mu_hi = get_double("mu_hi");
  s.bounds.sigma_lo = get_double("sigma_lo");
  s.bounds.sigma_hi = get_double("sigma_hi");
  s.validate();
  return s;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.regime = regime_from_name(get("regime"));
  c.max_episode = get_int("max_episode");
  c.max_step = get_int("max_step");
  c.loss_weights = {get_double("lambda1"), get_double("lambda2"),
                    get_double("lambda3")};
  c.epsilon = get_double("epsilon");
  c.reward_max = get_double("reward_max");
  c.initial_noise = noise_state();
  c.lr_encoder = get_double("lr_encoder");
  c.lr_decay = get_double("lr_decay");
  c.batch_budget = get_int("batch_budget");
  c.rl_batch = get_size("rl_batch");
  c.rl_warmup_factor = get_int("rl_warmup_factor");
  c.rl_capacity = get_size("rl_capacity");
  c.agent.gamma = get_double("gamma");
  c.agent.tau = get_double("tau");
  c.agent.lr = get_double("lr_actor_critic");
  c.agent.lr_decay = get_double("lr_decay");
  c.agent.explore_std = get_double("explore_std");
  c.agent.explore_decay = get_double("explore_decay");
  c.agent.hidden = get_size("agent_hidden");
  c.featurizer = featurizer_config();
  c.repr_dim = get_size("repr_dim");
  c.hidden = get_size("hidden");
  c.seed = get_u64("seed");
  c.validate();
  return c;
}

SynthSpec RunConfig::synth_spec() const {
  SynthSpec spec;
  spec.domains = get_int("synth_domains");
  spec.vocab_size = get_int("synth_vocab");
  spec.domain_offset_frac = get_double("synth_offset_frac");
  spec.zipf_exponent = {get_double("synth_zipf0"), get_double("synth_zipf1")};
  spec.template_weights0 = get_double_list("synth_templates0");
  spec.template_weights1 = get_double_list("synth_templates1");
  spec.samples_per_class = get_int("synth_samples_per_class");
  spec.len_min = get_int("synth_len_min");
  spec.len_max = get_int("synth_len_max");
  spec.seed = get_u64("seed");
  spec.validate();
  return spec;
}

AttackConfig RunConfig::attack_config() const {
  AttackConfig a;
  const std::string kind = get("attack_kind");
  if (kind == "synonym")
    a.kind = AttackKind::synonym;
  else if (kind == "paraphrase_surrogate")
    a.kind = AttackKind::paraphrase_surrogate;
  else
    throw std::invalid_argument(
        "attack_kind must be 'synonym' or 'paraphrase_surrogate', got '" +
        kind + "'");
  a.ratio = get_double("attack_ratio");
  a.para_synonym_ratio = get_double("para_synonym_ratio");
  a.para_delete_rate = get_double("para_delete_rate");
  a.para_reorder_rate = get_double("para_reorder_rate");
  const std::string path = get("lexicon_path");
  if (!path.empty()) a.lexicon = load_lexicon(path);
  a.validate();
  return a;
}

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const std::string& kv : sets) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got '" + kv +
                                    "'");
      cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (seed_given) cfg.set("seed", std::to_string(seed));
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out = true) {
  cmd->add_option("--config", args.config_path,
                  "key = value config file (defaults apply if omitted)");
  cmd->add_option("--set", args.sets, "override a config key (key=value)");
  auto* seed_opt = cmd->add_option("--seed", args.seed, "root RNG seed");
  seed_opt->each([&args](const std::string&) { args.seed_given = true; });
  if (needs_out)
    cmd->add_option("--out", args.out_dir, "output directory")->required();
}

// Serialize the resolved config + input hashes, write manifest.json, return
// its content hash (reports embed it so rows trace back to the exact run).
std::string write_manifest(const RunConfig& cfg, const std::string& command,
                           const std::vector<fs::path>& inputs,
                           const fs::path& out_dir) {
  nlohmann::ordered_json manifest;
  manifest["command"] = command;
  nlohmann::ordered_json config;
  for (const auto& [key, value] : cfg.values()) config[key] = value;
  manifest["config"] = config;
  nlohmann::ordered_json input_hashes;
  for (const fs::path& p : inputs)
    input_hashes[p.filename().string()] =
        textio::hex64(textio::fnv1a_file(p));
  manifest["inputs"] = input_hashes;

  const std::string bytes = manifest.dump(2) + "\n";
  const fs::path path = out_dir / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write manifest: " + path.string());
  out << bytes;
  out.close();
  return textio::hex64(textio::fnv1a(bytes.data(), bytes.size()));
}

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw std::invalid_argument("--out is required");
  fs::create_directories(dir);
}

std::map<std::string, Corpus> load_targets(const std::string& list) {
  std::map<std::string, Corpus> targets;
  std::stringstream ss(list);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const fs::path p = trim(part);
    if (p.empty()) continue;
    targets.emplace(p.stem().string(), load_corpus(p, p.stem().string()));
  }
  if (targets.empty())
    throw std::invalid_argument("no target corpora given");
  return targets;
}

int cmd_synth(const CommonArgs& common) {
  const RunConfig cfg = common.resolve();
  const SynthSpec spec = cfg.synth_spec();
  ensure_out_dir(common.out_dir);
  const fs::path out_dir = common.out_dir;

  const std::map<std::string, Corpus> corpora = synth_corpus(spec);
  for (const auto& [tag, corpus] : corpora) {
    const fs::path path = out_dir / (tag + ".jsonl");
    write_corpus(corpus, path);
    std::cout << tag << ": " << corpus.size() << " samples -> "
              << path.string() << "\n";
  }

  const auto lexicon = synth_lexicon(spec);
  nlohmann::ordered_json lex_json;
  for (const auto& [token, alts] : lexicon) lex_json[token] = alts;
  const fs::path lex_path = out_dir / "lexicon.json";
  std::ofstream lex_out(lex_path, std::ios::binary);
  if (!lex_out)
    throw std::runtime_error("cannot write lexicon: " + lex_path.string());
  lex_out << lex_json.dump() << "\n";
  lex_out.close();
  std::cout << "lexicon: " << lexicon.size() << " entries -> "
            << lex_path.string() << "\n";

  write_manifest(cfg, "synth", {}, out_dir);
  return 0;
}

int cmd_train(const CommonArgs& common, const std::string& data,
              const std::string& regime) {
  RunConfig cfg = common.resolve();
  if (!regime.empty()) cfg.set("regime", regime);
  ensure_out_dir(common.out_dir);
  const fs::path out_dir = common.out_dir;

  const Corpus corpus = load_corpus(data, fs::path(data).stem().string());
  const TrainConfig train_cfg = cfg.train_config();
  const Checkpoint ckpt = train(train_cfg, corpus);

  const fs::path ckpt_path = out_dir / "checkpoint.pdck";
  save_checkpoint(ckpt, ckpt_path);
  write_history_csv(ckpt, out_dir / "history.csv");
  write_manifest(cfg, "train", {data}, out_dir);
  std::cout << "regime " << regime_name(train_cfg.regime) << ": "
            << ckpt.history.size() << " steps, " << ckpt.transitions_stored
            << " transitions -> " << ckpt_path.string() << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& ckpt_path,
             const std::string& targets_list) {
  const RunConfig cfg = common.resolve();
  ensure_out_dir(common.out_dir);
  const fs::path out_dir = common.out_dir;

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const std::map<std::string, Corpus> targets = load_targets(targets_list);
  const std::map<std::string, Metrics> metrics =
      cross_domain_eval(ckpt, targets);

  std::vector<fs::path> inputs = {ckpt_path};
  {
    std::stringstream ss(targets_list);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!trim(part).empty()) inputs.emplace_back(trim(part));
  }
  const std::string hash = write_manifest(cfg, "eval", inputs, out_dir);
  write_metrics_csv(metrics, out_dir / "metrics.csv", hash);
  for (const auto& [name, m] : metrics)
    std::cout << name << ": acc " << m.accuracy << " f1 " << m.f1 << " auroc "
              << m.auroc << "\n";
  return 0;
}

int cmd_attack(const CommonArgs& common, const std::string& ckpt_path,
               const std::string& data, const std::string& kind,
               double ratio, bool ratio_given) {
  RunConfig cfg = common.resolve();
  if (!kind.empty()) cfg.set("attack_kind", kind);
  if (ratio_given) cfg.set("attack_ratio", textio::fmt(ratio));
  ensure_out_dir(common.out_dir);
  const fs::path out_dir = common.out_dir;

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Corpus corpus = load_corpus(data, fs::path(data).stem().string());
  const AttackConfig attack = cfg.attack_config();
  const AttackEvalResult result =
      attack_eval(ckpt, corpus, attack, cfg.get_u64("seed"));

  const std::string hash =
      write_manifest(cfg, "attack", {ckpt_path, data}, out_dir);
  write_attack_csv(result, cfg.get("attack_kind"),
                   cfg.get_double("attack_ratio"), out_dir / "attack.csv",
                   hash);
  std::cout << "clean acc " << result.clean.accuracy << " -> attacked acc "
            << result.attacked.accuracy << "\n";
  return 0;
}

int cmd_shift(const CommonArgs& common, const std::string& ckpt_path,
              const std::string& data_list, const std::string& noise_arg) {
  const RunConfig cfg = common.resolve();
  ensure_out_dir(common.out_dir);
  const fs::path out_dir = common.out_dir;

  std::optional<NoiseState> noise;
  if (!noise_arg.empty()) {
    const std::size_t comma = noise_arg.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("--noise expects mu,sigma");
    NoiseState s = cfg.noise_state();
    s.mu = std::stod(noise_arg.substr(0, comma));
    s.sigma = std::stod(noise_arg.substr(comma + 1));
    s.validate();
    noise = s;
  }

  const std::map<std::string, Corpus> corpora = load_targets(data_list);
  const bool use_extractor = cfg.get("shift_features") == "extractor";

  DetectorModel model;
  FeaturizerConfig fz_cfg;
  if (!ckpt_path.empty()) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    model = ckpt.detector;
    fz_cfg = ckpt.detector.featurizer_config;
  } else {
    if (use_extractor)
      throw std::invalid_argument(
          "shift_features=extractor needs --ckpt; use --set "
          "shift_features=pooled for raw embeddings");
    fz_cfg = cfg.featurizer_config();
    rng::Stream init_rs = rng::substream(cfg.get_u64("seed"), "detector_init");
    model = DetectorModel::init(fz_cfg, cfg.get_size("repr_dim"),
                                cfg.get_size("hidden"), init_rs);
  }
  const Featurizer featurizer(fz_cfg);
  const DomainShiftReport report =
      shift_report(model, featurizer, corpora, noise, cfg.get_u64("seed"),
                   use_extractor);

  std::vector<fs::path> inputs;
  if (!ckpt_path.empty()) inputs.emplace_back(ckpt_path);
  {
    std::stringstream ss(data_list);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!trim(part).empty()) inputs.emplace_back(trim(part));
  }
  const std::string hash = write_manifest(cfg, "shift", inputs, out_dir);
  write_shift_csv(report, out_dir / "shift.csv", hash);
  for (const ShiftPair& p : report.pairs)
    std::cout << p.a << " -> " << p.b << ": KL " << p.kl << "\n";
  return 0;
}

int cmd_bench(const CommonArgs& common, const std::string& ckpt_path,
              const std::string& data) {
  const RunConfig cfg = common.resolve();
  ensure_out_dir(common.out_dir);
  const fs::path out_dir = common.out_dir;

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Corpus corpus = load_corpus(data, fs::path(data).stem().string());
  const TimingReport report = timing_bench(ckpt, corpus);

  const std::string hash =
      write_manifest(cfg, "bench", {ckpt_path, data}, out_dir);
  write_timing_csv(report, out_dir / "bench.csv", hash);
  std::cout << report.samples << " samples in " << report.total_seconds
            << " s (" << report.per_sample_seconds * 1e3 << " ms/sample)\n";
  return 0;
}

int cmd_export_features(const CommonArgs& common, const std::string& ckpt_path,
                        const std::string& data) {
  const RunConfig cfg = common.resolve();
  ensure_out_dir(common.out_dir);
  const fs::path out_dir = common.out_dir;

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Corpus corpus = load_corpus(data, fs::path(data).stem().string());
  export_features(ckpt, corpus, out_dir / "features.csv");
  write_manifest(cfg, "export-features", {ckpt_path, data}, out_dir);
  std::cout << corpus.size() << " rows -> "
            << (out_dir / "features.csv").string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{
      "perturb-detect: AI-generated-text detection with RL-steered "
      "noise-enhanced training"};
  app.require_subcommand(1);

  CommonArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate synthetic corpora");
  add_common(synth, synth_args);

  CommonArgs train_args;
  std::string train_data, train_regime;
  auto* train_cmd = app.add_subcommand("train", "train a detector");
  add_common(train_cmd, train_args);
  train_cmd->add_option("--data", train_data, "training corpus (JSONL)")
      ->required();
  train_cmd->add_option("--regime", train_regime,
                        "dpnet | baseline | fixed_noise | two_step");

  CommonArgs eval_args;
  std::string eval_ckpt, eval_targets;
  auto* eval_cmd =
      app.add_subcommand("eval", "evaluate a checkpoint on target corpora");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval_cmd
      ->add_option("--targets", eval_targets,
                   "comma-separated JSONL corpora")
      ->required();

  CommonArgs attack_args;
  std::string attack_ckpt, attack_data, attack_kind;
  double attack_ratio = 0.2;
  bool attack_ratio_given = false;
  auto* attack_cmd =
      app.add_subcommand("attack", "robustness under a text attack");
  add_common(attack_cmd, attack_args);
  attack_cmd->add_option("--ckpt", attack_ckpt, "checkpoint file")->required();
  attack_cmd->add_option("--data", attack_data, "target corpus (JSONL)")
      ->required();
  attack_cmd->add_option("--attack", attack_kind,
                         "synonym | paraphrase_surrogate");
  attack_cmd->add_option("--ratio", attack_ratio, "synonym replacement ratio")
      ->each([&attack_ratio_given](const std::string&) {
        attack_ratio_given = true;
      });

  CommonArgs shift_args;
  std::string shift_ckpt, shift_data, shift_noise;
  auto* shift_cmd =
      app.add_subcommand("shift", "KL divergence between feature sets");
  add_common(shift_cmd, shift_args);
  shift_cmd->add_option("--ckpt", shift_ckpt,
                        "checkpoint (required for extractor features)");
  shift_cmd->add_option("--data", shift_data, "comma-separated JSONL corpora")
      ->required();
  shift_cmd->add_option("--noise", shift_noise,
                        "mu,sigma for domain-vs-noised pairs");

  CommonArgs bench_args;
  std::string bench_ckpt, bench_data;
  auto* bench_cmd = app.add_subcommand("bench", "inference timing");
  add_common(bench_cmd, bench_args);
  bench_cmd->add_option("--ckpt", bench_ckpt, "checkpoint file")->required();
  bench_cmd->add_option("--data", bench_data, "corpus (JSONL)")->required();

  CommonArgs export_args;
  std::string export_ckpt, export_data;
  auto* export_cmd = app.add_subcommand(
      "export-features", "dump extractor representations as CSV");
  add_common(export_cmd, export_args);
  export_cmd->add_option("--ckpt", export_ckpt, "checkpoint file")->required();
  export_cmd->add_option("--data", export_data, "corpus (JSONL)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (train_cmd->parsed())
      return cmd_train(train_args, train_data, train_regime);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, eval_ckpt, eval_targets);
    if (attack_cmd->parsed())
      return cmd_attack(attack_args, attack_ckpt, attack_data, attack_kind,
                        attack_ratio, attack_ratio_given);
    if (shift_cmd->parsed())
      return cmd_shift(shift_args, shift_ckpt, shift_data, shift_noise);
    if (bench_cmd->parsed())
      return cmd_bench(bench_args, bench_ckpt, bench_data);
    if (export_cmd->parsed())
      return cmd_export_features(export_args, export_ckpt, export_data);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "error: no command\n";
  return 1;
}

}  // namespace pdet::cli
