#include <bit>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "pdet/trainer.hpp"

// Checkpoint container: "PDCK" magic, u32 version, u32 section count, then
// length-prefixed named sections. Kind 0 sections are shape-tagged arrays of
// little-endian f64; the single kind 1 section is JSON metadata (configs,
// activation tags, history length).
namespace pdet {

namespace {

constexpr char kMagic[4] = {'P', 'D', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void corrupt(const std::string& why) {
  throw std::runtime_error("corrupt checkpoint: " + why);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) corrupt("unexpected end of file");
  }
  std::uint32_t get_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos++]))
           << (8 * i);
    return v;
  }
  std::uint64_t get_u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos++]))
           << (8 * i);
    return v;
  }
  double get_f64() { return std::bit_cast<double>(get_u64()); }
  std::string get_bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

struct Section {
  int kind = 0;  // 0 = f64 array, 1 = json
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
  std::string json_bytes;
};

void emit_array(std::string& out, const std::string& name,
                const std::vector<std::uint64_t>& dims,
                const std::vector<double>& values) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  out.push_back(0);  // kind
  put_u32(out, static_cast<std::uint32_t>(dims.size()));
  std::uint64_t count = 1;
  for (const std::uint64_t d : dims) {
    put_u64(out, d);
    count *= d;
  }
  if (count != values.size())
    throw std::logic_error("checkpoint array shape mismatch for " + name);
  for (const double v : values) put_f64(out, v);
}

void emit_json(std::string& out, const std::string& name,
               const std::string& bytes) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  out.push_back(1);  // kind
  put_u64(out, bytes.size());
  out += bytes;
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "linear";
}

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  corrupt("unknown activation tag '" + s + "'");
}

void emit_mlp(std::string& out, nlohmann::ordered_json& acts,
              const std::string& name, const Mlp& mlp) {
  nlohmann::ordered_json tags = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    const Layer& l = mlp.layers[i];
    tags.push_back(activation_name(l.act));
    emit_array(out, name + "." + std::to_string(i) + ".W",
               {l.weights.rows, l.weights.cols}, l.weights.data);
    emit_array(out, name + "." + std::to_string(i) + ".b", {l.bias.size()},
               l.bias);
  }
  acts[name] = tags;
}

Mlp read_mlp(const std::map<std::string, Section>& sections,
             const nlohmann::json& acts, const std::string& name) {
  if (!acts.contains(name)) corrupt("missing activation tags for " + name);
  Mlp mlp;
  const auto& tags = acts.at(name);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string wkey = name + "." + std::to_string(i) + ".W";
    const std::string bkey = name + "." + std::to_string(i) + ".b";
    const auto wi = sections.find(wkey);
    const auto bi = sections.find(bkey);
    if (wi == sections.end() || bi == sections.end())
      corrupt("missing section " + wkey);
    if (wi->second.dims.size() != 2 || bi->second.dims.size() != 1)
      corrupt("bad shape tags for " + wkey);
    Layer layer;
    layer.weights.rows = static_cast<std::size_t>(wi->second.dims[0]);
    layer.weights.cols = static_cast<std::size_t>(wi->second.dims[1]);
    layer.weights.data = wi->second.values;
    layer.bias = bi->second.values;
    if (layer.bias.size() != layer.weights.rows)
      corrupt("bias/weight shape mismatch for " + wkey);
    layer.act = activation_from(tags[i].get<std::string>());
    mlp.layers.push_back(std::move(layer));
  }
  if (mlp.layers.empty()) corrupt("empty network " + name);
  return mlp;
}

nlohmann::ordered_json noise_to_json(const NoiseState& s) {
  return {{"mu", s.mu},
          {"sigma", s.sigma},
          {"family", s.family == NoiseFamily::gaussian ? "gaussian" : "uniform"},
          {"mu_lo", s.bounds.mu_lo},
          {"mu_hi", s.bounds.mu_hi},
          {"sigma_lo", s.bounds.sigma_lo},
          {"sigma_hi", s.bounds.sigma_hi}};
}

NoiseState noise_from_json(const nlohmann::json& j) {
  NoiseState s;
  s.mu = j.at("mu").get<double>();
  s.sigma = j.at("sigma").get<double>();
  const std::string family = j.at("family").get<std::string>();
  if (family == "gaussian")
    s.family = NoiseFamily::gaussian;
  else if (family == "uniform")
    s.family = NoiseFamily::uniform;
  else
    corrupt("unknown noise family '" + family + "'");
  s.bounds.mu_lo = j.at("mu_lo").get<double>();
  s.bounds.mu_hi = j.at("mu_hi").get<double>();
  s.bounds.sigma_lo = j.at("sigma_lo").get<double>();
  s.bounds.sigma_hi = j.at("sigma_hi").get<double>();
  return s;
}

nlohmann::ordered_json featurizer_to_json(const FeaturizerConfig& f) {
  return {{"embed_dim", f.embed_dim},
          {"max_tokens", f.max_tokens},
          {"hash_seed", f.hash_seed},
          {"table_size", f.table_size}};
}

FeaturizerConfig featurizer_from_json(const nlohmann::json& j) {
  FeaturizerConfig f;
  f.embed_dim = j.at("embed_dim").get<std::size_t>();
  f.max_tokens = j.at("max_tokens").get<std::size_t>();
  f.hash_seed = j.at("hash_seed").get<std::uint64_t>();
  f.table_size = j.at("table_size").get<std::size_t>();
  return f;
}

nlohmann::ordered_json agent_config_to_json(const AgentConfig& a) {
  return {{"gamma", a.gamma},
          {"tau", a.tau},
          {"lr", a.lr},
          {"lr_decay", a.lr_decay},
          {"action_bound", a.action_bound},
          {"explore_std", a.explore_std},
          {"explore_decay", a.explore_decay},
          {"hidden", a.hidden}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig a;
  a.gamma = j.at("gamma").get<double>();
  a.tau = j.at("tau").get<double>();
  a.lr = j.at("lr").get<double>();
  a.lr_decay = j.at("lr_decay").get<double>();
  a.action_bound = j.at("action_bound").get<double>();
  a.explore_std = j.at("explore_std").get<double>();
  a.explore_decay = j.at("explore_decay").get<double>();
  a.hidden = j.at("hidden").get<std::size_t>();
  return a;
}

nlohmann::ordered_json train_config_to_json(const TrainConfig& c) {
  return {{"regime", regime_name(c.regime)},
          {"max_episode", c.max_episode},
          {"max_step", c.max_step},
          {"lambda1", c.loss_weights.lambda1},
          {"lambda2", c.loss_weights.lambda2},
          {"lambda3", c.loss_weights.lambda3},
          {"epsilon", c.epsilon},
          {"reward_max", c.reward_max},
          {"initial_noise", noise_to_json(c.initial_noise)},
          {"lr_encoder", c.lr_encoder},
          {"lr_decay", c.lr_decay},
          {"batch_budget", c.batch_budget},
          {"rl_batch", c.rl_batch},
          {"rl_warmup_factor", c.rl_warmup_factor},
          {"rl_capacity", c.rl_capacity},
          {"agent", agent_config_to_json(c.agent)},
          {"featurizer", featurizer_to_json(c.featurizer)},
          {"repr_dim", c.repr_dim},
          {"hidden", c.hidden},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.regime = regime_from_name(j.at("regime").get<std::string>());
  c.max_episode = j.at("max_episode").get<int>();
  c.max_step = j.at("max_step").get<int>();
  c.loss_weights.lambda1 = j.at("lambda1").get<double>();
  c.loss_weights.lambda2 = j.at("lambda2").get<double>();
  c.loss_weights.lambda3 = j.at("lambda3").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.reward_max = j.at("reward_max").get<double>();
  c.initial_noise = noise_from_json(j.at("initial_noise"));
  c.lr_encoder = j.at("lr_encoder").get<double>();
  c.lr_decay = j.at("lr_decay").get<double>();
  c.batch_budget = j.at("batch_budget").get<int>();
  c.rl_batch = j.at("rl_batch").get<std::size_t>();
  c.rl_warmup_factor = j.at("rl_warmup_factor").get<int>();
  c.rl_capacity = j.at("rl_capacity").get<std::size_t>();
  c.agent = agent_config_from_json(j.at("agent"));
  c.featurizer = featurizer_from_json(j.at("featurizer"));
  c.repr_dim = j.at("repr_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt,
                     const std::filesystem::path& path) {
  nlohmann::ordered_json acts;
  std::string arrays;
  std::uint32_t section_count = 1;  // meta

  emit_mlp(arrays, acts, "detector.extractor", ckpt.detector.extractor);
  emit_mlp(arrays, acts, "detector.head", ckpt.detector.head);
  section_count += static_cast<std::uint32_t>(
      2 * (ckpt.detector.extractor.layers.size() +
           ckpt.detector.head.layers.size()));
  if (ckpt.agent) {
    emit_mlp(arrays, acts, "agent.actor", ckpt.agent->actor);
    emit_mlp(arrays, acts, "agent.critic", ckpt.agent->critic);
    emit_mlp(arrays, acts, "agent.actor_target", ckpt.agent->actor_target);
    emit_mlp(arrays, acts, "agent.critic_target", ckpt.agent->critic_target);
    section_count += static_cast<std::uint32_t>(
        2 * (ckpt.agent->actor.layers.size() + ckpt.agent->critic.layers.size() +
             ckpt.agent->actor_target.layers.size() +
             ckpt.agent->critic_target.layers.size()));
  }

  const std::size_t hist = ckpt.history.size();
  const char* hist_cols[8] = {"episode", "step",    "mu",     "sigma",
                              "d_mu",    "d_sigma", "reward", "mean_loss"};
  for (int col = 0; col < 8; ++col) {
    std::vector<double> v(hist);
    for (std::size_t i = 0; i < hist; ++i) {
      const HistoryRow& r = ckpt.history[i];
      switch (col) {
        case 0: v[i] = r.episode; break;
        case 1: v[i] = r.step; break;
        case 2: v[i] = r.mu; break;
        case 3: v[i] = r.sigma; break;
        case 4: v[i] = r.d_mu; break;
        case 5: v[i] = r.d_sigma; break;
        case 6: v[i] = r.reward; break;
        case 7: v[i] = r.mean_loss; break;
      }
    }
    emit_array(arrays, std::string("history.") + hist_cols[col], {hist}, v);
  }
  section_count += 8;

  nlohmann::ordered_json meta;
  meta["format"] = "perturb-detect checkpoint";
  meta["featurizer"] = featurizer_to_json(ckpt.detector.featurizer_config);
  meta["train_config"] = train_config_to_json(ckpt.config);
  meta["final_noise"] = noise_to_json(ckpt.final_noise);
  meta["has_agent"] = ckpt.agent.has_value();
  if (ckpt.agent) meta["agent_config"] = agent_config_to_json(ckpt.agent->config);
  meta["activations"] = acts;
  meta["history_len"] = hist;
  meta["transitions_stored"] = ckpt.transitions_stored;

  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, section_count);
  emit_json(out, "meta", meta.dump());
  out += arrays;

  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw std::runtime_error("cannot open checkpoint for writing: " +
                             path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file)
    throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(file)),
                  std::istreambuf_iterator<char>());

  Reader r{buf};
  r.need(4);
  if (buf.compare(0, 4, kMagic, 4) != 0) corrupt("bad magic");
  r.pos = 4;
  const std::uint32_t version = r.get_u32();
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  const std::uint32_t section_count = r.get_u32();

  std::map<std::string, Section> sections;
  std::string meta_bytes;
  for (std::uint32_t s = 0; s < section_count; ++s) {
    const std::uint32_t name_len = r.get_u32();
    const std::string name = r.get_bytes(name_len);
    r.need(1);
    const int kind = static_cast<unsigned char>(buf[r.pos++]);
    if (kind == 1) {
      const std::uint64_t nbytes = r.get_u64();
      const std::string bytes = r.get_bytes(static_cast<std::size_t>(nbytes));
      if (name == "meta") meta_bytes = bytes;
    } else if (kind == 0) {
      Section sec;
      const std::uint32_t ndim = r.get_u32();
      std::uint64_t count = 1;
      for (std::uint32_t d = 0; d < ndim; ++d) {
        sec.dims.push_back(r.get_u64());
        count *= sec.dims.back();
      }
      if (count > buf.size() / 8 + 1) corrupt("implausible array size");
      sec.values.resize(static_cast<std::size_t>(count));
      for (double& v : sec.values) v = r.get_f64();
      sections.emplace(name, std::move(sec));
    } else {
      corrupt("unknown section kind");
    }
  }
  if (meta_bytes.empty()) corrupt("missing meta section");

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_bytes);
  } catch (const nlohmann::json::parse_error&) {
    corrupt("meta section is not valid JSON");
  }

  Checkpoint ckpt;
  try {
    const nlohmann::json& acts = meta.at("activations");
    ckpt.detector.featurizer_config = featurizer_from_json(meta.at("featurizer"));
    ckpt.detector.extractor = read_mlp(sections, acts, "detector.extractor");
    ckpt.detector.head = read_mlp(sections, acts, "detector.head");
    ckpt.config = train_config_from_json(meta.at("train_config"));
    ckpt.final_noise = noise_from_json(meta.at("final_noise"));
    ckpt.transitions_stored = meta.at("transitions_stored").get<std::uint64_t>();
    if (meta.at("has_agent").get<bool>()) {
      AgentSnapshot agent;
      agent.actor = read_mlp(sections, acts, "agent.actor");
      agent.critic = read_mlp(sections, acts, "agent.critic");
      agent.actor_target = read_mlp(sections, acts, "agent.actor_target");
      agent.critic_target = read_mlp(sections, acts, "agent.critic_target");
      agent.config = agent_config_from_json(meta.at("agent_config"));
      ckpt.agent = std::move(agent);
    }
    const auto hist = meta.at("history_len").get<std::size_t>();
    const char* hist_cols[8] = {"episode", "step",    "mu",     "sigma",
                                "d_mu",    "d_sigma", "reward", "mean_loss"};
    std::array<const std::vector<double>*, 8> cols{};
    for (int c = 0; c < 8; ++c) {
      const auto it = sections.find(std::string("history.") + hist_cols[c]);
      if (it == sections.end() || it->second.values.size() != hist)
        corrupt("missing or malformed history column");
      cols[static_cast<std::size_t>(c)] = &it->second.values;
    }
    ckpt.history.resize(hist);
    for (std::size_t i = 0; i < hist; ++i) {
      HistoryRow& row = ckpt.history[i];
      row.episode = static_cast<int>((*cols[0])[i]);
      row.step = static_cast<int>((*cols[1])[i]);
      row.mu = (*cols[2])[i];
      row.sigma = (*cols[3])[i];
      row.d_mu = (*cols[4])[i];
      row.d_sigma = (*cols[5])[i];
      row.reward = (*cols[6])[i];
      row.mean_loss = (*cols[7])[i];
    }
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("meta field error: ") + e.what());
  }
  return ckpt;
}

bool checkpoint_equal(const Checkpoint& a, const Checkpoint& b) {
  return a.detector == b.detector && a.agent == b.agent &&
         a.config == b.config && a.final_noise == b.final_noise &&
         a.history == b.history &&
         a.transitions_stored == b.transitions_stored;
}

}  // namespace pdet
