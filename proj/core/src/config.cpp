#include "sflab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sflab::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <class T>
T parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(std::string text) {
  text = trim(text);
  if (!text.empty() && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

agent::Architecture parse_arch(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "SAC") return agent::Architecture::kSac;
  if (t == "SUSFAS") return agent::Architecture::kStacked;
  if (t == "CUSFAS") return agent::Architecture::kCollapsed;
  throw ConfigError(key, "unknown architecture '" + t + "' (expected SAC, SUSFAS, CUSFAS)");
}

agent::AgentType parse_type(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "specialist") return agent::AgentType::kSpecialist;
  if (t == "generalist") return agent::AgentType::kGeneralist;
  throw ConfigError(key, "unknown agent type '" + text + "' (expected specialist, generalist)");
}

struct Entry {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SFLAB_INT_ENTRY(KEY, FIELD, MIN)                                                       \
  Entry {                                                                                      \
    KEY,                                                                                       \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {                  \
          using T = std::remove_reference_t<decltype(c.FIELD)>;                                \
          const T x = parse_integer<T>(k, v);                                                  \
          if (static_cast<long double>(x) < (MIN)) throw ConfigError(k, "must be at least " #MIN); \
          c.FIELD = x;                                                                         \
        },                                                                                     \
        [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }                      \
  }

#define SFLAB_REAL_ENTRY(KEY, FIELD, LO, HI)                                                   \
  Entry {                                                                                      \
    KEY,                                                                                       \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) {                  \
          const double x = parse_real(k, v);                                                   \
          if (!(x >= (LO) && x <= (HI))) throw ConfigError(k, "must lie in [" #LO ", " #HI "]"); \
          c.FIELD = x;                                                                         \
        },                                                                                     \
        [](const ExperimentConfig& c) { return format_double(c.FIELD); }                       \
  }

#define SFLAB_BOOL_ENTRY(KEY, FIELD)                                                                   \
  Entry {                                                                                              \
    KEY, [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.FIELD = parse_bool(k, v); }, \
        [](const ExperimentConfig& c) { return bool_str(c.FIELD); }                                    \
  }

constexpr double kHuge = 1e300;

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back({"experiment.name", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.name = trim(v); },
                 [](const ExperimentConfig& c) { return c.name; }});
    e.push_back({"env.id",
                 [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                   const std::string t = trim(v);
                   if (t != "lander" && t != "inspection") {
                     throw ConfigError(k, "unknown environment '" + t + "' (expected lander, inspection)");
                   }
                   c.env.id = t;
                 },
                 [](const ExperimentConfig& c) { return c.env.id; }});
    e.push_back({"env.preset",
                 [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                   const std::string t = trim(v);
                   if (t != "default" && t != "small") throw ConfigError(k, "unknown preset '" + t + "'");
                   c.env.preset = t;
                 },
                 [](const ExperimentConfig& c) { return c.env.preset; }});
    e.push_back({"env.rta",
                 [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                   try {
                     c.env.rta = env::parse_rta_mode(trim(v));
                   } catch (const Error& err) {
                     throw ConfigError(k, err.what());
                   }
                 },
                 [](const ExperimentConfig& c) { return env::to_string(c.env.rta); }});
    e.push_back(SFLAB_INT_ENTRY("env.max_steps", env.max_steps, 0));

    e.push_back({"agent.arch",
                 [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                   c.agent.architecture = parse_arch(k, v);
                 },
                 [](const ExperimentConfig& c) { return agent::to_string(c.agent.architecture); }});
    e.push_back({"agent.type",
                 [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.agent.type = parse_type(k, v); },
                 [](const ExperimentConfig& c) { return agent::to_string(c.agent.type); }});
    e.push_back({"agent.weight_range",
                 [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                   const auto parts = split_list(v);
                   if (parts.size() != 2) throw ConfigError(k, "expected two numbers 'low, high'");
                   const double lo = parse_real(k, parts[0]);
                   const double hi = parse_real(k, parts[1]);
                   if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) throw ConfigError(k, "need 0 <= low <= high <= 1");
                   if (hi <= 0.0) throw ConfigError(k, "high must be positive");
                   c.weight_low = lo;
                   c.weight_high = hi;
                 },
                 [](const ExperimentConfig& c) {
                   return "[" + format_double(c.weight_low) + ", " + format_double(c.weight_high) + "]";
                 }});
    e.push_back(SFLAB_INT_ENTRY("agent.hidden_units", agent.hidden_units, 1));
    e.push_back(SFLAB_INT_ENTRY("agent.hidden_layers", agent.hidden_layers, 1));
    e.push_back(SFLAB_INT_ENTRY("agent.encoder_units", agent.encoder_units, 1));
    e.push_back(SFLAB_INT_ENTRY("agent.encoder_layers", agent.encoder_layers, 1));
    e.push_back(SFLAB_INT_ENTRY("agent.output_layers", agent.output_layers, 0));
    e.push_back(SFLAB_INT_ENTRY("agent.n_z", n_z, -1));
    e.push_back(SFLAB_REAL_ENTRY("agent.z_stddev", z_stddev, 0.0, kHuge));
    e.push_back(SFLAB_BOOL_ENTRY("agent.actor_q_on_true_task", agent.actor_q_on_true_task));
    e.push_back(SFLAB_REAL_ENTRY("agent.init_temperature", agent.initial_temperature, 0.0, kHuge));
    e.push_back(SFLAB_BOOL_ENTRY("agent.learn_temperature", agent.learn_temperature));

    e.push_back(SFLAB_REAL_ENTRY("train.lr", agent.learning_rate, 0.0, kHuge));
    e.push_back(SFLAB_REAL_ENTRY("train.gamma", agent.gamma, 0.0, 0.999999999));
    e.push_back(SFLAB_REAL_ENTRY("train.polyak", agent.polyak, 0.0, 1.0));
    e.push_back(SFLAB_INT_ENTRY("train.target_update_interval", agent.target_update_interval, 1));
    e.push_back(SFLAB_INT_ENTRY("train.gradient_steps", agent.gradient_steps, 0));
    e.push_back(SFLAB_INT_ENTRY("train.buffer_size", train.buffer_size, 1));
    e.push_back(SFLAB_INT_ENTRY("train.batch_size", train.batch_size, 1));
    e.push_back(SFLAB_INT_ENTRY("train.warmup_steps", train.warmup_steps, 0));
    e.push_back(SFLAB_INT_ENTRY("train.total_steps", train.total_steps, 0));
    e.push_back(SFLAB_INT_ENTRY("train.eval_interval", train.eval_interval, 1));
    e.push_back(SFLAB_INT_ENTRY("train.eval_episodes", train.eval_episodes, 1));
    e.push_back({"train.seeds",
                 [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                   std::vector<int> seeds;
                   for (const auto& p : split_list(v)) {
                     const int s = parse_integer<int>(k, p);
                     if (s < 0) throw ConfigError(k, "seeds must be non-negative");
                     if (std::find(seeds.begin(), seeds.end(), s) != seeds.end()) {
                       throw ConfigError(k, "duplicate seed " + std::to_string(s));
                     }
                     seeds.push_back(s);
                   }
                   if (seeds.empty()) throw ConfigError(k, "need at least one seed");
                   c.train.seeds = seeds;
                 },
                 [](const ExperimentConfig& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.train.seeds.size(); ++i) {
                     out += (i ? ", " : "") + std::to_string(c.train.seeds[i]);
                   }
                   return out;
                 }});
    e.push_back(SFLAB_INT_ENTRY("train.root_seed", train.root_seed, 0));
    e.push_back(SFLAB_INT_ENTRY("train.loss_log_interval", train.loss_log_interval, 1));
    e.push_back(SFLAB_BOOL_ENTRY("train.checkpoints", train.checkpoints));
    e.push_back(SFLAB_INT_ENTRY("train.jobs", train.jobs, 1));
    e.push_back(SFLAB_BOOL_ENTRY("train.traces", train.traces));
    return e;
  }();
  return entries;
}

const Entry& find_entry(const std::string& key) {
  for (const Entry& e : registry()) {
    if (e.key == key) return e;
  }
  throw ConfigError(key, "unknown configuration key");
}

std::string compact(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

std::string ExperimentConfig::label() const {
  if (!name.empty()) return name;
  std::string base;
  switch (agent.architecture) {
    case agent::Architecture::kSac:
      base = "SAC";
      break;
    case agent::Architecture::kStacked:
      base = "SUSFA";
      break;
    case agent::Architecture::kCollapsed:
      base = "CUSFA";
      break;
  }
  if (env.rta != env::RtaMode::kOff) base += agent.architecture == agent::Architecture::kSac ? "-S" : "S";
  if (env.rta == env::RtaMode::kOnWithoutPenalty) base += " w/o R";
  if (agent.type == agent::AgentType::kSpecialist) return base + " Specialist";
  return base + " Gen[" + compact(weight_low) + "," + compact(weight_high) + "]";
}

int ExperimentConfig::resolved_n_z() const {
  if (n_z >= 0) return n_z;
  return agent.type == agent::AgentType::kGeneralist ? 2 : 0;
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string k = lower(trim(key));
  find_entry(k).set(cfg, k, value);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("", "override '" + assignment + "' is not of the form key=value");
  apply_override(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", "line " + std::to_string(line_no) + ": malformed section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = lower(trim(line.substr(0, eq)));
    if (key.find('.') == std::string::npos) {
      if (section.empty()) throw ConfigError(key, "key outside any [section]");
      key = section + "." + key;
    }
    apply_override(base, key, trim(line.substr(eq + 1)));
  }
  return base;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.env.id == "lander" && cfg.env.preset != "default") {
    throw ConfigError("env.preset", "lander only has the default preset");
  }
  if (cfg.train.total_steps > 0 && cfg.train.eval_interval > cfg.train.total_steps) {
    throw ConfigError("train.eval_interval", "exceeds train.total_steps");
  }
  if (static_cast<std::size_t>(cfg.train.batch_size) > cfg.train.buffer_size) {
    throw ConfigError("train.batch_size", "exceeds train.buffer_size");
  }
  if (cfg.agent.learn_temperature && cfg.agent.initial_temperature <= 0.0) {
    throw ConfigError("agent.init_temperature", "must be positive when the temperature is learned");
  }
  if (cfg.train.seeds.empty()) throw ConfigError("train.seeds", "need at least one seed");
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides,
                             const std::vector<std::pair<std::string, std::string>>& env_overrides) {
  ExperimentConfig cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("", "cannot read config file " + path->string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    cfg = parse_config(buffer.str(), cfg);
  }
  for (const auto& [key, value] : env_overrides) apply_override(cfg, key, value);
  for (const auto& o : overrides) apply_override(cfg, o);
  validate(cfg);
  return cfg;
}

std::string snapshot(const ExperimentConfig& cfg) {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  std::vector<std::string> order;
  for (const Entry& e : registry()) {
    const auto dot = e.key.find('.');
    const std::string section = e.key.substr(0, dot);
    if (!sections.count(section)) order.push_back(section);
    sections[section].emplace_back(e.key.substr(dot + 1), e.get(cfg));
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) os << '\n';
    os << '[' << order[i] << "]\n";
    for (const auto& [key, value] : sections[order[i]]) os << key << " = " << value << '\n';
  }
  return os.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Entry& e : registry()) keys.push_back(e.key);
  return keys;
}

std::vector<std::pair<std::string, std::string>> env_overrides_from(char** envp) {
  std::vector<std::pair<std::string, std::string>> out;
  const std::string prefix = kEnvPrefix;
  for (char** p = envp; p && *p; ++p) {
    const std::string entry = *p;
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = lower(entry.substr(prefix.size(), eq - prefix.size()));
    std::string key;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (name.compare(i, 2, "__") == 0) {
        key += '.';
        ++i;
      } else {
        key += name[i];
      }
    }
    out.emplace_back(key, entry.substr(eq + 1));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sflab::harness
