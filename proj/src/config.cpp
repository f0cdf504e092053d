#include "rkan/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "rkan/error.hpp"
#include "rkan/experiments.hpp"
#include "rkan/mapping.hpp"

namespace rkan {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct RawValue {
  std::string text;
  int line = 0;
};

using RawMap = std::map<std::string, RawValue>;

const std::map<std::string, std::vector<std::string>>& schema() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"experiment", {"experiment", "target", "w", "normalize_inputs"}},
      {"network", {"layer", "mode", "K", "p", "mapping", "squash", "architecture"}},
      {"optimizer", {"optimizer", "epochs", "learning_rate"}},
      {"output", {"seeds", "out"}},
  };
  return s;
}

long parse_long(const std::string& s, int line) {
  size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (...) {
    throw ConfigError("malformed integer \"" + s + "\"", line);
  }
  if (pos != s.size()) throw ConfigError("malformed integer \"" + s + "\"", line);
  return v;
}

std::uint64_t parse_u64(const std::string& s, int line) {
  if (!s.empty() && s[0] == '-')
    throw ConfigError("seed must be non-negative: \"" + s + "\"", line);
  size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (...) {
    throw ConfigError("malformed integer \"" + s + "\"", line);
  }
  if (pos != s.size()) throw ConfigError("malformed integer \"" + s + "\"", line);
  return v;
}

double parse_double(const std::string& s, int line) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    throw ConfigError("malformed number \"" + s + "\"", line);
  }
  if (pos != s.size()) throw ConfigError("malformed number \"" + s + "\"", line);
  return v;
}

std::vector<std::string> split_list(const std::string& s, int line) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list item in \"" + s + "\"", line);
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty list", line);
  return out;
}

class Lookup {
 public:
  explicit Lookup(const RawMap& kv) : kv_(kv) {}

  const RawValue* find(const std::string& key) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? nullptr : &it->second;
  }
  std::string str(const std::string& key, const std::string& dflt) const {
    const RawValue* r = find(key);
    return r ? r->text : dflt;
  }
  std::string pick(const std::string& key, const std::vector<std::string>& allowed,
                   const std::string& dflt) const {
    const RawValue* r = find(key);
    if (!r) return dflt;
    if (std::find(allowed.begin(), allowed.end(), r->text) == allowed.end()) {
      std::string opts;
      for (const std::string& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
      throw ConfigError("invalid value \"" + r->text + "\" for " + key +
                            " (expected one of: " + opts + ")",
                        r->line);
    }
    return r->text;
  }
  long integer(const std::string& key, long dflt, long lo, long hi) const {
    const RawValue* r = find(key);
    if (!r) return dflt;
    const long v = parse_long(r->text, r->line);
    if (v < lo || v > hi)
      throw ConfigError(key + " = " + r->text + " out of range [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "]",
                        r->line);
    return v;
  }
  double number(const std::string& key, double dflt) const {
    const RawValue* r = find(key);
    return r ? parse_double(r->text, r->line) : dflt;
  }
  bool boolean(const std::string& key, bool dflt) const {
    const RawValue* r = find(key);
    if (!r) return dflt;
    if (r->text == "true") return true;
    if (r->text == "false") return false;
    throw ConfigError(key + " must be true or false", r->line);
  }

 private:
  const RawMap& kv_;
};

ExperimentConfig resolve(const RawMap& kv) {
  Lookup at(kv);
  ExperimentConfig cfg;

  cfg.experiment = at.pick("experiment.experiment",
                           {"regression", "lane-emden", "elliptic-pde", "gradcheck"},
                           "regression");
  cfg.target = at.pick("experiment.target", {"F1", "F2", "F3"}, "F2");
  cfg.w = int(at.integer("experiment.w", 0, 0, 4));
  const bool physics =
      cfg.experiment == "lane-emden" || cfg.experiment == "elliptic-pde";
  cfg.normalize_inputs = at.boolean("experiment.normalize_inputs", physics);

  cfg.layer = at.pick("network.layer",
                      {"jacobi-rkan", "pade-rkan", "fjacobi-rkan", "fpade-rkan"},
                      "jacobi-rkan");
  cfg.mode = at.pick("network.mode", {"activation-mlp", "kan"}, "activation-mlp");
  long k_dflt = 2;
  if (cfg.experiment == "lane-emden") k_dflt = 6;
  if (cfg.experiment == "elliptic-pde") k_dflt = 4;
  cfg.K = int(at.integer("network.K", k_dflt, 0, 64));
  cfg.p = int(at.integer("network.p", 2, 0, 64));

  const bool pade = cfg.layer == "pade-rkan" || cfg.layer == "fpade-rkan";
  const bool fractional = cfg.layer == "fjacobi-rkan" || cfg.layer == "fpade-rkan";
  if (const RawValue* m = at.find("network.mapping")) {
    if (pade)
      throw ConfigError("layer " + cfg.layer + " applies no rational mapping", m->line);
    at.pick("network.mapping",
            {"finite", "semi-log", "semi-alg", "semi-exp", "inf-log", "inf-alg",
             "fractional", "identity"},
            "inf-alg");
    if (fractional && m->text != "fractional")
      throw ConfigError("fjacobi-rkan always uses the fractional mapping", m->line);
    if (!fractional && m->text == "fractional")
      throw ConfigError("use layer = fjacobi-rkan for the fractional mapping", m->line);
    cfg.mapping = m->text;
  } else {
    cfg.mapping = pade ? "none" : (fractional ? "fractional" : "inf-alg");
  }

  std::string squash_dflt = "identity";
  if (pade) squash_dflt = "tanh";
  if (fractional) squash_dflt = "sigmoid";
  cfg.squash = at.pick("network.squash", {"identity", "tanh", "sigmoid"}, squash_dflt);
  if (const RawValue* s = at.find("network.squash")) {
    if (pade && cfg.squash == "identity")
      throw ConfigError("pade layers need a bounded squash (tanh or sigmoid)", s->line);
    if (fractional && cfg.squash != "sigmoid")
      throw ConfigError("fractional layers need the sigmoid squash", s->line);
  }

  if (const RawValue* a = at.find("network.architecture")) {
    cfg.architecture.clear();
    for (const std::string& item : split_list(a->text, a->line)) {
      const long d = parse_long(item, a->line);
      if (d <= 0) throw ConfigError("architecture entries must be positive", a->line);
      cfg.architecture.push_back(d);
    }
    if (cfg.architecture.size() < 2)
      throw ConfigError("architecture needs at least 2 entries", a->line);
  } else if (cfg.experiment == "elliptic-pde") {
    cfg.architecture = {2, 10, 10, 1};
  }

  cfg.optimizer = at.pick("optimizer.optimizer", {"lbfgs", "adam"}, "lbfgs");
  long e_dflt = 50;
  if (cfg.experiment == "lane-emden") e_dflt = 2000;
  if (cfg.experiment == "elliptic-pde") e_dflt = 500;
  cfg.epochs = int(at.integer("optimizer.epochs", e_dflt, 0, 1000000));
  cfg.learning_rate = at.number("optimizer.learning_rate", 0.001);
  if (const RawValue* lr = at.find("optimizer.learning_rate")) {
    if (!(cfg.learning_rate > 0.0))
      throw ConfigError("learning_rate must be positive", lr->line);
  }

  if (const RawValue* s = at.find("output.seeds")) {
    cfg.seeds.clear();
    for (const std::string& item : split_list(s->text, s->line))
      cfg.seeds.push_back(parse_u64(item, s->line));
  } else if (cfg.experiment == "lane-emden") {
    cfg.seeds = {1, 2, 3};
  } else if (cfg.experiment == "elliptic-pde" || cfg.experiment == "gradcheck") {
    cfg.seeds = {1};
  }
  cfg.out = at.str("output.out", "results.csv");
  return cfg;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  RawMap kv;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header \"" + line + "\"", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section))
        throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value, got \"" + line + "\"", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (value.empty()) throw ConfigError("empty value for \"" + key + "\"", line_no);
    if (section.empty())
      throw ConfigError("key \"" + key + "\" appears before any section", line_no);
    const auto& keys = schema().at(section);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown key \"" + key + "\" in [" + section + "]", line_no);
    const std::string full = section + "." + key;
    if (kv.count(full)) throw ConfigError("duplicate key \"" + key + "\"", line_no);
    kv[full] = {value, line_no};
  }
  try {
    return resolve(kv);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), 0);
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_canonical(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "experiment=" << cfg.experiment << "\n";
  out << "target=" << cfg.target << "\n";
  out << "w=" << cfg.w << "\n";
  out << "normalize_inputs=" << (cfg.normalize_inputs ? "true" : "false") << "\n";
  out << "layer=" << cfg.layer << "\n";
  out << "mode=" << cfg.mode << "\n";
  out << "K=" << cfg.K << "\n";
  out << "p=" << cfg.p << "\n";
  out << "mapping=" << cfg.mapping << "\n";
  out << "squash=" << cfg.squash << "\n";
  out << "architecture=";
  for (size_t i = 0; i < cfg.architecture.size(); ++i)
    out << (i ? "," : "") << cfg.architecture[i];
  out << "\n";
  out << "optimizer=" << cfg.optimizer << "\n";
  out << "epochs=" << cfg.epochs << "\n";
  char lr[64];
  std::snprintf(lr, sizeof lr, "%.17g", cfg.learning_rate);
  out << "learning_rate=" << lr << "\n";
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a64(config_canonical(cfg));
}

Network build_network(const ExperimentConfig& cfg) {
  std::vector<std::unique_ptr<Layer>> layers;
  if (cfg.normalize_inputs) {
    if (cfg.experiment == "lane-emden")
      layers.push_back(std::make_unique<AffineInput>(1.0 / 7.5, -1.0));
    else if (cfg.experiment == "elliptic-pde")
      layers.push_back(std::make_unique<AffineInput>(2.0, -1.0));
    else
      layers.push_back(std::make_unique<AffineInput>(0.1, 0.0));
  }
  const bool pade = cfg.layer == "pade-rkan" || cfg.layer == "fpade-rkan";
  const bool fractional = cfg.layer == "fjacobi-rkan" || cfg.layer == "fpade-rkan";
  const Squash sq = squash_parse(cfg.squash);
  MappingSpec ms;
  if (!pade) ms.kind = mapkind_parse(cfg.mapping);

  const std::vector<long>& a = cfg.architecture;
  if (cfg.mode == "kan") {
    for (size_t i = 0; i + 1 < a.size(); ++i) {
      if (pade)
        layers.push_back(std::make_unique<PadeRKanLayer>(a[i], a[i + 1], cfg.K,
                                                         cfg.p, fractional, sq));
      else
        layers.push_back(
            std::make_unique<JacobiRKanLayer>(a[i], a[i + 1], cfg.K, ms, sq));
    }
  } else {
    for (size_t i = 0; i + 1 < a.size(); ++i) {
      layers.push_back(std::make_unique<DenseLayer>(a[i], a[i + 1]));
      if (i + 2 < a.size()) {
        if (pade)
          layers.push_back(std::make_unique<PadeActivation>(cfg.K, cfg.p, fractional, sq));
        else
          layers.push_back(std::make_unique<JacobiActivation>(cfg.K, ms, sq));
      }
    }
  }
  return Network(std::move(layers));
}

}  // namespace rkan
