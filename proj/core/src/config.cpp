#include "cphbl/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cphbl/csv.hpp"
#include "cphbl/errors.hpp"
#include "cphbl/rng.hpp"

namespace cphbl {

using json = nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "invalid configuration:";
  for (const auto& s : v) {
    out += "\n  - ";
    out += s;
  }
  return out;
}

/// Collects type errors while walking the JSON tree so that a single parse
/// reports every problem at once.
class Reader {
 public:
  std::vector<std::string> errors;

  const json* section(const json& root, const char* key, std::initializer_list<const char*> allowed) {
    auto it = root.find(key);
    if (it == root.end()) {
      errors.push_back(std::string("missing section '") + key + "'");
      return nullptr;
    }
    if (!it->is_object()) {
      errors.push_back(std::string("section '") + key + "' must be an object");
      return nullptr;
    }
    reject_unknown(*it, key, allowed);
    return &*it;
  }

  void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* a : allowed) known = known || it.key() == a;
      if (!known) errors.push_back("unknown key '" + where + "." + it.key() + "'");
    }
  }

  const json* field(const json* obj, const char* key, const std::string& where) {
    if (obj == nullptr) return nullptr;
    auto it = obj->find(key);
    if (it == obj->end()) {
      errors.push_back("missing key '" + where + "." + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::int64_t> integer(const json* v, const std::string& name) {
    if (v == nullptr) return std::nullopt;
    if (v->is_number_integer()) return v->get<std::int64_t>();
    if (v->is_number_float()) {
      errors.push_back("'" + name + "' must be an integer (storage units), got " + v->dump());
    } else {
      errors.push_back("'" + name + "' must be an integer");
    }
    return std::nullopt;
  }

  std::optional<std::uint64_t> unsigned_integer(const json* v, const std::string& name) {
    if (v == nullptr) return std::nullopt;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    errors.push_back("'" + name + "' must be a non-negative integer, got " + v->dump());
    return std::nullopt;
  }

  std::optional<double> number(const json* v, const std::string& name) {
    if (v == nullptr) return std::nullopt;
    if (v->is_number()) return v->get<double>();
    errors.push_back("'" + name + "' must be a number");
    return std::nullopt;
  }

  std::optional<std::string> string(const json* v, const std::string& name) {
    if (v == nullptr) return std::nullopt;
    if (v->is_string()) return v->get<std::string>();
    errors.push_back("'" + name + "' must be a string");
    return std::nullopt;
  }

  /// Either a scalar broadcast to `count` entries or an array of exactly
  /// `count` entries.
  template <typename T, typename Fn>
  std::vector<T> broadcast(const json* v, std::size_t count, const std::string& name, Fn&& read_one) {
    std::vector<T> out;
    if (v == nullptr) return out;
    if (v->is_array()) {
      if (v->size() != count) {
        errors.push_back("'" + name + "' must have " + std::to_string(count) + " entries, got " +
                         std::to_string(v->size()));
        return out;
      }
      for (std::size_t i = 0; i < v->size(); ++i) {
        auto x = read_one(&(*v)[i], name + "[" + std::to_string(i) + "]");
        if (x) out.push_back(*x);
      }
      if (out.size() != count) out.clear();
      return out;
    }
    auto x = read_one(v, name);
    if (x) out.assign(count, *x);
    return out;
  }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

InvariantViolation::InvariantViolation(std::uint64_t slot, const std::string& what)
    : std::runtime_error("invariant violated at slot " + std::to_string(slot) + ": " + what), slot_(slot) {}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::cphbl: return "cphbl";
    case PolicyKind::mcucb: return "mcucb";
    case PolicyKind::lfu: return "lfu";
    case PolicyKind::lru: return "lru";
    case PolicyKind::noop: return "noop";
    case PolicyKind::oracle: return "oracle";
  }
  return "?";
}

std::string_view to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::hucb1: return "hucb1";
    case Estimator::ucbt: return "ucbt";
    case Estimator::greedy: return "greedy";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (auto k : {PolicyKind::cphbl, PolicyKind::mcucb, PolicyKind::lfu, PolicyKind::lru, PolicyKind::noop,
                 PolicyKind::oracle}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError({"unknown policy '" + std::string(name) + "' (expected cphbl, mcucb, lfu, lru, noop, oracle)"});
}

Estimator parse_estimator(std::string_view name) {
  for (auto e : {Estimator::hucb1, Estimator::ucbt, Estimator::greedy}) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError({"unknown estimator '" + std::string(name) + "' (expected hucb1, ucbt, greedy)"});
}

std::string policy_label(const PolicySpec& spec) {
  std::string label(to_string(spec.kind));
  if (spec.kind != PolicyKind::cphbl) return label;
  switch (spec.estimator) {
    case Estimator::hucb1: break;
    case Estimator::ucbt: label += "-ucbt"; break;
    case Estimator::greedy: {
      std::ostringstream os;
      os << "-greedy(" << spec.epsilon << ")";
      label += os.str();
      break;
    }
  }
  return label;
}

std::int64_t SystemConfig::catalog_size() const noexcept {
  std::int64_t total = 0;
  for (auto s : file_sizes) total += s;
  return total;
}

std::uint64_t SystemConfig::min_history() const noexcept {
  std::uint64_t lo = std::numeric_limits<std::uint64_t>::max();
  bool any = false;
  for (const auto& row : history_counts) {
    for (auto h : row) {
      lo = std::min(lo, h);
      any = true;
    }
  }
  return any ? lo : 0;
}

std::vector<std::size_t> SystemConfig::user_to_efs() const {
  std::vector<std::size_t> out(num_users, 0);
  for (std::size_t n = 0; n < efs_users.size(); ++n) {
    for (auto k : efs_users[n]) out.at(k) = n;
  }
  return out;
}

std::vector<std::size_t> SystemConfig::users_per_efs() const {
  std::vector<std::size_t> out;
  out.reserve(efs_users.size());
  for (const auto& u : efs_users) out.push_back(u.size());
  return out;
}

SystemConfig validate_config(SystemConfig cfg, std::vector<std::string>* warnings) {
  std::vector<std::string> bad;
  auto warn = [&](std::string msg) {
    if (warnings != nullptr) warnings->push_back(std::move(msg));
  };

  if (cfg.num_efs == 0) bad.emplace_back("num_efs must be positive");
  if (cfg.num_users == 0) bad.emplace_back("num_users must be positive");

  if (cfg.efs_users.size() != cfg.num_efs) {
    bad.push_back("efs_users must list " + std::to_string(cfg.num_efs) + " user sets, got " +
                  std::to_string(cfg.efs_users.size()));
  } else {
    std::vector<int> owner(cfg.num_users, -1);
    for (std::size_t n = 0; n < cfg.efs_users.size(); ++n) {
      for (auto k : cfg.efs_users[n]) {
        if (k >= cfg.num_users) {
          bad.push_back("user " + std::to_string(k) + " on EFS " + std::to_string(n) + " is out of range");
          continue;
        }
        if (owner[k] >= 0) {
          bad.push_back("user sets must be disjoint: user " + std::to_string(k) + " assigned to EFS " +
                        std::to_string(owner[k]) + " and EFS " + std::to_string(n));
          continue;
        }
        owner[k] = static_cast<int>(n);
      }
    }
    for (std::size_t k = 0; k < owner.size(); ++k) {
      if (owner[k] < 0) bad.push_back("user " + std::to_string(k) + " is not served by any EFS");
    }
    for (std::size_t n = 0; n < cfg.efs_users.size(); ++n) {
      if (cfg.efs_users[n].empty()) warn("EFS " + std::to_string(n) + " serves no users");
    }
  }

  if (cfg.file_sizes.empty()) bad.emplace_back("catalog must contain at least one file");
  for (std::size_t f = 0; f < cfg.file_sizes.size(); ++f) {
    if (cfg.file_sizes[f] < 1) {
      bad.push_back("file size of file " + std::to_string(f) + " must be an integer >= 1");
    }
  }
  const auto catalog = cfg.catalog_size();

  if (cfg.efs_capacity.size() != cfg.num_efs) {
    bad.push_back("capacity must have one entry per EFS");
  } else {
    for (std::size_t n = 0; n < cfg.efs_capacity.size(); ++n) {
      const auto m = cfg.efs_capacity[n];
      if (m < 1) bad.push_back("capacity of EFS " + std::to_string(n) + " must be an integer >= 1");
      if (m >= catalog) {
        bad.push_back("capacity must be strictly less than catalog size (EFS " + std::to_string(n) +
                      ": M_n = " + std::to_string(m) + ", sum of file sizes = " + std::to_string(catalog) + ")");
      }
      for (std::size_t f = 0; f < cfg.file_sizes.size(); ++f) {
        if (cfg.file_sizes[f] > m) {
          warn("file " + std::to_string(f) + " never fits on EFS " + std::to_string(n) +
               "; its estimate is informed by history only");
        }
      }
    }
  }

  if (!(cfg.unit_storage_cost > 0.0) || !std::isfinite(cfg.unit_storage_cost)) {
    bad.emplace_back("unit_storage_cost must be positive and finite");
  }
  if (cfg.budget.size() != cfg.num_efs) {
    bad.emplace_back("budget must have one entry per EFS");
  } else {
    for (std::size_t n = 0; n < cfg.budget.size(); ++n) {
      const double b = cfg.budget[n];
      if (!(b > 0.0) || !std::isfinite(b)) {
        bad.push_back("budget of EFS " + std::to_string(n) + " must be positive and finite");
        continue;
      }
      if (n < cfg.efs_capacity.size() &&
          b >= cfg.unit_storage_cost * static_cast<double>(cfg.efs_capacity[n])) {
        warn("budget of EFS " + std::to_string(n) + " is never binding (b_n >= alpha * M_n)");
      }
      const double scaled = std::ldexp(b, 20);
      if (scaled != std::floor(scaled)) {
        warn("budget of EFS " + std::to_string(n) +
             " has no short binary expansion; virtual-queue arithmetic is not exact");
      }
    }
  }

  if (!(cfg.v_param > 0.0) || !std::isfinite(cfg.v_param)) bad.emplace_back("v must be positive and finite");
  if (cfg.horizon < 1) bad.emplace_back("horizon must be at least 1 slot");

  if (cfg.history_counts.size() != cfg.num_efs) {
    bad.emplace_back("history_counts must have one row per EFS");
  } else {
    for (std::size_t n = 0; n < cfg.history_counts.size(); ++n) {
      if (cfg.history_counts[n].size() != cfg.file_sizes.size()) {
        bad.push_back("history_counts row " + std::to_string(n) + " must have one entry per file");
      }
    }
  }

  if (cfg.zipf_skew.size() != cfg.num_users) {
    bad.emplace_back("zipf_skew must have one entry per user");
  } else {
    for (std::size_t k = 0; k < cfg.zipf_skew.size(); ++k) {
      if (!(cfg.zipf_skew[k] >= 0.0) || !std::isfinite(cfg.zipf_skew[k])) {
        bad.push_back("zipf_skew of user " + std::to_string(k) + " must be finite and >= 0");
      }
    }
  }

  if (!(cfg.policy.epsilon >= 0.0 && cfg.policy.epsilon <= 1.0)) {
    bad.emplace_back("policy epsilon must lie in [0, 1]");
  }

  if (!bad.empty()) throw ConfigError(std::move(bad));
  return cfg;
}

SystemConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"configuration root must be an object"});

  Reader r;
  r.reject_unknown(root, "", {"schema_version", "topology", "catalog", "efs", "control", "seeds", "policy"});
  if (auto it = root.find("schema_version"); it != root.end()) {
    if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
      r.errors.push_back("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }
  }

  SystemConfig cfg;
  const json* topo = r.section(root, "topology", {"num_efs", "num_users", "efs_users"});
  const json* catalog = r.section(root, "catalog", {"file_sizes", "zipf_skew"});
  const json* efs = r.section(root, "efs", {"capacity", "budget", "history_counts"});
  const json* control = r.section(root, "control", {"unit_storage_cost", "v", "horizon"});
  const json* seeds = r.section(root, "seeds", {"demand", "history", "policy"});
  const json* policy = r.section(root, "policy", {"name", "estimator", "epsilon"});

  if (auto v = r.unsigned_integer(r.field(topo, "num_efs", "topology"), "topology.num_efs")) cfg.num_efs = *v;
  if (auto v = r.unsigned_integer(r.field(topo, "num_users", "topology"), "topology.num_users")) cfg.num_users = *v;
  if (const json* users = r.field(topo, "efs_users", "topology")) {
    if (!users->is_array()) {
      r.errors.emplace_back("'topology.efs_users' must be an array of arrays");
    } else {
      for (std::size_t n = 0; n < users->size(); ++n) {
        const json& row = (*users)[n];
        std::vector<std::size_t> ids;
        if (!row.is_array()) {
          r.errors.push_back("'topology.efs_users[" + std::to_string(n) + "]' must be an array");
        } else {
          for (std::size_t i = 0; i < row.size(); ++i) {
            if (auto k = r.unsigned_integer(&row[i], "topology.efs_users[" + std::to_string(n) + "]")) {
              ids.push_back(*k);
            }
          }
        }
        cfg.efs_users.push_back(std::move(ids));
      }
    }
  }

  if (const json* sizes = r.field(catalog, "file_sizes", "catalog")) {
    if (!sizes->is_array()) {
      r.errors.emplace_back("'catalog.file_sizes' must be an array");
    } else {
      for (std::size_t f = 0; f < sizes->size(); ++f) {
        if (auto s = r.integer(&(*sizes)[f], "catalog.file_sizes[" + std::to_string(f) + "]")) {
          cfg.file_sizes.push_back(*s);
        }
      }
    }
  }
  auto read_number = [&r](const json* v, const std::string& name) { return r.number(v, name); };
  auto read_integer = [&r](const json* v, const std::string& name) { return r.integer(v, name); };
  auto read_unsigned = [&r](const json* v, const std::string& name) { return r.unsigned_integer(v, name); };

  cfg.zipf_skew = r.broadcast<double>(r.field(catalog, "zipf_skew", "catalog"), cfg.num_users, "catalog.zipf_skew",
                                      read_number);
  cfg.efs_capacity =
      r.broadcast<std::int64_t>(r.field(efs, "capacity", "efs"), cfg.num_efs, "efs.capacity", read_integer);
  cfg.budget = r.broadcast<double>(r.field(efs, "budget", "efs"), cfg.num_efs, "efs.budget", read_number);

  if (const json* hist = r.field(efs, "history_counts", "efs")) {
    if (hist->is_array()) {
      if (hist->size() != cfg.num_efs) {
        r.errors.emplace_back("'efs.history_counts' must have one row per EFS");
      }
      for (std::size_t n = 0; n < hist->size(); ++n) {
        cfg.history_counts.push_back(r.broadcast<std::uint64_t>(
            &(*hist)[n], cfg.file_sizes.size(), "efs.history_counts[" + std::to_string(n) + "]", read_unsigned));
      }
    } else if (auto h = r.unsigned_integer(hist, "efs.history_counts")) {
      cfg.history_counts.assign(cfg.num_efs, std::vector<std::uint64_t>(cfg.file_sizes.size(), *h));
    }
  }

  if (auto v = r.number(r.field(control, "unit_storage_cost", "control"), "control.unit_storage_cost")) {
    cfg.unit_storage_cost = *v;
  }
  if (auto v = r.number(r.field(control, "v", "control"), "control.v")) cfg.v_param = *v;
  if (auto v = r.unsigned_integer(r.field(control, "horizon", "control"), "control.horizon")) cfg.horizon = *v;

  if (auto v = r.unsigned_integer(r.field(seeds, "demand", "seeds"), "seeds.demand")) cfg.seeds.demand = *v;
  if (auto v = r.unsigned_integer(r.field(seeds, "history", "seeds"), "seeds.history")) cfg.seeds.history = *v;
  if (auto v = r.unsigned_integer(r.field(seeds, "policy", "seeds"), "seeds.policy")) cfg.seeds.policy = *v;

  if (auto v = r.string(r.field(policy, "name", "policy"), "policy.name")) {
    try {
      cfg.policy.kind = parse_policy_kind(*v);
    } catch (const ConfigError& e) {
      r.errors.insert(r.errors.end(), e.violations().begin(), e.violations().end());
    }
  }
  if (policy != nullptr && policy->contains("estimator")) {
    if (auto v = r.string(&policy->at("estimator"), "policy.estimator")) {
      try {
        cfg.policy.estimator = parse_estimator(*v);
      } catch (const ConfigError& e) {
        r.errors.insert(r.errors.end(), e.violations().begin(), e.violations().end());
      }
    }
  }
  if (policy != nullptr && policy->contains("epsilon")) {
    if (auto v = r.number(&policy->at("epsilon"), "policy.epsilon")) cfg.policy.epsilon = *v;
  }

  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return cfg;
}

std::string dump_config(const SystemConfig& cfg, bool pretty) {
  json root;
  root["schema_version"] = kSchemaVersion;
  root["topology"] = {{"num_efs", cfg.num_efs}, {"num_users", cfg.num_users}, {"efs_users", cfg.efs_users}};
  root["catalog"] = {{"file_sizes", cfg.file_sizes}, {"zipf_skew", cfg.zipf_skew}};
  root["efs"] = {{"capacity", cfg.efs_capacity}, {"budget", cfg.budget}, {"history_counts", cfg.history_counts}};
  root["control"] = {{"unit_storage_cost", cfg.unit_storage_cost}, {"v", cfg.v_param}, {"horizon", cfg.horizon}};
  root["seeds"] = {{"demand", cfg.seeds.demand}, {"history", cfg.seeds.history}, {"policy", cfg.seeds.policy}};
  root["policy"] = {{"name", std::string(to_string(cfg.policy.kind))},
                    {"estimator", std::string(to_string(cfg.policy.estimator))},
                    {"epsilon", cfg.policy.epsilon}};
  return pretty ? root.dump(2) + "\n" : root.dump();
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_config(const SystemConfig& cfg, const std::filesystem::path& path) {
  csv::write_file(path, dump_config(cfg) + "\n");
}

std::uint64_t config_hash(const SystemConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump_config(cfg, false)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SystemConfig reference_config(std::uint64_t skew_seed) {
  SystemConfig cfg;
  cfg.num_efs = 4;
  cfg.num_users = 20;
  cfg.efs_users.assign(cfg.num_efs, {});
  for (std::size_t k = 0; k < cfg.num_users; ++k) cfg.efs_users[k % cfg.num_efs].push_back(k);

  // Five files of each size, interleaved so popularity rank and size are not aligned.
  cfg.file_sizes = {2, 8, 1, 4, 1, 4, 8, 2, 4, 1, 2, 8, 8, 1, 4, 2, 1, 8, 4, 2};
  cfg.efs_capacity.assign(cfg.num_efs, 16);
  cfg.unit_storage_cost = 1.0;
  cfg.budget.assign(cfg.num_efs, 8.0);
  cfg.v_param = 50.0;
  cfg.horizon = 200000;
  set_uniform_history(cfg, 1000);

  RngStream rng(skew_seed, StreamTag::skew);
  cfg.zipf_skew.resize(cfg.num_users);
  for (auto& s : cfg.zipf_skew) s = std::round((0.56 + 0.64 * rng.uniform01()) * 1000.0) / 1000.0;

  cfg.seeds = Seeds{};
  cfg.policy = PolicySpec{};
  return cfg;
}

void set_uniform_history(SystemConfig& cfg, std::uint64_t count) {
  cfg.history_counts.assign(cfg.num_efs, std::vector<std::uint64_t>(cfg.file_sizes.size(), count));
}

Seeds seeds_from_master(std::uint64_t master) {
  return Seeds{mix_seed(master, 1), mix_seed(master, 2), mix_seed(master, 3)};
}

Seeds replicate_seeds(const Seeds& base, std::uint64_t index) {
  return Seeds{mix_seed(base.demand, index), mix_seed(base.history, index), mix_seed(base.policy, index)};
}

}  // namespace cphbl
