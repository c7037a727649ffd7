#include "sgwr/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "sgwr/error.hpp"

namespace sgwr {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("config: " + key + " is not a number: " + v);
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("config: " + key + " is not an integer: " + v);
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_real(v[i]);
  }
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string fnv1a_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

ConfigValues parse_config_text(std::string_view text) {
  ConfigValues out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) throw ConfigError("config: duplicate key " + key);
  }
  return out;
}

ConfigValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::optional<std::string> default_config_path() {
  const char* env = std::getenv("SGWR_CONFIG");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return std::string(env);
}

RunConfig resolve_config(const ConfigValues& file_values, const ConfigValues& overrides) {
  ConfigValues all = file_values;
  for (const auto& [k, v] : overrides) all[k] = v;

  RunConfig rc;
  if (auto it = all.find("variant"); it != all.end()) {
    const auto v = parse_model_variant(it->second);
    if (!v) throw ConfigError("config: unknown variant " + it->second);
    rc.variant = *v;
  }
  std::size_t depth = default_config(rc.variant).context_depth;
  if (auto it = all.find("context_depth"); it != all.end()) depth = to_int<std::size_t>("context_depth", it->second);
  double alpha_total = 0.5;
  if (auto it = all.find("alpha_total"); it != all.end()) alpha_total = to_double("alpha_total", it->second);
  if (depth == 0) throw ConfigError("config: context_depth must be >= 1");
  GwrConfig& g = rc.gwr;
  g = GwrConfig::with_depth(depth, alpha_total);

  for (const auto& [key, v] : all) {
    if (key == "variant" || key == "context_depth" || key == "alpha_total") continue;
    if (key == "alpha0") g.alpha0 = to_double(key, v);
    else if (key == "alpha_k") g.alpha_k = to_list(key, v);
    else if (key == "beta") g.beta = to_double(key, v);
    else if (key == "eps_b") g.eps_b = to_double(key, v);
    else if (key == "eps_n") g.eps_n = to_double(key, v);
    else if (key == "kappa") g.kappa = to_double(key, v);
    else if (key == "tau_b") g.tau_b = to_double(key, v);
    else if (key == "tau_n") g.tau_n = to_double(key, v);
    else if (key == "activity_threshold") g.activity_threshold = to_double(key, v);
    else if (key == "habituation_threshold") g.habituation_threshold = to_double(key, v);
    else if (key == "max_edge_age") g.max_edge_age = to_int<int>(key, v);
    else if (key == "max_nodes") g.max_nodes = to_int<std::size_t>(key, v);
    else if (key == "epochs") g.epochs = to_int<int>(key, v);
    else if (key == "context_rule") {
      if (v == "previous_weight") g.context_rule = ContextRule::PreviousWeight;
      else if (v == "previous_context") g.context_rule = ContextRule::PreviousContext;
      else throw ConfigError("config: unknown context_rule " + v);
    } else if (key == "d_t_pose") rc.d_t_pose = to_double(key, v);
    else if (key == "d_t_learning") rc.d_t_learning = to_double(key, v);
    else if (key == "flag_fraction") rc.flag_fraction = to_double(key, v);
    else if (key == "cm_to_px") rc.cm_to_px = to_double(key, v);
    else if (key == "seed") rc.seed = to_int<std::uint64_t>(key, v);
    else if (key == "avatars") rc.avatars = to_int<int>(key, v);
    else if (key == "frames") rc.frames = to_int<std::size_t>(key, v);
    else if (key == "input") rc.input = v;
    else if (key == "output") rc.output = v;
    else throw ConfigError("config: unknown key " + key);
  }
  g.validate();
  if (!(rc.d_t_pose > 0.0)) throw ConfigError("config: d_t_pose must be positive");
  if (!(rc.d_t_learning > 0.0)) throw ConfigError("config: d_t_learning must be positive");
  if (!(rc.flag_fraction >= 0.0 && rc.flag_fraction < 1.0)) throw ConfigError("config: flag_fraction must be in [0,1)");
  if (!(rc.cm_to_px > 0.0)) throw ConfigError("config: cm_to_px must be positive");
  if (rc.avatars < 1) throw ConfigError("config: avatars must be >= 1");
  if (rc.frames < 10) throw ConfigError("config: frames must be >= 10");
  return rc;
}

std::string canonical_config(const RunConfig& rc) {
  const GwrConfig& g = rc.gwr;
  ConfigValues m{
      {"activity_threshold", format_real(g.activity_threshold)},
      {"alpha0", format_real(g.alpha0)},
      {"alpha_k", join(g.alpha_k)},
      {"avatars", std::to_string(rc.avatars)},
      {"beta", format_real(g.beta)},
      {"cm_to_px", format_real(rc.cm_to_px)},
      {"context_depth", std::to_string(g.context_depth)},
      {"context_rule", g.context_rule == ContextRule::PreviousWeight ? "previous_weight" : "previous_context"},
      {"d_t_learning", format_real(rc.d_t_learning)},
      {"d_t_pose", format_real(rc.d_t_pose)},
      {"epochs", std::to_string(g.epochs)},
      {"eps_b", format_real(g.eps_b)},
      {"eps_n", format_real(g.eps_n)},
      {"flag_fraction", format_real(rc.flag_fraction)},
      {"frames", std::to_string(rc.frames)},
      {"habituation_threshold", format_real(g.habituation_threshold)},
      {"kappa", format_real(g.kappa)},
      {"max_edge_age", std::to_string(g.max_edge_age)},
      {"max_nodes", std::to_string(g.max_nodes)},
      {"seed", std::to_string(rc.seed)},
      {"tau_b", format_real(g.tau_b)},
      {"tau_n", format_real(g.tau_n)},
      {"variant", std::string(model_variant_name(rc.variant))},
  };
  std::string out;
  for (const auto& [k, v] : m) out += k + "=" + v + "\n";
  return out;
}

std::string config_digest(const RunConfig& config) { return fnv1a_hex(canonical_config(config)); }

}  // namespace sgwr
