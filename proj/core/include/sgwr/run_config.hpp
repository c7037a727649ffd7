#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "sgwr/gwr.hpp"
#include "sgwr/model.hpp"

namespace sgwr {

/// Exactly the resolved run settings. Paths are carried along but are not part of the digest.
struct RunConfig {
  ModelVariant variant = ModelVariant::Subnode;
  GwrConfig gwr = GwrConfig::with_depth(1);
  double d_t_pose = 0.04;
  double d_t_learning = 0.15;
  double flag_fraction = 0.10;
  double cm_to_px = 3.0;
  std::uint64_t seed = 1;
  int avatars = 10;
  std::size_t frames = 100;
  std::string input;
  std::string output;
};

using ConfigValues = std::map<std::string, std::string>;

/// key = value lines; '#' starts a comment. Throws ConfigError on malformed lines or duplicate keys.
ConfigValues parse_config_text(std::string_view text);
ConfigValues read_config_file(const std::string& path);

/// Path from SGWR_CONFIG, if set and non-empty.
std::optional<std::string> default_config_path();

/// Applies file values, then overrides (overrides win). Unset fields keep their defaults;
/// context_depth defaults to 5 for gamma and 1 otherwise, alpha_k to alpha_total / K.
RunConfig resolve_config(const ConfigValues& file_values, const ConfigValues& overrides = {});

/// Sorted key=value text of every resolved, digest-relevant field.
std::string canonical_config(const RunConfig& config);
std::string config_digest(const RunConfig& config);

/// FNV-1a 64 as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

/// Shortest decimal text that round-trips to the same double.
std::string format_real(double v);

}  // namespace sgwr
