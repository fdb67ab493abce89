#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stitch/pipeline.hpp"

namespace stitch {

/// Parses and validates the JSON configuration document. Schema errors throw
/// ConfigError whose message names the offending field path (e.g.
/// "cameras[0].fx"). Rotation accepts a row-major 9-element matrix or
/// [yaw, pitch, roll] in degrees (composed Z*Y*X).
StitchConfig parse_config(const std::string& text);

/// Canonical JSON dump of a config (defaults filled in).
std::string serialize_config(const StitchConfig& config);

/// Stable 16-hex-digit FNV-1a hash of the canonical config dump.
std::string config_hash(const StitchConfig& config);

/// Validated CLI invocation: paths must exist, views in {2, 3}.
struct RunManifest {
  std::filesystem::path config_path;
  std::vector<std::filesystem::path> input_dirs;
  std::filesystem::path output_dir;
  std::string subcommand;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

}  // namespace stitch
