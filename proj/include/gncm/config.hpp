#pragma once

#include "gncm/gibbs.hpp"
#include "gncm/synth.hpp"

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace gncm {

using Ini = boost::property_tree::ptree;

/// Reads an INI file (top-level keys allowed). Throws IoError / ConfigError.
Ini read_ini(const std::filesystem::path& path);
void write_ini(const Ini& ini, const std::filesystem::path& path);

struct SceneConfig {
  std::uint64_t seed = 1;
  int width = 0;
  int height = 0;
  int K = 0;
  int R = 0;
  int L = 0;
  double beta = 1.5;
  int potts_sweeps = 500;
  double truncation = 0.9;
  Eigen::MatrixXd dirichlet;  // R x K
  NoiseSpec noise;
  std::string endmember_source = "synthetic";  // or "file"
  std::uint64_t library_seed = 1;
  std::string means_path;
  std::string variances_path;
};

/// Required keys: seed, scene.width, scene.height, scene.K, scene.R,
/// dirichlet.c_1 .. c_K and, for synthetic endmembers, scene.L. All missing
/// keys are reported together in one ConfigError.
SceneConfig parse_scene_config(const Ini& ini);
Ini to_ini(const SceneConfig& cfg);

struct UnmixConfig {
  SamplerConfig sampler;
  int R = 0;
  int K = 0;
  std::string library_means;
  std::string library_variances;
};

/// model.R and model.K are required; everything else has a default.
UnmixConfig parse_unmix_config(const Ini& ini);
Ini to_ini(const UnmixConfig& cfg);

/// Resolves a path given in a config file relative to the file's directory.
std::string resolve_relative(const std::string& path, const std::filesystem::path& config_file);

} // namespace gncm
