#include "gncm/config.hpp"

#include "gncm/error.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <fstream>
#include <sstream>
#include <vector>

namespace gncm {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

class Reader {
public:
  explicit Reader(const Ini& ini) : ini_(ini) {}

  template <class T>
  T required(const std::string& key, T fallback = T{}) {
    const auto v = ini_.get_optional<std::string>(key);
    if (!v) {
      missing_.push_back(key);
      return fallback;
    }
    return convert<T>(key, *v);
  }

  template <class T>
  T optional(const std::string& key, T fallback) {
    const auto v = ini_.get_optional<std::string>(key);
    return v ? convert<T>(key, *v) : fallback;
  }

  void check() const {
    if (missing_.empty()) return;
    std::string msg = missing_.size() == 1 ? "missing required key: " : "missing required keys: ";
    for (std::size_t i = 0; i < missing_.size(); ++i) msg += (i ? ", " : "") + missing_[i];
    throw ConfigError(msg);
  }

private:
  template <class T>
  static T convert(const std::string& key, const std::string& text) {
    if constexpr (std::is_same_v<T, std::string>) {
      return text;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
      if (text == "false" || text == "0" || text == "no" || text == "off") return false;
      throw ConfigError("key " + key + ": expected a boolean, got '" + text + "'");
    } else {
      std::istringstream in(text);
      T value{};
      in >> value;
      if (in.fail() || !(in >> std::ws).eof())
        throw ConfigError("key " + key + ": cannot parse '" + text + "'");
      return value;
    }
  }

  const Ini& ini_;
  std::vector<std::string> missing_;
};

Eigen::VectorXd parse_vector(const std::string& key, const std::string& text) {
  std::string cleaned = text;
  for (char& ch : cleaned)
    if (ch == ',' || ch == '[' || ch == ']') ch = ' ';
  std::istringstream in(cleaned);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw ConfigError("key " + key + ": cannot parse number list '" + text + "'");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string join(const Eigen::VectorXd& v) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
  return out.str();
}

template <class T>
std::string str(T v) {
  std::ostringstream out;
  out.precision(17);
  out << std::boolalpha << v;
  return out.str();
}

constexpr const char* kBlockKeys[kBlockCount] = {"abundances", "means", "variances", "noise", "dirichlet"};

} // namespace

Ini read_ini(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  Ini ini;
  try {
    pt::read_ini(in, ini);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return ini;
}

void write_ini(const Ini& ini, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  pt::write_ini(out, ini);
  if (!out) throw IoError("write failed: " + path.string());
}

std::string resolve_relative(const std::string& path, const fs::path& config_file) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (config_file.parent_path() / path).string();
}

SceneConfig parse_scene_config(const Ini& ini) {
  Reader rd(ini);
  SceneConfig c;
  c.seed = rd.required<std::uint64_t>("seed");
  c.width = rd.required<int>("scene.width");
  c.height = rd.required<int>("scene.height");
  c.K = rd.required<int>("scene.K");
  c.R = rd.required<int>("scene.R");
  c.beta = rd.optional<double>("scene.beta", 1.5);
  c.potts_sweeps = rd.optional<int>("scene.potts_sweeps", 500);
  c.truncation = rd.optional<double>("scene.truncation", 0.9);
  c.endmember_source = rd.optional<std::string>("endmembers.source", "synthetic");
  c.library_seed = rd.optional<std::uint64_t>("endmembers.seed", c.seed);
  if (c.endmember_source == "synthetic") {
    c.L = rd.required<int>("scene.L");
  } else if (c.endmember_source == "file") {
    c.L = rd.optional<int>("scene.L", 0);
    c.means_path = rd.required<std::string>("endmembers.means");
    c.variances_path = rd.optional<std::string>("endmembers.variances", "");
  } else {
    throw ConfigError("endmembers.source must be 'synthetic' or 'file', got '" + c.endmember_source + "'");
  }
  c.noise.kind = parse_noise_kind(rd.optional<std::string>("noise.kind", "constant"));
  c.noise.psi2 = rd.optional<double>("noise.psi2", 1e-7);

  std::vector<Eigen::VectorXd> columns;
  for (int k = 1; k <= std::max(c.K, 0); ++k) {
    const std::string key = "dirichlet.c_" + std::to_string(k);
    const auto text = rd.required<std::string>(key);
    if (!text.empty()) columns.push_back(parse_vector(key, text));
  }
  rd.check();

  if (c.width < 1 || c.height < 1) throw ConfigError("scene.width and scene.height must be positive");
  if (c.K < 1) throw ConfigError("scene.K must be at least 1");
  if (c.R < 2) throw ConfigError("scene.R must be at least 2");
  if (c.endmember_source == "synthetic" && c.L < 2) throw ConfigError("scene.L must be at least 2");
  if (c.potts_sweeps < 1) throw ConfigError("scene.potts_sweeps must be at least 1");
  if (!(c.truncation > 1.0 / c.R)) throw ConfigError("scene.truncation must exceed 1/R");
  if (c.beta < 0) throw ConfigError("scene.beta must be nonnegative");
  if (c.noise.psi2 < 0) throw ConfigError("noise.psi2 must be nonnegative");
  c.dirichlet.resize(c.R, c.K);
  for (int k = 0; k < c.K; ++k) {
    if (columns[k].size() != c.R)
      throw ConfigError("dirichlet.c_" + std::to_string(k + 1) + " must list R = " + std::to_string(c.R) + " values");
    if ((columns[k].array() <= 0.0).any())
      throw ConfigError("dirichlet.c_" + std::to_string(k + 1) + " must be positive");
    c.dirichlet.col(k) = columns[k];
  }
  return c;
}

Ini to_ini(const SceneConfig& c) {
  Ini ini;
  ini.put("seed", str(c.seed));
  ini.put("scene.width", str(c.width));
  ini.put("scene.height", str(c.height));
  ini.put("scene.K", str(c.K));
  ini.put("scene.R", str(c.R));
  ini.put("scene.L", str(c.L));
  ini.put("scene.beta", str(c.beta));
  ini.put("scene.potts_sweeps", str(c.potts_sweeps));
  ini.put("scene.truncation", str(c.truncation));
  for (int k = 0; k < c.dirichlet.cols(); ++k)
    ini.put("dirichlet.c_" + std::to_string(k + 1), join(c.dirichlet.col(k)));
  ini.put("noise.kind", to_string(c.noise.kind));
  ini.put("noise.psi2", str(c.noise.psi2));
  ini.put("endmembers.source", c.endmember_source);
  ini.put("endmembers.seed", str(c.library_seed));
  if (c.endmember_source == "file") {
    ini.put("endmembers.means", c.means_path);
    if (!c.variances_path.empty()) ini.put("endmembers.variances", c.variances_path);
  }
  return ini;
}

UnmixConfig parse_unmix_config(const Ini& ini) {
  Reader rd(ini);
  UnmixConfig c;
  SamplerConfig& s = c.sampler;
  s.seed = rd.optional<std::uint64_t>("seed", 1);
  c.R = rd.required<int>("model.R");
  c.K = rd.required<int>("model.K");
  s.hyper.beta = rd.optional<double>("model.beta", s.hyper.beta);
  s.hyper.lambda = rd.optional<double>("model.lambda", s.hyper.lambda);
  s.hyper.alpha = rd.optional<double>("model.alpha", s.hyper.alpha);
  s.hyper.gamma = rd.optional<double>("model.gamma", s.hyper.gamma);
  s.hyper.epsilon2 = rd.optional<double>("model.epsilon2", s.hyper.epsilon2);
  s.fix_noise_zero = rd.optional<bool>("model.fix_noise_zero", false);
  c.library_means = rd.optional<std::string>("model.library", "");
  c.library_variances = rd.optional<std::string>("model.library_variances", "");
  s.n_total = rd.optional<long>("sampler.iterations", s.n_total);
  s.n_burn_in = rd.optional<long>("sampler.burn_in", s.n_burn_in);
  s.thinning = rd.optional<int>("sampler.thinning", s.thinning);
  s.threads = rd.optional<int>("sampler.threads", s.threads);
  s.proposals_per_sweep = rd.optional<int>("sampler.proposals_per_sweep", s.proposals_per_sweep);
  s.search_initial_step = rd.optional<bool>("sampler.search_initial_step", s.search_initial_step);
  for (int b = 0; b < kBlockCount; ++b) {
    ChmcConfig& ch = s.chmc[b];
    const std::string block = kBlockKeys[b];
    ch.n_leapfrog = rd.optional<int>("chmc.n_leapfrog", ch.n_leapfrog);
    ch.jitter = rd.optional<double>("chmc.jitter", ch.jitter);
    ch.target_accept = rd.optional<double>("chmc.target_accept", ch.target_accept);
    ch.adapt = rd.optional<bool>("chmc.adapt", ch.adapt);
    ch.step_size = rd.optional<double>("chmc.step_" + block, ch.step_size);
  }
  rd.check();
  s.hyper.R = c.R;
  s.hyper.K = c.K;
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

Ini to_ini(const UnmixConfig& c) {
  const SamplerConfig& s = c.sampler;
  Ini ini;
  ini.put("seed", str(s.seed));
  ini.put("model.R", str(c.R));
  ini.put("model.K", str(c.K));
  ini.put("model.beta", str(s.hyper.beta));
  ini.put("model.lambda", str(s.hyper.lambda));
  ini.put("model.alpha", str(s.hyper.alpha));
  ini.put("model.gamma", str(s.hyper.gamma));
  ini.put("model.epsilon2", str(s.hyper.epsilon2));
  ini.put("model.fix_noise_zero", str(s.fix_noise_zero));
  if (!c.library_means.empty()) ini.put("model.library", c.library_means);
  if (!c.library_variances.empty()) ini.put("model.library_variances", c.library_variances);
  ini.put("sampler.iterations", str(s.n_total));
  ini.put("sampler.burn_in", str(s.n_burn_in));
  ini.put("sampler.thinning", str(s.thinning));
  ini.put("sampler.threads", str(s.threads));
  ini.put("sampler.proposals_per_sweep", str(s.proposals_per_sweep));
  ini.put("sampler.search_initial_step", str(s.search_initial_step));
  const ChmcConfig& first = s.chmc[0];
  ini.put("chmc.n_leapfrog", str(first.n_leapfrog));
  ini.put("chmc.jitter", str(first.jitter));
  ini.put("chmc.target_accept", str(first.target_accept));
  ini.put("chmc.adapt", str(first.adapt));
  for (int b = 0; b < kBlockCount; ++b) ini.put(std::string("chmc.step_") + kBlockKeys[b], str(s.chmc[b].step_size));
  return ini;
}

} // namespace gncm
