// gncm: generate synthetic scenes, unmix cubes, evaluate estimates.

#include "gncm/config.hpp"
#include "gncm/error.hpp"
#include "gncm/gibbs.hpp"
#include "gncm/hsi_data.hpp"
#include "gncm/metrics.hpp"
#include "gncm/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace gncm;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

ResultBundle truth_bundle(const Scene& scene, std::uint64_t seed) {
  ResultBundle b;
  b.width = scene.cube.width;
  b.height = scene.cube.height;
  b.abundance_maps = scene.truth.abundances();
  b.label_map = scene.truth.z;
  b.noise_variance_map = scene.truth.Psi;
  b.endmember_means = scene.truth.M;
  b.endmember_variances = scene.truth.Sigma;
  b.dirichlet_params = scene.truth.C;
  b.chain_meta.seed = seed;
  return b;
}

struct GenerateArgs {
  std::string config;
  std::string out;
  std::string format = "csv";
  int threads = 1;
};

int cmd_generate(const GenerateArgs& args) {
  const fs::path config_path(args.config);
  const SceneConfig cfg = parse_scene_config(read_ini(config_path));
  const CubeFormat format = parse_cube_format(args.format);

  EndmemberLibrary lib;
  if (cfg.endmember_source == "synthetic") {
    lib = synthetic_library(cfg.L, cfg.R, cfg.library_seed);
  } else {
    const std::string vars = resolve_relative(cfg.variances_path, config_path);
    lib = load_library(resolve_relative(cfg.means_path, config_path),
                       vars.empty() ? std::optional<fs::path>() : std::optional<fs::path>(vars));
    if (lib.endmembers() != cfg.R)
      throw ConfigError("endmember library has " + std::to_string(lib.endmembers()) + " spectra but scene.R = " +
                        std::to_string(cfg.R));
    if (cfg.L != 0 && lib.bands() != cfg.L)
      throw ConfigError("endmember library has " + std::to_string(lib.bands()) + " bands but scene.L = " +
                        std::to_string(cfg.L));
  }
  SceneConfig resolved = cfg;
  resolved.L = lib.bands();

  const PottsField field = sample_potts_field(cfg.width, cfg.height, cfg.K, cfg.beta, cfg.potts_sweeps, cfg.seed);
  const Scene scene = generate_scene(lib, cfg.dirichlet, field, cfg.noise, cfg.truncation, cfg.seed, args.threads);

  const fs::path out(args.out);
  ensure_dir(out);
  const std::string cube_name = format == CubeFormat::csv ? "cube.csv" : "cube.f64";
  save_cube(scene.cube, out / cube_name, format);
  save_results(truth_bundle(scene, cfg.seed), out / "truth");
  write_ini(to_ini(resolved), out / "config.resolved");

  nlohmann::json manifest = {
      {"cube", cube_name},
      {"truth", "truth"},
      {"width", cfg.width},
      {"height", cfg.height},
      {"bands", lib.bands()},
      {"endmembers", cfg.R},
      {"classes", cfg.K},
      {"beta", cfg.beta},
      {"truncation", cfg.truncation},
      {"seed", cfg.seed},
      {"noise", {{"kind", to_string(cfg.noise.kind)},
                 {"band_variances", std::vector<double>(scene.band_noise.data(),
                                                        scene.band_noise.data() + scene.band_noise.size())}}},
      {"endmember_names", lib.names},
  };
  std::ofstream mf(out / "truth.json");
  if (!mf) throw IoError("cannot write " + (out / "truth.json").string());
  mf << manifest.dump(2) << '\n';
  std::cerr << "wrote " << cfg.width << "x" << cfg.height << "x" << lib.bands() << " scene to " << out.string()
            << '\n';
  return kOk;
}

struct UnmixArgs {
  std::string cube;
  std::string config;
  std::string out;
  std::optional<long> iters;
  std::optional<long> burn_in;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool fix_noise_zero = false;
  std::optional<int> k_classes;
  std::optional<int> r_endmembers;
  std::optional<double> beta;
  std::string library;
  bool quiet = false;
};

void write_trace(const ChainSummary& summary, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "sweep,log_posterior";
  for (int b = 0; b < kBlockCount; ++b) out << ",accept_" << block_name(static_cast<Block>(b));
  for (int b = 0; b < kBlockCount; ++b) out << ",step_" << block_name(static_cast<Block>(b));
  out << ",mean_psi2,mean_sigma2";
  if (!summary.trace.empty()) {
    const auto& C = summary.trace.front().C;
    for (Eigen::Index k = 0; k < C.cols(); ++k)
      for (Eigen::Index r = 0; r < C.rows(); ++r) out << ",c_" << r + 1 << "_" << k + 1;
  }
  out << '\n';
  for (const TraceRow& row : summary.trace) {
    out << row.sweep << ',' << format_double(row.log_posterior);
    for (double a : row.accept) out << ',' << (std::isnan(a) ? std::string() : format_double(a));
    for (double s : row.step_size) out << ',' << format_double(s);
    out << ',' << format_double(row.mean_psi2) << ',' << format_double(row.mean_sigma2);
    for (Eigen::Index k = 0; k < row.C.cols(); ++k)
      for (Eigen::Index r = 0; r < row.C.rows(); ++r) out << ',' << format_double(row.C(r, k));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

int cmd_unmix(const UnmixArgs& args) {
  const HsiCube cube = load_cube(args.cube, cube_format_for(args.cube));
  Ini ini;
  if (!args.config.empty()) ini = read_ini(args.config);
  if (args.iters) ini.put("sampler.iterations", *args.iters);
  if (args.burn_in) ini.put("sampler.burn_in", *args.burn_in);
  if (args.seed) ini.put("seed", *args.seed);
  if (args.threads) ini.put("sampler.threads", *args.threads);
  if (args.fix_noise_zero) ini.put("model.fix_noise_zero", "true");
  if (args.k_classes) ini.put("model.K", *args.k_classes);
  if (args.r_endmembers) ini.put("model.R", *args.r_endmembers);
  if (args.beta) ini.put("model.beta", *args.beta);
  if (!args.library.empty()) {
    ini.put("model.library", args.library);
  } else if (auto lib = ini.get_optional<std::string>("model.library"); lib && !args.config.empty()) {
    ini.put("model.library", resolve_relative(*lib, args.config));
    if (auto v = ini.get_optional<std::string>("model.library_variances"))
      ini.put("model.library_variances", resolve_relative(*v, args.config));
  }

  UnmixConfig cfg = parse_unmix_config(ini);
  std::optional<EndmemberLibrary> library;
  if (!cfg.library_means.empty()) {
    library = load_library(cfg.library_means, cfg.library_variances.empty()
                                                  ? std::optional<fs::path>()
                                                  : std::optional<fs::path>(cfg.library_variances));
  }

  const InitialState init =
      initialize_state(cube, cfg.R, cfg.K, cfg.sampler.hyper, library, cfg.sampler.seed, &std::cerr);
  SamplerConfig sampler = cfg.sampler;
  if (!args.quiet) sampler.progress = &std::cerr;
  const ChainSummary summary = run_sampler(cube, init, sampler);

  const fs::path out(args.out);
  ensure_dir(out / "traces");
  save_results(summary.to_bundle(cube.width, cube.height), out);
  write_trace(summary, out / "traces" / "trace.csv");
  write_ini(to_ini(cfg), out / "config.resolved");
  return kOk;
}

struct EvaluateArgs {
  std::string truth;
  std::vector<std::string> estimates;
  std::string cube;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const ResultBundle truth = load_results(args.truth);
  std::optional<HsiCube> cube;
  if (!args.cube.empty()) cube = load_cube(args.cube, cube_format_for(args.cube));
  const int R = truth.endmembers();

  std::vector<std::string> header{"estimate", "aRMSE_A"};
  for (int r = 1; r <= R; ++r) header.push_back("RMSE_m" + std::to_string(r));
  for (int r = 1; r <= R; ++r) header.push_back("SAM_m" + std::to_string(r));
  for (const char* h : {"aRMSE_M", "aSAM_M", "RE", "SAM_Y", "accuracy"}) header.emplace_back(h);

  std::vector<std::vector<std::string>> rows;
  for (const auto& dir : args.estimates) {
    const ResultBundle est = load_results(dir);
    if (est.endmembers() != R)
      throw DomainError("dimension mismatch: truth has R = " + std::to_string(R) + " endmembers, " + dir +
                        " has R = " + std::to_string(est.endmembers()));
    if (est.pixels() != truth.pixels() || est.endmember_means.rows() != truth.endmember_means.rows())
      throw DomainError("dimension mismatch between " + args.truth + " and " + dir);
    const auto perm = align_endmembers(truth.endmember_means, est.endmember_means);
    const Eigen::MatrixXd M = permute_columns(est.endmember_means, perm);
    const Eigen::MatrixXd A = permute_rows(est.abundance_maps, perm);
    const EndmemberErrors em = endmember_errors(truth.endmember_means, M);

    std::vector<std::string> row{dir, format_double(armse_abundance(truth.abundance_maps, A))};
    for (int r = 0; r < R; ++r) row.push_back(format_double(em.rmse[r]));
    for (int r = 0; r < R; ++r) row.push_back(format_double(em.sam[r]));
    row.push_back(format_double(em.armse));
    row.push_back(format_double(em.asam));
    if (cube) {
      const ReconstructionErrors re = reconstruction_errors(cube->reflectance, M * A);
      row.push_back(format_double(re.re));
      row.push_back(format_double(re.sam));
    } else {
      row.insert(row.end(), {"", ""});
    }
    const int K = std::max(truth.classes(), est.classes());
    row.push_back(format_double(classification_accuracy(truth.label_map, est.label_map, K).accuracy));
    rows.push_back(std::move(row));
  }

  for (std::size_t i = 0; i < header.size(); ++i) std::cout << (i ? "," : "") << header[i];
  std::cout << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << row[i];
    std::cout << '\n';
  }

  // Aligned table on stderr; numeric columns scaled by 1e2.
  std::vector<std::size_t> width(header.size());
  auto cell = [&](const std::string& v, std::size_t col) {
    if (col == 0 || v.empty()) return v;
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << std::stod(v) * 100.0;
    return s.str();
  };
  for (std::size_t i = 0; i < header.size(); ++i) {
    width[i] = header[i].size();
    for (const auto& row : rows) width[i] = std::max(width[i], cell(row[i], i).size());
  }
  std::cerr << "(metrics x 1e-2)\n";
  for (std::size_t i = 0; i < header.size(); ++i) std::cerr << std::setw(static_cast<int>(width[i]) + 2) << header[i];
  std::cerr << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      std::cerr << std::setw(static_cast<int>(width[i]) + 2) << cell(row[i], i);
    std::cerr << '\n';
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian hyperspectral unmixing with the generalized normal compositional model"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic scene and its ground truth");
  g->add_option("--config", gen.config, "Scene config (INI)")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--format", gen.format, "Cube format: csv or raw-f64")->capture_default_str();
  g->add_option("--threads", gen.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  UnmixArgs um;
  auto* u = app.add_subcommand("unmix", "Run the hybrid Gibbs/CHMC sampler on a cube");
  u->add_option("--cube", um.cube, "Input cube (.csv or .f64)")->required();
  u->add_option("--config", um.config, "Unmixing config (INI)");
  u->add_option("--out", um.out, "Output directory")->required();
  u->add_option("--iters", um.iters, "Total sweeps");
  u->add_option("--burn-in", um.burn_in, "Burn-in sweeps");
  u->add_option("--seed", um.seed, "Master seed");
  u->add_option("--threads", um.threads, "Worker threads");
  u->add_flag("--fix-noise-zero", um.fix_noise_zero, "NCM variant: noise variances fixed to zero");
  u->add_option("--k-classes", um.k_classes, "Number of classes K");
  u->add_option("--r-endmembers", um.r_endmembers, "Number of endmembers R");
  u->add_option("--beta", um.beta, "Potts granularity");
  u->add_option("--library", um.library, "Endmember means CSV used as the mean prior");
  u->add_flag("--quiet", um.quiet, "No progress output");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Compare estimates with a ground-truth bundle");
  e->add_option("--truth", ev.truth, "Ground-truth result directory")->required();
  e->add_option("--estimate", ev.estimates, "Estimate result directories")->required();
  e->add_option("--cube", ev.cube, "Observed cube, enables RE and SAM_Y");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*u) return cmd_unmix(um);
    if (*e) return cmd_evaluate(ev);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kConfig;
  } catch (const DomainError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kConfig;
  } catch (const NumericError& err) {
    std::cerr << "numeric failure: " << err.what() << '\n';
    return kNumeric;
  } catch (const IoError& err) {
    std::cerr << "I/O error: " << err.what() << '\n';
    return kIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
