#include "gncm/endmember_init.hpp"
#include "gncm/error.hpp"
#include "gncm/gibbs.hpp"
#include "gncm/hsi_data.hpp"
#include "gncm/metrics.hpp"
#include "gncm/simplex.hpp"
#include "gncm/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>

namespace py = pybind11;
using namespace gncm;

namespace {

HsiCube make_cube(const Eigen::MatrixXd& Y, int width, int height) {
  HsiCube cube;
  cube.width = width;
  cube.height = height;
  cube.reflectance = Y;
  cube.validate();
  return cube;
}

py::dict state_dict(const GncmState& s) {
  py::dict d;
  d["abundances"] = s.abundances();
  d["sticks"] = s.T;
  d["means"] = s.M;
  d["variances"] = s.Sigma;
  d["noise"] = s.Psi;
  d["dirichlet"] = s.C;
  d["labels"] = s.z;
  return d;
}

py::dict generate(int width, int height, int R, int L, const Eigen::MatrixXd& dirichlet, double beta,
                  int potts_sweeps, const std::string& noise, double psi2, double truncation, std::uint64_t seed,
                  std::uint64_t library_seed) {
  const int K = static_cast<int>(dirichlet.cols());
  if (dirichlet.rows() != R) throw DomainError("dirichlet must have R rows");
  const EndmemberLibrary lib = synthetic_library(L, R, library_seed);
  const PottsField field = sample_potts_field(width, height, K, beta, potts_sweeps, seed);
  const Scene scene = generate_scene(lib, dirichlet, field, NoiseSpec{parse_noise_kind(noise), psi2}, truncation, seed);
  py::dict d;
  d["cube"] = scene.cube.reflectance;
  d["width"] = width;
  d["height"] = height;
  d["truth"] = state_dict(scene.truth);
  d["band_noise"] = scene.band_noise;
  return d;
}

py::dict unmix(const Eigen::MatrixXd& Y, int width, int height, int R, int K, long iterations, long burn_in,
               std::uint64_t seed, int threads, bool fix_noise_zero, double beta, int thinning,
               const std::optional<Eigen::MatrixXd>& library, bool progress) {
  const HsiCube cube = make_cube(Y, width, height);
  SamplerConfig cfg;
  cfg.n_total = iterations;
  cfg.n_burn_in = burn_in;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.thinning = thinning;
  cfg.fix_noise_zero = fix_noise_zero;
  cfg.hyper.beta = beta;
  cfg.hyper.R = R;
  cfg.hyper.K = K;
  if (progress) cfg.progress = &std::cerr;
  std::optional<EndmemberLibrary> lib;
  if (library) {
    lib.emplace();
    lib->means = *library;
    for (int r = 0; r < library->cols(); ++r) lib->names.push_back("em_" + std::to_string(r + 1));
  }
  ChainSummary out;
  {
    py::gil_scoped_release release;
    const InitialState init = initialize_state(cube, R, K, cfg.hyper, lib, seed, &std::cerr);
    out = run_sampler(cube, init, cfg);
  }
  py::dict d;
  d["abundances"] = out.A_mmse;
  d["means"] = out.M_mmse;
  d["variances"] = out.Sigma_mmse;
  d["noise"] = out.Psi_mmse;
  d["dirichlet"] = out.C_mmse;
  d["labels"] = out.z_map;
  py::dict rates;
  for (int b = 0; b < kBlockCount; ++b) rates[block_name(static_cast<Block>(b))] = out.acceptance_rate[b];
  d["acceptance_rates"] = rates;
  d["kept_samples"] = out.kept_samples;
  std::vector<double> lp;
  for (const TraceRow& row : out.trace) lp.push_back(row.log_posterior);
  d["log_posterior"] = lp;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian unmixing of hyperspectral images with endmember variability";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("stick_to_simplex",
        static_cast<Eigen::VectorXd (*)(const Eigen::Ref<const Eigen::VectorXd>&)>(&stick_to_simplex), py::arg("t"),
        "Maps stick coordinates in (0,1)^(R-1) to abundances on the simplex.");
  m.def("simplex_to_stick", &simplex_to_stick, py::arg("a"));
  m.def("stick_jacobian", static_cast<Eigen::MatrixXd (*)(const Eigen::Ref<const Eigen::VectorXd>&)>(&stick_jacobian),
        py::arg("t"));

  m.def(
      "load_cube",
      [](const std::filesystem::path& path) {
        const HsiCube c = load_cube(path, cube_format_for(path));
        return py::make_tuple(c.reflectance, c.width, c.height);
      },
      py::arg("path"), "Returns (reflectance L x N, width, height).");
  m.def(
      "save_cube",
      [](const std::filesystem::path& path, const Eigen::MatrixXd& Y, int width, int height) {
        save_cube(make_cube(Y, width, height), path, cube_format_for(path));
      },
      py::arg("path"), py::arg("reflectance"), py::arg("width"), py::arg("height"));

  m.def(
      "synthetic_library",
      [](int L, int R, std::uint64_t seed) {
        const EndmemberLibrary lib = synthetic_library(L, R, seed);
        return py::make_tuple(lib.means, *lib.variances);
      },
      py::arg("L"), py::arg("R"), py::arg("seed") = 1, "Returns (means L x R, variances R x L).");
  m.def(
      "sample_potts_field",
      [](int width, int height, int K, double beta, int n_sweeps, std::uint64_t seed) {
        return sample_potts_field(width, height, K, beta, n_sweeps, seed).labels();
      },
      py::arg("width"), py::arg("height"), py::arg("K"), py::arg("beta"), py::arg("n_sweeps") = 500,
      py::arg("seed") = 1);
  m.def("generate_scene", &generate, py::arg("width"), py::arg("height"), py::arg("R"), py::arg("L"),
        py::arg("dirichlet"), py::arg("beta") = 1.5, py::arg("potts_sweeps") = 500, py::arg("noise") = "constant",
        py::arg("psi2") = 1e-7, py::arg("truncation") = 0.9, py::arg("seed") = 1, py::arg("library_seed") = 1);

  m.def(
      "extract_endmembers",
      [](const Eigen::MatrixXd& Y, int R, std::uint64_t seed) {
        return select_pure_pixels(Y, R, seed);
      },
      py::arg("reflectance"), py::arg("R"), py::arg("seed") = 1, "Pixel indices of the selected pure pixels.");

  m.def("unmix", &unmix, py::arg("reflectance"), py::arg("width"), py::arg("height"), py::arg("R"), py::arg("K"),
        py::arg("iterations") = 3000, py::arg("burn_in") = 2000, py::arg("seed") = 1, py::arg("threads") = 1,
        py::arg("fix_noise_zero") = false, py::arg("beta") = 1.5, py::arg("thinning") = 1,
        py::arg("library") = std::nullopt, py::arg("progress") = false);

  m.def("armse_abundance", &armse_abundance, py::arg("A_true"), py::arg("A_est"));
  m.def(
      "spectral_angle",
      [](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return spectral_angle(u, v); }, py::arg("u"),
      py::arg("v"));
  m.def(
      "endmember_errors",
      [](const Eigen::MatrixXd& M_true, const Eigen::MatrixXd& M_est) {
        const EndmemberErrors e = endmember_errors(M_true, M_est);
        py::dict d;
        d["rmse"] = e.rmse;
        d["sam"] = e.sam;
        d["armse"] = e.armse;
        d["asam"] = e.asam;
        return d;
      },
      py::arg("M_true"), py::arg("M_est"));
  m.def(
      "reconstruction_errors",
      [](const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Y_hat) {
        const ReconstructionErrors e = reconstruction_errors(Y, Y_hat);
        return py::make_tuple(e.re, e.sam);
      },
      py::arg("Y"), py::arg("Y_hat"), "Returns (RE, mean spectral angle).");
  m.def("align_endmembers", &align_endmembers, py::arg("M_true"), py::arg("M_est"));
  m.def(
      "classification_accuracy",
      [](const std::vector<int>& z_true, const std::vector<int>& z_est, int K) {
        const LabelAgreement a = classification_accuracy(z_true, z_est, K);
        return py::make_tuple(a.accuracy, a.mapping);
      },
      py::arg("z_true"), py::arg("z_est"), py::arg("K"), "Returns (accuracy, mapping).");
}
