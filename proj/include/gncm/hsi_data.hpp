#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gncm {

/// Observed hyperspectral image. Reflectance is stored L x N (one column per
/// pixel). Pixels are linearized row-major: pixel n sits at
/// (x, y) = (n % width, n / width).
struct HsiCube {
  int width = 0;
  int height = 0;
  Eigen::MatrixXd reflectance;           // bands x pixels
  std::vector<double> band_wavelengths;  // optional, micrometres

  int bands() const { return static_cast<int>(reflectance.rows()); }
  int pixels() const { return static_cast<int>(reflectance.cols()); }
  std::pair<int, int> grid_coords(int n) const { return {n % width, n / width}; }

  /// Throws DomainError if dimensions disagree or any entry is non-finite.
  void validate() const;
};

enum class CubeFormat { csv, raw_f64 };

CubeFormat parse_cube_format(const std::string& name);
/// Picks the format from the file extension (.csv, otherwise raw-f64).
CubeFormat cube_format_for(const std::filesystem::path& path);

/// CSV layout:
///   width=W,height=H,bands=L
///   band_1,...,band_L
///   one row per pixel (row-major pixel order), L values each
/// raw-f64 layout: one JSON line {"width":W,"height":H,"bands":L} followed by
/// L*N little-endian doubles, band-major (band varies slowest).
HsiCube load_cube(const std::filesystem::path& path, CubeFormat format);
void save_cube(const HsiCube& cube, const std::filesystem::path& path, CubeFormat format);

/// Endmember means (L x R) with optional per-band variances (R x L).
struct EndmemberLibrary {
  std::vector<std::string> names;
  Eigen::MatrixXd means;
  std::optional<Eigen::MatrixXd> variances;

  int bands() const { return static_cast<int>(means.rows()); }
  int endmembers() const { return static_cast<int>(means.cols()); }
  void validate() const;
};

/// Means file: header of endmember names, then L rows of R values.
/// Variances file (optional): same layout, L rows of R values.
EndmemberLibrary load_library(const std::filesystem::path& means_csv,
                              const std::optional<std::filesystem::path>& variances_csv = {});
void save_library(const EndmemberLibrary& lib, const std::filesystem::path& means_csv,
                  const std::optional<std::filesystem::path>& variances_csv = {});

struct ChainMeta {
  long iterations = 0;
  long burn_in = 0;
  long kept_samples = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> acceptance_rates;
  std::map<std::string, double> step_sizes;
};

struct ResultBundle {
  int width = 0;
  int height = 0;
  Eigen::MatrixXd abundance_maps;       // R x N
  std::vector<int> label_map;           // N, values in 1..K
  Eigen::VectorXd noise_variance_map;   // N
  Eigen::MatrixXd endmember_means;      // L x R
  Eigen::MatrixXd endmember_variances;  // R x L
  Eigen::MatrixXd dirichlet_params;     // R x K
  ChainMeta chain_meta;

  int endmembers() const { return static_cast<int>(abundance_maps.rows()); }
  int pixels() const { return static_cast<int>(abundance_maps.cols()); }
  int classes() const { return static_cast<int>(dirichlet_params.cols()); }

  /// Shapes agree, abundance columns lie on the simplex within `tol`, and
  /// labels are in 1..K.
  void validate(double tol = 1e-9) const;
};

/// Writes abundances.csv (N x R), labels.csv, noise_var.csv,
/// endmember_means.csv (L x R), endmember_vars.csv (L x R, transposed from
/// the R x L storage), dirichlet.csv (R x K) and meta.json.
void save_results(const ResultBundle& bundle, const std::filesystem::path& dir);
ResultBundle load_results(const std::filesystem::path& dir);

// CSV helpers shared by the CLI and the trace writer.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows);
std::string format_double(double v);

} // namespace gncm
