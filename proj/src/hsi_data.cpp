#include "gncm/hsi_data.hpp"

#include "gncm/error.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gncm {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, const fs::path& path) {
  const std::string s = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError(path.string() + ": cannot parse number '" + s + "'");
  return v;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::uint64_t byteswap64(std::uint64_t v) {
  v = ((v & 0x00ff00ff00ff00ffULL) << 8) | ((v >> 8) & 0x00ff00ff00ff00ffULL);
  v = ((v & 0x0000ffff0000ffffULL) << 16) | ((v >> 16) & 0x0000ffff0000ffffULL);
  return (v << 32) | (v >> 32);
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> names;
  for (Eigen::Index i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

Eigen::MatrixXd to_matrix(const CsvTable& t, const fs::path& path, Eigen::Index expect_cols = -1) {
  const Eigen::Index rows = static_cast<Eigen::Index>(t.rows.size());
  const Eigen::Index cols = expect_cols >= 0 ? expect_cols
                            : t.header.empty() ? 0
                                               : static_cast<Eigen::Index>(t.header.size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(t.rows[i].size()) != cols)
      throw IoError(path.string() + ": row " + std::to_string(i + 1) + " has " +
                    std::to_string(t.rows[i].size()) + " values, expected " +
                    std::to_string(cols));
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = t.rows[i][j];
  }
  return m;
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void HsiCube::validate() const {
  if (width <= 0 || height <= 0) throw DomainError("cube: width and height must be positive");
  if (reflectance.cols() != static_cast<Eigen::Index>(width) * height)
    throw DomainError("cube: pixel count " + std::to_string(reflectance.cols()) +
                      " != width*height " + std::to_string(width * height));
  if (reflectance.rows() < 1) throw DomainError("cube: no bands");
  if (!reflectance.allFinite()) throw DomainError("cube: reflectance contains NaN or Inf");
  if (!band_wavelengths.empty() &&
      static_cast<Eigen::Index>(band_wavelengths.size()) != reflectance.rows())
    throw DomainError("cube: wavelength count does not match band count");
}

CubeFormat parse_cube_format(const std::string& name) {
  if (name == "csv") return CubeFormat::csv;
  if (name == "raw-f64" || name == "raw") return CubeFormat::raw_f64;
  throw ConfigError("unknown cube format '" + name + "' (expected csv or raw-f64)");
}

CubeFormat cube_format_for(const fs::path& path) {
  return path.extension() == ".csv" ? CubeFormat::csv : CubeFormat::raw_f64;
}

HsiCube load_cube(const fs::path& path, CubeFormat format) {
  HsiCube cube;
  int bands = 0;
  if (format == CubeFormat::csv) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    std::map<std::string, int> dims;
    for (const auto& kv : split(trim(line), ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw IoError(path.string() + ": malformed header '" + line + "'");
      try {
        dims[trim(kv.substr(0, eq))] = std::stoi(kv.substr(eq + 1));
      } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed header '" + line + "'");
      }
    }
    for (const char* key : {"width", "height", "bands"})
      if (!dims.count(key)) throw IoError(path.string() + ": header lacks '" + key + "'");
    cube.width = dims["width"];
    cube.height = dims["height"];
    bands = dims["bands"];
    if (cube.width <= 0 || cube.height <= 0 || bands <= 0)
      throw IoError(path.string() + ": header dimensions must be positive");
    if (!std::getline(in, line)) throw IoError(path.string() + ": missing column header");
    const int n_pix = cube.width * cube.height;
    cube.reflectance.resize(bands, n_pix);
    int n = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto fields = split(trim(line), ',');
      if (static_cast<int>(fields.size()) != bands)
        throw IoError(path.string() + ": payload length mismatch: pixel row " +
                      std::to_string(n + 1) + " has " + std::to_string(fields.size()) +
                      " bands, header declares " + std::to_string(bands));
      if (n >= n_pix)
        throw IoError(path.string() + ": payload length mismatch: more than " +
                      std::to_string(n_pix) + " pixel rows");
      for (int l = 0; l < bands; ++l) cube.reflectance(l, n) = parse_double(fields[l], path);
      ++n;
    }
    if (n != n_pix)
      throw IoError(path.string() + ": payload length mismatch: " + std::to_string(n) +
                    " pixel rows, expected " + std::to_string(n_pix));
  } else {
    auto in = open_in(path, std::ios::in | std::ios::binary);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
    json header;
    try {
      header = json::parse(line);
      cube.width = header.at("width").get<int>();
      cube.height = header.at("height").get<int>();
      bands = header.at("bands").get<int>();
      if (header.contains("wavelengths"))
        cube.band_wavelengths = header["wavelengths"].get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw IoError(path.string() + ": malformed header: " + e.what());
    }
    if (cube.width <= 0 || cube.height <= 0 || bands <= 0)
      throw IoError(path.string() + ": header dimensions must be positive");
    const std::size_t count = static_cast<std::size_t>(bands) * cube.width * cube.height;
    std::vector<char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (payload.size() != count * sizeof(double))
      throw IoError(path.string() + ": payload length mismatch: " + std::to_string(payload.size()) +
                    " bytes, expected " + std::to_string(count * sizeof(double)));
    const int n_pix = cube.width * cube.height;
    cube.reflectance.resize(bands, n_pix);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, payload.data() + i * sizeof(double), sizeof bits);
      if constexpr (std::endian::native == std::endian::big) bits = byteswap64(bits);
      const auto band = static_cast<Eigen::Index>(i / n_pix);
      const auto pix = static_cast<Eigen::Index>(i % n_pix);
      cube.reflectance(band, pix) = std::bit_cast<double>(bits);
    }
  }
  if (!cube.reflectance.allFinite()) throw IoError(path.string() + ": NaN or Inf detected in payload");
  cube.validate();
  return cube;
}

void save_cube(const HsiCube& cube, const fs::path& path, CubeFormat format) {
  cube.validate();
  const int L = cube.bands();
  const int N = cube.pixels();
  if (format == CubeFormat::csv) {
    auto out = open_out(path);
    out << "width=" << cube.width << ",height=" << cube.height << ",bands=" << L << '\n';
    for (int l = 0; l < L; ++l) out << (l ? "," : "") << "band_" << (l + 1);
    out << '\n';
    for (int n = 0; n < N; ++n) {
      for (int l = 0; l < L; ++l) out << (l ? "," : "") << format_double(cube.reflectance(l, n));
      out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
    return;
  }
  auto out = open_out(path, std::ios::out | std::ios::binary);
  json header{{"width", cube.width}, {"height", cube.height}, {"bands", L}};
  if (!cube.band_wavelengths.empty()) header["wavelengths"] = cube.band_wavelengths;
  out << header.dump() << '\n';
  for (int l = 0; l < L; ++l) {
    for (int n = 0; n < N; ++n) {
      auto bits = std::bit_cast<std::uint64_t>(cube.reflectance(l, n));
      if constexpr (std::endian::native == std::endian::big) bits = byteswap64(bits);
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void EndmemberLibrary::validate() const {
  if (means.size() == 0) throw DomainError("library: empty means");
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != means.cols())
    throw DomainError("library: name count does not match endmember count");
  if (!means.allFinite() || (means.array() <= 0.0).any() || (means.array() >= 1.0).any())
    throw DomainError("library: endmember means must lie strictly inside (0,1)");
  if (variances) {
    if (variances->rows() != means.cols() || variances->cols() != means.rows())
      throw DomainError("library: variances must be R x L");
    if (!variances->allFinite() || (variances->array() <= 0.0).any())
      throw DomainError("library: variances must be strictly positive");
  }
}

EndmemberLibrary load_library(const fs::path& means_csv, const std::optional<fs::path>& variances_csv) {
  EndmemberLibrary lib;
  const auto t = read_csv(means_csv);
  lib.names = t.header;
  lib.means = to_matrix(t, means_csv);
  if (variances_csv) {
    const auto tv = read_csv(*variances_csv);
    lib.variances = to_matrix(tv, *variances_csv).transpose();
  }
  lib.validate();
  return lib;
}

void save_library(const EndmemberLibrary& lib, const fs::path& means_csv,
                  const std::optional<fs::path>& variances_csv) {
  auto names = lib.names.empty() ? numbered("endmember_", lib.means.cols()) : lib.names;
  write_csv(means_csv, names, lib.means);
  if (variances_csv && lib.variances) write_csv(*variances_csv, names, lib.variances->transpose());
}

void ResultBundle::validate(double tol) const {
  const auto R = abundance_maps.rows();
  const auto N = abundance_maps.cols();
  if (R < 1 || N < 1) throw DomainError("results: empty abundance maps");
  if (static_cast<Eigen::Index>(label_map.size()) != N || noise_variance_map.size() != N)
    throw DomainError("results: per-pixel maps disagree on pixel count");
  if (endmember_means.cols() != R || endmember_variances.rows() != R ||
      endmember_variances.cols() != endmember_means.rows() || dirichlet_params.rows() != R)
    throw DomainError("results: endmember dimensions disagree");
  if (width > 0 && height > 0 && static_cast<Eigen::Index>(width) * height != N)
    throw DomainError("results: width*height does not match pixel count");
  const auto K = dirichlet_params.cols();
  for (Eigen::Index n = 0; n < N; ++n) {
    if ((abundance_maps.col(n).array() < 0.0).any())
      throw DomainError("results: negative abundance at pixel " + std::to_string(n));
    if (std::abs(abundance_maps.col(n).sum() - 1.0) > tol)
      throw DomainError("results: abundances of pixel " + std::to_string(n) + " do not sum to 1");
    if (label_map[n] < 1 || label_map[n] > K)
      throw DomainError("results: label " + std::to_string(label_map[n]) + " at pixel " +
                        std::to_string(n) + " outside 1.." + std::to_string(K));
  }
}

CsvTable read_csv(const fs::path& path) {
  auto in = open_in(path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  for (auto& h : split(trim(line), ',')) t.header.push_back(trim(h));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& f : split(trim(line), ',')) row.push_back(parse_double(f, path));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const Eigen::MatrixXd& rows) {
  if (static_cast<Eigen::Index>(header.size()) != rows.cols())
    throw DomainError("write_csv: header has " + std::to_string(header.size()) + " names for " +
                      std::to_string(rows.cols()) + " columns");
  auto out = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) out << (j ? "," : "") << format_double(rows(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void save_results(const ResultBundle& b, const fs::path& dir) {
  b.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto R = b.endmembers();
  write_csv(dir / "abundances.csv", numbered("a_", R), b.abundance_maps.transpose());
  {
    auto out = open_out(dir / "labels.csv");
    out << "label\n";
    for (int z : b.label_map) out << z << '\n';
    if (!out) throw IoError("write failed: labels.csv");
  }
  write_csv(dir / "noise_var.csv", {"psi2"}, b.noise_variance_map);
  write_csv(dir / "endmember_means.csv", numbered("m_", R), b.endmember_means);
  write_csv(dir / "endmember_vars.csv", numbered("s2_", R), b.endmember_variances.transpose());
  write_csv(dir / "dirichlet.csv", numbered("c_", b.classes()), b.dirichlet_params);

  json meta{{"width", b.width},
            {"height", b.height},
            {"iterations", b.chain_meta.iterations},
            {"burn_in", b.chain_meta.burn_in},
            {"kept_samples", b.chain_meta.kept_samples},
            {"seed", b.chain_meta.seed},
            {"acceptance_rates", b.chain_meta.acceptance_rates},
            {"step_sizes", b.chain_meta.step_sizes}};
  auto out = open_out(dir / "meta.json");
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("write failed: meta.json");
}

ResultBundle load_results(const fs::path& dir) {
  ResultBundle b;
  const auto ab = read_csv(dir / "abundances.csv");
  b.abundance_maps = to_matrix(ab, dir / "abundances.csv").transpose();
  const auto lab = read_csv(dir / "labels.csv");
  for (const auto& row : lab.rows) {
    if (row.size() != 1) throw IoError("labels.csv: expected one value per row");
    b.label_map.push_back(static_cast<int>(row[0]));
  }
  b.noise_variance_map = to_matrix(read_csv(dir / "noise_var.csv"), dir / "noise_var.csv", 1).col(0);
  b.endmember_means = to_matrix(read_csv(dir / "endmember_means.csv"), dir / "endmember_means.csv");
  b.endmember_variances =
      to_matrix(read_csv(dir / "endmember_vars.csv"), dir / "endmember_vars.csv").transpose();
  b.dirichlet_params = to_matrix(read_csv(dir / "dirichlet.csv"), dir / "dirichlet.csv");
  if (fs::exists(dir / "meta.json")) {
    auto in = open_in(dir / "meta.json");
    try {
      const json meta = json::parse(in);
      b.width = meta.value("width", 0);
      b.height = meta.value("height", 0);
      b.chain_meta.iterations = meta.value("iterations", 0L);
      b.chain_meta.burn_in = meta.value("burn_in", 0L);
      b.chain_meta.kept_samples = meta.value("kept_samples", 0L);
      b.chain_meta.seed = meta.value("seed", std::uint64_t{0});
      if (meta.contains("acceptance_rates"))
        b.chain_meta.acceptance_rates = meta["acceptance_rates"].get<std::map<std::string, double>>();
      if (meta.contains("step_sizes"))
        b.chain_meta.step_sizes = meta["step_sizes"].get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
      throw IoError("meta.json: " + std::string(e.what()));
    }
  }
  b.validate();
  return b;
}

} // namespace gncm
