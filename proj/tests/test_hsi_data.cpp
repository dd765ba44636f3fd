#include "gncm/error.hpp"
#include "gncm/hsi_data.hpp"
#include "gncm/rng.hpp"
#include "temp_dir.hpp"

#include <doctest.h>

#include <fstream>

using namespace gncm;

namespace {

HsiCube random_cube(int w, int h, int L, std::uint64_t seed) {
  StreamRng rng(seed);
  HsiCube cube;
  cube.width = w;
  cube.height = h;
  cube.reflectance.resize(L, w * h);
  for (Eigen::Index i = 0; i < cube.reflectance.size(); ++i) cube.reflectance.data()[i] = 1.2 * rng.uniform() - 0.1;
  return cube;
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

ResultBundle small_bundle() {
  ResultBundle b;
  b.width = 2;
  b.height = 1;
  b.abundance_maps.resize(2, 2);
  b.abundance_maps << 0.25, 0.6, 0.75, 0.4;
  b.label_map = {1, 2};
  b.noise_variance_map = Eigen::Vector2d(1e-7, 2e-7);
  b.endmember_means.resize(3, 2);
  b.endmember_means << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  b.endmember_variances = Eigen::MatrixXd::Constant(2, 3, 1e-4);
  b.endmember_variances(1, 2) = 1.0 / 3.0;
  b.dirichlet_params = Eigen::MatrixXd::Constant(2, 2, 1.5);
  b.chain_meta.iterations = 10;
  b.chain_meta.burn_in = 5;
  b.chain_meta.kept_samples = 5;
  b.chain_meta.seed = 42;
  b.chain_meta.acceptance_rates["abundances"] = 0.7;
  return b;
}

} // namespace

TEST_CASE("constant CSV cube loads") {
  TempDir dir;
  write_text(dir / "c.csv", "width=2,height=2,bands=3\nband_1,band_2,band_3\n"
                            "0.5,0.5,0.5\n0.5,0.5,0.5\n0.5,0.5,0.5\n0.5,0.5,0.5\n");
  const HsiCube c = load_cube(dir / "c.csv", CubeFormat::csv);
  CHECK(c.pixels() == 4);
  CHECK(c.bands() == 3);
  CHECK((c.reflectance.array() == 0.5).all());
}

TEST_CASE("CSV payload shorter than the header declares") {
  TempDir dir;
  write_text(dir / "c.csv", "width=2,height=1,bands=3\nband_1,band_2,band_3\n0.5,0.5\n0.5,0.5\n");
  CHECK_THROWS_AS(load_cube(dir / "c.csv", CubeFormat::csv), IoError);
}

TEST_CASE("raw payload shorter than the header declares") {
  TempDir dir;
  HsiCube two = random_cube(2, 2, 2, 1);
  save_cube(two, dir / "c.f64", CubeFormat::raw_f64);
  // rewrite the header to claim three bands
  std::ifstream in(dir / "c.f64", std::ios::binary);
  std::string header;
  std::getline(in, header);
  const std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ofstream(dir / "bad.f64", std::ios::binary) << "{\"width\":2,\"height\":2,\"bands\":3}\n" << payload;
  CHECK_THROWS_AS(load_cube(dir / "bad.f64", CubeFormat::raw_f64), IoError);
}

TEST_CASE("malformed headers and NaN payloads are rejected") {
  TempDir dir;
  write_text(dir / "a.csv", "width2,height=1,bands=1\nband_1\n0.1\n0.2\n");
  CHECK_THROWS_AS(load_cube(dir / "a.csv", CubeFormat::csv), IoError);
  write_text(dir / "b.csv", "width=1,height=1\nband_1\n0.1\n");
  CHECK_THROWS_AS(load_cube(dir / "b.csv", CubeFormat::csv), IoError);
  write_text(dir / "c.csv", "width=1,height=1,bands=2\nband_1,band_2\nnan,0.1\n");
  CHECK_THROWS(load_cube(dir / "c.csv", CubeFormat::csv));
  write_text(dir / "d.f64", "not json\n");
  CHECK_THROWS_AS(load_cube(dir / "d.f64", CubeFormat::raw_f64), IoError);
  CHECK_THROWS_AS(load_cube(dir / "missing.csv", CubeFormat::csv), IoError);
}

TEST_CASE("cube round trips are exact") {
  TempDir dir;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const HsiCube cube = random_cube(3 + int(seed), 2, 5, seed);
    save_cube(cube, dir / "c.f64", CubeFormat::raw_f64);
    save_cube(cube, dir / "c.csv", CubeFormat::csv);
    const HsiCube raw = load_cube(dir / "c.f64", CubeFormat::raw_f64);
    const HsiCube csv = load_cube(dir / "c.csv", CubeFormat::csv);
    CHECK(raw.width == cube.width);
    CHECK(raw.height == cube.height);
    CHECK(raw.reflectance == cube.reflectance);
    CHECK(csv.reflectance == cube.reflectance);  // 17 significant digits round-trip exactly
  }
}

TEST_CASE("format selection") {
  CHECK(parse_cube_format("csv") == CubeFormat::csv);
  CHECK(parse_cube_format("raw-f64") == CubeFormat::raw_f64);
  CHECK_THROWS_AS(parse_cube_format("envi"), ConfigError);
  CHECK(cube_format_for("x/y.csv") == CubeFormat::csv);
  CHECK(cube_format_for("x/y.bin") == CubeFormat::raw_f64);
}

TEST_CASE("pixel linearization is row-major") {
  HsiCube c;
  c.width = 4;
  c.height = 3;
  CHECK(c.grid_coords(0) == std::pair<int, int>{0, 0});
  CHECK(c.grid_coords(5) == std::pair<int, int>{1, 1});
  CHECK(c.grid_coords(11) == std::pair<int, int>{3, 2});
}

TEST_CASE("library validation and round trip") {
  TempDir dir;
  EndmemberLibrary lib;
  lib.names = {"soil", "grass"};
  lib.means.resize(3, 2);
  lib.means << 0.1, 0.9, 0.2, 0.8, 0.3, 0.7;
  lib.variances = Eigen::MatrixXd::Constant(2, 3, 1e-3);
  save_library(lib, dir / "m.csv", dir / "v.csv");
  const EndmemberLibrary back = load_library(dir / "m.csv", dir / "v.csv");
  CHECK(back.names == lib.names);
  CHECK((back.means - lib.means).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((*back.variances - *lib.variances).cwiseAbs().maxCoeff() <= 1e-18);
  lib.means(0, 0) = 1.0;
  CHECK_THROWS_AS(lib.validate(), DomainError);
}

TEST_CASE("result bundle round trip") {
  TempDir dir;
  const ResultBundle b = small_bundle();
  save_results(b, dir.path);
  for (const char* f : {"abundances.csv", "labels.csv", "noise_var.csv", "endmember_means.csv", "endmember_vars.csv",
                        "dirichlet.csv", "meta.json"})
    CHECK(std::filesystem::exists(dir / f));
  const ResultBundle r = load_results(dir.path);
  CHECK(r.width == 2);
  CHECK(r.label_map == b.label_map);
  CHECK(r.abundance_maps == b.abundance_maps);
  CHECK(r.endmember_means == b.endmember_means);
  CHECK(r.endmember_variances == b.endmember_variances);
  CHECK(r.noise_variance_map == b.noise_variance_map);
  CHECK(r.dirichlet_params == b.dirichlet_params);
  CHECK(r.chain_meta.seed == 42);
  CHECK(r.chain_meta.acceptance_rates.at("abundances") == 0.7);
}

TEST_CASE("single pixel bundle writes one abundance row") {
  TempDir dir;
  ResultBundle b = small_bundle();
  b.width = 1;
  b.abundance_maps = b.abundance_maps.col(0).eval();
  b.label_map = {1};
  b.noise_variance_map = b.noise_variance_map.head(1).eval();
  save_results(b, dir.path);
  const CsvTable t = read_csv(dir / "abundances.csv");
  REQUIRE(t.rows.size() == 1);
  REQUIRE(t.rows[0].size() == 2);
  CHECK(t.rows[0][0] + t.rows[0][1] == doctest::Approx(1.0));
}

TEST_CASE("labels outside 1..K are rejected") {
  TempDir dir;
  ResultBundle b = small_bundle();
  b.label_map[0] = 0;
  CHECK_THROWS_AS(save_results(b, dir.path), DomainError);
  b.label_map[0] = 3;
  CHECK_THROWS_AS(b.validate(), DomainError);
}

TEST_CASE("abundance columns must lie on the simplex") {
  ResultBundle b = small_bundle();
  b.abundance_maps(0, 0) += 1e-6;
  CHECK_THROWS_AS(b.validate(), DomainError);
}
