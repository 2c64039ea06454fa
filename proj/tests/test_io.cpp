#include "doctest.h"

#include "nexos/io.hpp"
#include "nexos/random.hpp"

#include <filesystem>
#include <fstream>

using namespace nexos;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nexos_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("MatrixMarket round trip is exact") {
  Rng rng(71);
  const Matrix M = rng.normal_matrix(4, 3);
  const fs::path p = scratch("m.mtx");
  io::write_matrix_market(p, M);
  CHECK(io::read_matrix_market(p) == M);
  CHECK(io::read_matrix(p) == M);
}

TEST_CASE("MatrixMarket coordinate and symmetric inputs") {
  const fs::path coord = scratch("c.mtx");
  write_text(coord, "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 2\n1 1 1.5\n2 3 -2\n");
  const Matrix C = io::read_matrix_market(coord);
  CHECK(C.rows() == 2);
  CHECK(C.cols() == 3);
  CHECK(C(0, 0) == 1.5);
  CHECK(C(1, 2) == -2.0);
  CHECK(C(0, 1) == 0.0);

  const fs::path sym = scratch("s.mtx");
  write_text(sym, "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n");
  const Matrix S = io::read_matrix_market(sym);
  CHECK(S(0, 1) == 2.0);
  CHECK(S(1, 0) == 2.0);
  CHECK(S(1, 1) == 3.0);

  const auto obs = io::read_observations(coord);
  REQUIRE(obs.size() == 2);
  CHECK(obs[1].row == 1);
  CHECK(obs[1].col == 2);
}

TEST_CASE("CSV round trip and vectors") {
  Rng rng(72);
  const Matrix M = rng.normal_matrix(3, 2);
  const fs::path p = scratch("m.csv");
  io::write_csv(p, M);
  CHECK(io::read_csv(p) == M);

  const fs::path row = scratch("row.csv");
  write_text(row, "1, 2 ,3\n");
  CHECK(io::read_vector(row) == Eigen::Vector3d(1, 2, 3));
  const fs::path col = scratch("col.csv");
  write_text(col, "1\n2\n\n");
  CHECK(io::read_vector(col) == Eigen::Vector2d(1, 2));

  const fs::path triples = scratch("obs.csv");
  write_text(triples, "0,1,2.5\n2,0,-1\n");
  const auto obs = io::read_observations(triples);
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].col == 1);
  CHECK(obs[1].value == -1.0);
}

TEST_CASE("malformed inputs raise InputError") {
  CHECK_THROWS_AS(io::read_matrix(scratch("missing.mtx")), InputError);
  CHECK_THROWS_AS(io::read_matrix(scratch("x.txt")), InputError);
  const fs::path ragged = scratch("ragged.csv");
  write_text(ragged, "1,2\n3\n");
  CHECK_THROWS_AS(io::read_csv(ragged), InputError);
  const fs::path bad = scratch("bad.csv");
  write_text(bad, "1,abc\n");
  CHECK_THROWS_AS(io::read_csv(bad), InputError);
  const fs::path banner = scratch("banner.mtx");
  write_text(banner, "2 2\n1\n2\n3\n4\n");
  CHECK_THROWS_AS(io::read_matrix_market(banner), InputError);
  const fs::path truncated = scratch("trunc.mtx");
  write_text(truncated, "%%MatrixMarket matrix array real general\n2 2\n1\n2\n");
  CHECK_THROWS_AS(io::read_matrix_market(truncated), InputError);
  const fs::path frac = scratch("frac.csv");
  write_text(frac, "0.5,1,2\n");
  CHECK_THROWS_AS(io::read_observations(frac), InputError);
  const fs::path wide = scratch("wide.csv");
  write_text(wide, "1,2\n3,4\n");
  CHECK_THROWS_AS(io::read_vector(wide), InputError);
}
