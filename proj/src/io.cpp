#include "nexos/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

namespace nexos::io {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file: " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_double(const std::string& token, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw InputError("malformed number '" + token + "' in " + path.string());
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct MmHeader {
  bool coordinate = false;
  bool symmetric = false;
};

MmHeader parse_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty MatrixMarket file: " + path.string());
  std::istringstream ss(lower(line));
  std::string banner, object, format, field, symmetry;
  ss >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix")
    throw InputError("missing MatrixMarket banner in " + path.string());
  if (format != "array" && format != "coordinate")
    throw InputError("unsupported MatrixMarket format '" + format + "' in " + path.string());
  if (field != "real" && field != "integer" && field != "double")
    throw InputError("unsupported MatrixMarket field '" + field + "' in " + path.string());
  if (symmetry != "general" && symmetry != "symmetric")
    throw InputError("unsupported MatrixMarket symmetry '" + symmetry + "' in " + path.string());
  return {format == "coordinate", symmetry == "symmetric"};
}

/// Next non-comment, non-blank line.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '%') continue;
    line = t;
    return true;
  }
  return false;
}

struct Triplet {
  Eigen::Index row, col;
  double value;
};

std::vector<Triplet> read_coordinate_body(std::istream& in, const std::filesystem::path& path, Eigen::Index& rows,
                                          Eigen::Index& cols) {
  std::string line;
  if (!next_data_line(in, line)) throw InputError("missing size line in " + path.string());
  long long r = 0, c = 0, nnz = 0;
  if (!(std::istringstream(line) >> r >> c >> nnz) || r < 0 || c < 0 || nnz < 0)
    throw InputError("malformed size line in " + path.string());
  rows = r;
  cols = c;
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(nnz));
  for (long long i = 0; i < nnz; ++i) {
    if (!next_data_line(in, line)) throw InputError("truncated coordinate data in " + path.string());
    std::istringstream ls(line);
    long long ri = 0, ci = 0;
    std::string value;
    if (!(ls >> ri >> ci >> value) || ri < 1 || ri > r || ci < 1 || ci > c)
      throw InputError("malformed coordinate entry '" + line + "' in " + path.string());
    out.push_back({ri - 1, ci - 1, parse_double(value, path)});
  }
  return out;
}

}  // namespace

Matrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_input(path);
  const MmHeader header = parse_header(in, path);
  if (header.coordinate) {
    Eigen::Index rows = 0, cols = 0;
    const auto entries = read_coordinate_body(in, path, rows, cols);
    Matrix m = Matrix::Zero(rows, cols);
    for (const auto& t : entries) {
      m(t.row, t.col) = t.value;
      if (header.symmetric) m(t.col, t.row) = t.value;
    }
    return m;
  }

  std::string line;
  if (!next_data_line(in, line)) throw InputError("missing size line in " + path.string());
  long long r = 0, c = 0;
  if (!(std::istringstream(line) >> r >> c) || r < 0 || c < 0)
    throw InputError("malformed size line in " + path.string());
  Matrix m = Matrix::Zero(r, c);
  // Array format is column-major; symmetric stores the lower triangle only.
  for (Eigen::Index j = 0; j < c; ++j) {
    for (Eigen::Index i = header.symmetric ? j : 0; i < r; ++i) {
      if (!next_data_line(in, line)) throw InputError("truncated array data in " + path.string());
      m(i, j) = parse_double(line, path);
      if (header.symmetric) m(j, i) = m(i, j);
    }
  }
  return m;
}

void write_matrix_market(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_output(path);
  out << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out << m(i, j) << '\n';
}

Matrix read_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(trim(cell), path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError("ragged CSV rows in " + path.string());
    rows.push_back(std::move(row));
  }
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
  Matrix m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index j = 0; j < nc; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_output(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

Matrix read_matrix(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".mtx") return read_matrix_market(path);
  if (ext == ".csv") return read_csv(path);
  throw InputError("unrecognized matrix extension '" + ext + "' (expected .mtx or .csv): " + path.string());
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".mtx") return write_matrix_market(path, m);
  if (ext == ".csv") return write_csv(path, m);
  throw InputError("unrecognized matrix extension '" + ext + "' (expected .mtx or .csv): " + path.string());
}

Vector read_vector(const std::filesystem::path& path) {
  const Matrix m = read_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw InputError("expected a single row or column in " + path.string());
}

std::vector<Observation> read_observations(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  std::vector<Observation> obs;
  if (ext == ".mtx") {
    auto in = open_input(path);
    const MmHeader header = parse_header(in, path);
    if (!header.coordinate) throw InputError("observations require MatrixMarket coordinate format: " + path.string());
    Eigen::Index rows = 0, cols = 0;
    for (const auto& t : read_coordinate_body(in, path, rows, cols)) obs.push_back({t.row, t.col, t.value});
    return obs;
  }
  if (ext == ".csv") {
    const Matrix m = read_csv(path);
    if (m.rows() > 0 && m.cols() != 3) throw InputError("observation CSV needs row,col,value columns: " + path.string());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m(i, 0) != std::floor(m(i, 0)) || m(i, 1) != std::floor(m(i, 1)))
        throw InputError("non-integer observation index in " + path.string());
      obs.push_back({static_cast<Eigen::Index>(m(i, 0)), static_cast<Eigen::Index>(m(i, 1)), m(i, 2)});
    }
    return obs;
  }
  throw InputError("unrecognized observation extension '" + ext + "': " + path.string());
}

}  // namespace nexos::io
