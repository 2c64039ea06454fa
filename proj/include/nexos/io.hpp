#pragma once

#include "nexos/operators.hpp"
#include "nexos/types.hpp"

#include <filesystem>
#include <vector>

namespace nexos::io {

// Dense matrices travel as MatrixMarket (.mtx, array or coordinate, real
// general/symmetric) or headerless comma-separated text (.csv). Malformed
// content and missing files raise InputError.

Matrix read_matrix_market(const std::filesystem::path& path);
/// Writes the `array real general` variant with full double precision.
void write_matrix_market(const std::filesystem::path& path, const Matrix& m);

Matrix read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Matrix& m);

/// Dispatch on the extension (.mtx or .csv).
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// Reads a vector stored as a single column or a single row.
Vector read_vector(const std::filesystem::path& path);

/// Observed entries from a MatrixMarket coordinate file (1-based indices) or a
/// CSV of `row,col,value` triples (0-based).
std::vector<Observation> read_observations(const std::filesystem::path& path);

}  // namespace nexos::io
