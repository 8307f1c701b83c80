#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace eegbench {

// Dense row-major real matrix; rank-1 arrays load as a single row.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

// Array as stored on disk, before any conversion to a Matrix.
struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

// Reads NPY version 1.0, C order, little-endian float32/float64.
NpyArray read_npy(const std::filesystem::path& path);
NpyArray parse_npy(std::span<const unsigned char> bytes);
Matrix load_npy(const std::filesystem::path& path);

// Writes '<f8' version-1.0 files.
std::vector<unsigned char> encode_npy(std::span<const double> data, const std::vector<std::size_t>& shape);
void save_npy(const std::filesystem::path& path, std::span<const double> data, const std::vector<std::size_t>& shape);
void save_npy(const std::filesystem::path& path, const Matrix& m);

}  // namespace eegbench
