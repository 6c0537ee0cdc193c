#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "glinkx/graph.hpp"

namespace glinkx {

// Row-major dense matrix of 64-bit reals (features, PEs, activations,
// soft labels).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

// Row-major sparse matrix; used for adjacency rows fed to a network branch.
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

Matrix gather_rows(const Matrix& m, std::span<const NodeId> rows);
SparseRows gather_rows(const SparseRows& m, std::span<const NodeId> rows);

// Row i holds a 1 in column j for every out-neighbor j of i.
SparseRows adjacency_rows(const CsrGraph& g);

bool all_finite(const Matrix& m);

// --- DMAT1 ----------------------------------------------------------------
// Layout: the 5 ASCII bytes "DMAT1", u64 rows, u64 cols (little endian),
// then rows*cols little-endian f32 values in row-major order.

inline constexpr char kDmatMagic[5] = {'D', 'M', 'A', 'T', '1'};

std::vector<std::uint8_t> encode_dmat(const Matrix& m);
Matrix decode_dmat(std::span<const std::uint8_t> bytes,
                   const std::string& origin = "<buffer>");

// f32 payload variants; a float table round-trips bit-exactly.
std::vector<std::uint8_t> encode_dmat(std::span<const float> data,
                                      std::uint64_t rows, std::uint64_t cols);
std::vector<float> decode_dmat_f32(std::span<const std::uint8_t> bytes,
                                   std::uint64_t& rows, std::uint64_t& cols,
                                   const std::string& origin = "<buffer>");

void write_dmat(const std::filesystem::path& path, const Matrix& m);
Matrix read_dmat(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

// 64-bit FNV-1a. Any single-byte change alters the digest.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::span<const double> values,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

// --- threading --------------------------------------------------------------

// Worker cap: GLINKX_THREADS if set (>=1), otherwise hardware concurrency.
unsigned worker_count();

// Splits [0,n) into contiguous chunks, one per worker. Each index is
// processed by exactly one worker, so row-wise kernels stay deterministic.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace glinkx
