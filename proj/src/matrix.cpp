#include "glinkx/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

#include "glinkx/error.hpp"

namespace glinkx {

Matrix gather_rows(const Matrix& m, std::span<const NodeId> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

SparseRows gather_rows(const SparseRows& m, std::span<const NodeId> rows) {
  std::vector<Eigen::Triplet<double, std::int64_t>> trips;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (SparseRows::InnerIterator it(m, rows[i]); it; ++it)
      trips.emplace_back(static_cast<std::int64_t>(i), it.col(), it.value());
  SparseRows out(static_cast<std::int64_t>(rows.size()), m.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

SparseRows adjacency_rows(const CsrGraph& g) {
  std::vector<Eigen::Triplet<double, std::int64_t>> trips;
  trips.reserve(g.num_edges());
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (NodeId v : g.out_neighbors(u)) trips.emplace_back(u, v, 1.0);
  const auto n = static_cast<std::int64_t>(g.num_nodes());
  SparseRows a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kHeaderBytes = sizeof(kDmatMagic) + 16;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f32(std::vector<std::uint8_t>& out, float f) {
  auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

float get_f32(const std::uint8_t* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

std::vector<std::uint8_t> header(std::uint64_t rows, std::uint64_t cols) {
  std::vector<std::uint8_t> out(std::begin(kDmatMagic), std::end(kDmatMagic));
  put_u64(out, rows);
  put_u64(out, cols);
  return out;
}

const std::uint8_t* check_header(std::span<const std::uint8_t> bytes,
                                 std::uint64_t& rows, std::uint64_t& cols,
                                 const std::string& origin) {
  if (bytes.size() < kHeaderBytes)
    throw FormatError(origin + ": truncated DMAT1 header");
  if (!std::equal(std::begin(kDmatMagic), std::end(kDmatMagic), bytes.begin()))
    throw FormatError(origin + ": bad magic, not a DMAT1 file");
  rows = get_u64(bytes.data() + sizeof(kDmatMagic));
  cols = get_u64(bytes.data() + sizeof(kDmatMagic) + 8);
  if (cols != 0 && rows > (bytes.size() / 4) / cols + 1)
    throw FormatError(origin + ": DMAT1 shape exceeds payload");
  const std::uint64_t expect = kHeaderBytes + rows * cols * 4;
  if (bytes.size() != expect)
    throw FormatError(origin + ": DMAT1 payload has " +
                      std::to_string(bytes.size()) + " bytes, expected " +
                      std::to_string(expect));
  return bytes.data() + kHeaderBytes;
}

}  // namespace

std::vector<std::uint8_t> encode_dmat(const Matrix& m) {
  auto out = header(static_cast<std::uint64_t>(m.rows()),
                    static_cast<std::uint64_t>(m.cols()));
  out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 4);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    put_f32(out, static_cast<float>(m.data()[i]));
  return out;
}

std::vector<std::uint8_t> encode_dmat(std::span<const float> data,
                                      std::uint64_t rows, std::uint64_t cols) {
  if (data.size() != rows * cols)
    throw DimensionError("DMAT1 encode: data length != rows*cols");
  auto out = header(rows, cols);
  out.reserve(out.size() + data.size() * 4);
  for (float f : data) put_f32(out, f);
  return out;
}

Matrix decode_dmat(std::span<const std::uint8_t> bytes, const std::string& origin) {
  std::uint64_t rows = 0, cols = 0;
  const std::uint8_t* p = check_header(bytes, rows, cols, origin);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = get_f32(p + 4 * i);
  return m;
}

std::vector<float> decode_dmat_f32(std::span<const std::uint8_t> bytes,
                                   std::uint64_t& rows, std::uint64_t& cols,
                                   const std::string& origin) {
  const std::uint8_t* p = check_header(bytes, rows, cols, origin);
  std::vector<float> out(rows * cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_f32(p + 4 * i);
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_dmat(const std::filesystem::path& path, const Matrix& m) {
  write_file_bytes(path, encode_dmat(m));
}

Matrix read_dmat(const std::filesystem::path& path) {
  return decode_dmat(read_file_bytes(path), path.string());
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::span<const double> values, std::uint64_t seed) {
  return fnv1a64({reinterpret_cast<const std::uint8_t*>(values.data()),
                  values.size() * sizeof(double)},
                 seed);
}

// ---------------------------------------------------------------------------

unsigned worker_count() {
  if (const char* env = std::getenv("GLINKX_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n / 1024, 1));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
}

}  // namespace glinkx
