#include "ttcert/tt_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ttcert {

namespace {

constexpr char kVecMagic[8] = {'T', 'T', 'V', 'E', 'C', '0', '0', '1'};
constexpr char kMatMagic[8] = {'T', 'T', 'M', 'A', 'T', '0', '0', '1'};
constexpr std::uint32_t kEndianTag = 0x01020304u;
constexpr std::uint64_t kMaxDim = 1u << 16;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("tt_io: truncated stream");
  return to_little(v);
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put(out, std::bit_cast<std::uint64_t>(p[i]));
}

void get_doubles(std::istream& in, double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) p[i] = std::bit_cast<double>(get<std::uint64_t>(in));
}

void put_header(std::ostream& out, const char* magic, std::uint64_t d) {
  out.write(magic, 8);
  // The tag is written in little-endian order like every other field, so a
  // reader on any host sees 0x01020304 after conversion.
  put(out, kEndianTag);
  put(out, d);
}

std::uint64_t get_header(std::istream& in, const char* magic) {
  char m[8];
  in.read(m, 8);
  if (!in || std::memcmp(m, magic, 8) != 0) throw std::runtime_error("tt_io: bad magic");
  if (get<std::uint32_t>(in) != kEndianTag) throw std::runtime_error("tt_io: bad endianness tag");
  const auto d = get<std::uint64_t>(in);
  if (d == 0 || d > kMaxDim) throw std::runtime_error("tt_io: implausible dimension");
  return d;
}

std::uint64_t checked_size(std::uint64_t v) {
  if (v == 0 || v > (1ull << 32)) throw std::runtime_error("tt_io: implausible core shape");
  return v;
}

}  // namespace

void write_tt(std::ostream& out, const TtVector& x) {
  put_header(out, kVecMagic, x.dim());
  for (const auto& c : x.cores()) {
    put<std::uint64_t>(out, c.r0());
    put<std::uint64_t>(out, c.n());
    put<std::uint64_t>(out, c.r1());
  }
  for (const auto& c : x.cores()) put_doubles(out, c.data(), c.size());
  if (!out) throw std::runtime_error("tt_io: write failed");
}

TtVector read_tt(std::istream& in) {
  const auto d = get_header(in, kVecMagic);
  std::vector<Core3> cores;
  for (std::uint64_t k = 0; k < d; ++k) {
    const auto r0 = checked_size(get<std::uint64_t>(in));
    const auto n = checked_size(get<std::uint64_t>(in));
    const auto r1 = checked_size(get<std::uint64_t>(in));
    cores.emplace_back(r0, n, r1);
  }
  for (auto& c : cores) get_doubles(in, c.data(), c.size());
  return TtVector(std::move(cores));
}

void write_ttm(std::ostream& out, const TtMatrix& a) {
  put_header(out, kMatMagic, a.dim());
  for (Index k = 0; k < a.dim(); ++k) {
    const Core4& c = a.core(k);
    put<std::uint64_t>(out, c.r0());
    put<std::uint64_t>(out, c.m());
    put<std::uint64_t>(out, c.n());
    put<std::uint64_t>(out, c.r1());
  }
  for (Index k = 0; k < a.dim(); ++k) {
    const Core4& c = a.core(k);
    put_doubles(out, c.data(), c.r0() * c.m() * c.n() * c.r1());
  }
  if (!out) throw std::runtime_error("tt_io: write failed");
}

TtMatrix read_ttm(std::istream& in) {
  const auto d = get_header(in, kMatMagic);
  std::vector<Core4> cores;
  for (std::uint64_t k = 0; k < d; ++k) {
    const auto r0 = checked_size(get<std::uint64_t>(in));
    const auto m = checked_size(get<std::uint64_t>(in));
    const auto n = checked_size(get<std::uint64_t>(in));
    const auto r1 = checked_size(get<std::uint64_t>(in));
    cores.emplace_back(r0, m, n, r1);
  }
  for (auto& c : cores) get_doubles(in, c.data(), c.r0() * c.m() * c.n() * c.r1());
  return TtMatrix(std::move(cores));
}

void save_tt(const std::string& path, const TtVector& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_tt(out, x);
}

TtVector load_tt(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_tt(in);
}

void save_ttm(const std::string& path, const TtMatrix& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_ttm(out, a);
}

TtMatrix load_ttm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_ttm(in);
}

}  // namespace ttcert
