#include "psrl/common/serialize.hpp"

#include <cstring>
#include <stdexcept>

namespace psrl::ser {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

void Writer::raw(const void* p, std::size_t n) {
  out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  hash_ = fnv1a(p, n, hash_);
}

void Writer::u32(std::uint32_t v) { raw(&v, sizeof v); }
void Writer::u64(std::uint64_t v) { raw(&v, sizeof v); }
void Writer::i64(std::int64_t v) { raw(&v, sizeof v); }
void Writer::f64(double v) { raw(&v, sizeof v); }

void Writer::str(const std::string& s) {
  u64(s.size());
  if (!s.empty()) raw(s.data(), s.size());
}

void Writer::mat(const Eigen::MatrixXd& m) {
  i64(m.rows());
  i64(m.cols());
  if (m.size()) raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

void Writer::vec(const Eigen::VectorXd& v) {
  i64(v.size());
  if (v.size()) raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

void Reader::raw(void* p, std::size_t n) {
  in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (in_.gcount() != static_cast<std::streamsize>(n))
    throw std::runtime_error("serialize: truncated input");
  hash_ = fnv1a(p, n, hash_);
}

std::uint32_t Reader::u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
std::uint64_t Reader::u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
std::int64_t Reader::i64() { std::int64_t v; raw(&v, sizeof v); return v; }
double Reader::f64() { double v; raw(&v, sizeof v); return v; }

std::string Reader::str() {
  std::uint64_t n = u64();
  if (n > (1ULL << 32)) throw std::runtime_error("serialize: bad string length");
  std::string s(n, '\0');
  if (n) raw(s.data(), n);
  return s;
}

Eigen::MatrixXd Reader::mat() {
  std::int64_t r = i64(), c = i64();
  if (r < 0 || c < 0 || r * c > (1LL << 28)) throw std::runtime_error("serialize: bad matrix shape");
  Eigen::MatrixXd m(r, c);
  if (m.size()) raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  return m;
}

Eigen::VectorXd Reader::vec() {
  std::int64_t n = i64();
  if (n < 0 || n > (1LL << 28)) throw std::runtime_error("serialize: bad vector length");
  Eigen::VectorXd v(n);
  if (v.size()) raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  return v;
}

}  // namespace psrl::ser
