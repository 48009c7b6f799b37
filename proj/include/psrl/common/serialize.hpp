#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace psrl::ser {

// FNV-1a over a byte range; used for config hashes and checkpoint integrity.
std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s);

// Little-endian binary writer/reader with a running integrity hash.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v);
  void f64(double v);
  void str(const std::string& s);
  void mat(const Eigen::MatrixXd& m);
  void vec(const Eigen::VectorXd& v);
  std::uint64_t hash() const { return hash_; }

 private:
  void raw(const void* p, std::size_t n);
  std::ostream& out_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64();
  double f64();
  std::string str();
  Eigen::MatrixXd mat();
  Eigen::VectorXd vec();
  std::uint64_t hash() const { return hash_; }

 private:
  void raw(void* p, std::size_t n);
  std::istream& in_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace psrl::ser
