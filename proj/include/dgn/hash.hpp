#pragma once

#include <string>
#include <string_view>

namespace dgn {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Incremental SHA-256 for hashing large canonical encodings.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  void update_double(double value);  // raw IEEE-754 bits, little-endian
  void update_int(long long value);
  std::string hex_digest();

 private:
  void* ctx_;
};

}  // namespace dgn
