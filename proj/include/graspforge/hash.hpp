#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace graspforge {

/// Incremental 64-bit FNV-1a. Used for content identities of point sets,
/// clouds and referenced files.
class Fnv1a {
 public:
  void update(std::span<const std::byte> bytes);
  void update(std::string_view s);
  template <typename T>
  void update_value(const T& v) {
    update(std::as_bytes(std::span<const T, 1>(&v, 1)));
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t hash_file(const std::string& path);

}  // namespace graspforge
