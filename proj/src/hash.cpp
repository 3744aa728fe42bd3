#include "graspforge/hash.hpp"

#include <fstream>
#include <iterator>
#include <vector>

#include "graspforge/common.hpp"

namespace graspforge {

void Fnv1a::update(std::span<const std::byte> bytes) {
  for (std::byte b : bytes) {
    state_ ^= static_cast<std::uint64_t>(b);
    state_ *= 0x100000001b3ULL;
  }
}

void Fnv1a::update(std::string_view s) {
  update(std::as_bytes(std::span<const char>(s.data(), s.size())));
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Fnv1a h;
  h.update(std::string_view(data.data(), data.size()));
  return h.digest();
}

}  // namespace graspforge
