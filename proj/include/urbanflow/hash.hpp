#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace urbanflow {

/// 64-bit FNV-1a, used for mesh identities and output-file inventories.
class Fnv1a {
 public:
  void update(std::span<const std::byte> bytes) {
    for (std::byte b : bytes) {
      state_ ^= static_cast<std::uint64_t>(b);
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view text) { update(std::as_bytes(std::span(text.data(), text.size()))); }
  template <typename T>
  void update_value(const T& value) {
    update(std::as_bytes(std::span(&value, 1)));
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hex64(std::uint64_t value);

}  // namespace urbanflow
