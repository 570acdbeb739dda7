#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sbf {

inline constexpr std::size_t kMaxKeyLength = 4096;

// An opaque query key. Contents are never interpreted; equality is byte-wise.
class Key {
 public:
  // Throws std::invalid_argument unless 1 <= bytes.size() <= kMaxKeyLength.
  explicit Key(std::string bytes);

  std::string_view bytes() const noexcept { return bytes_; }
  std::size_t size() const noexcept { return bytes_.size(); }

  friend bool operator==(const Key&, const Key&) = default;
  friend std::strong_ordering operator<=>(const Key&, const Key&) = default;

 private:
  std::string bytes_;
};

struct KeyHash {
  std::size_t operator()(const Key& key) const noexcept;
};

// A collection of distinct keys in insertion order.
class KeySet {
 public:
  KeySet() = default;

  // Duplicates are dropped (first occurrence wins) and reported once through
  // the warning handler.
  explicit KeySet(std::vector<Key> keys);

  const std::vector<Key>& keys() const noexcept { return keys_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }

  const Key& operator[](std::size_t i) const { return keys_[i]; }
  auto begin() const noexcept { return keys_.begin(); }
  auto end() const noexcept { return keys_.end(); }

  // Number of duplicates dropped at construction.
  std::size_t duplicates_dropped() const noexcept { return dropped_; }

 private:
  std::vector<Key> keys_;
  std::size_t dropped_ = 0;
};

// Hex helpers used by the CLI key files.
std::string to_hex(std::string_view bytes);
Key key_from_hex(std::string_view hex);

}  // namespace sbf
