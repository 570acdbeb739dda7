#include "sbf/key.hpp"

#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "sbf/diagnostics.hpp"
#include "sbf/hash.hpp"

namespace sbf {

Key::Key(std::string bytes) : bytes_(std::move(bytes)) {
  if (bytes_.empty() || bytes_.size() > kMaxKeyLength) {
    throw std::invalid_argument(
        fmt::format("key length {} outside [1, {}]", bytes_.size(), kMaxKeyLength));
  }
}

std::size_t KeyHash::operator()(const Key& key) const noexcept {
  return static_cast<std::size_t>(hash128(key.bytes(), 0).lo);
}

KeySet::KeySet(std::vector<Key> keys) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(keys.size());
  keys_.reserve(keys.size());
  std::vector<bool> keep(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    keep[i] = seen.insert(keys[i].bytes()).second;
  }
  seen.clear();  // views point into `keys`, which is moved from below
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (keep[i]) {
      keys_.push_back(std::move(keys[i]));
    } else {
      ++dropped_;
    }
  }
  if (dropped_ > 0) {
    warn(fmt::format("KeySet: dropped {} duplicate key(s)", dropped_));
  }
}

std::string to_hex(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Key key_from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw std::invalid_argument("hex key has odd length");
  }
  std::string bytes;
  bytes.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int a = hex_value(hex[i]);
    const int b = hex_value(hex[i + 1]);
    if (a < 0 || b < 0) {
      throw std::invalid_argument(fmt::format("invalid hex digit in key '{}'", hex));
    }
    bytes.push_back(static_cast<char>((a << 4) | b));
  }
  return Key(std::move(bytes));
}

}  // namespace sbf
