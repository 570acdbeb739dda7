#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sbf {

using Bytes = std::vector<std::uint8_t>;

enum class FormatErrorCode {
  kBadMagic,
  kUnknownVersion,
  kTruncated,
  kChecksumMismatch,
  kInvalidField,
};

std::string_view to_string(FormatErrorCode code) noexcept;

class FormatError : public std::runtime_error {
 public:
  FormatError(FormatErrorCode code, const std::string& detail);
  FormatErrorCode code() const noexcept { return code_; }

 private:
  FormatErrorCode code_;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;

// Little-endian append-only writer.
class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { out_.push_back(v); }
  void put_u16(std::uint16_t v) { put_le(v, 2); }
  void put_u32(std::uint32_t v) { put_le(v, 4); }
  void put_u64(std::uint64_t v) { put_le(v, 8); }
  void put_f64(double v);
  void put_magic(std::string_view magic);
  void put_bytes(std::span<const std::uint8_t> bytes);
  // u64 length followed by the bytes.
  void put_blob(std::span<const std::uint8_t> blob);

  // Appends the CRC32 of everything written so far and returns the buffer.
  Bytes finish_with_crc() &&;
  Bytes take() && { return std::move(out_); }

 private:
  void put_le(std::uint64_t v, int width);
  Bytes out_;
};

// Bounds-checked little-endian reader. Every short read throws
// FormatError(kTruncated).
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t get_u8();
  std::uint16_t get_u16() { return static_cast<std::uint16_t>(get_le(2)); }
  std::uint32_t get_u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t get_u64() { return get_le(8); }
  double get_f64();
  std::span<const std::uint8_t> get_bytes(std::uint64_t n);
  std::span<const std::uint8_t> get_blob();

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::uint64_t get_le(int width);
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Container framing shared by every serialized format: 4-byte magic, u8
// version, payload, then a CRC32 over all prior bytes. open_container checks
// magic and version and returns a reader positioned at the payload;
// close_container reads and verifies the trailing CRC and rejects trailing
// bytes. Payload parsing happens in between so that a cut-off stream reports
// kTruncated rather than a checksum mismatch.
ByteReader open_container(std::span<const std::uint8_t> bytes, std::string_view magic,
                          std::uint8_t version);
void close_container(ByteReader& reader, std::span<const std::uint8_t> bytes);

// Returns the 4-byte magic of a blob, or an empty view when shorter.
std::string_view peek_magic(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace sbf
