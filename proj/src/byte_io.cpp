#include "sbf/byte_io.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>
#include <zlib.h>

namespace sbf {

std::string_view to_string(FormatErrorCode code) noexcept {
  switch (code) {
    case FormatErrorCode::kBadMagic: return "bad magic";
    case FormatErrorCode::kUnknownVersion: return "unknown version";
    case FormatErrorCode::kTruncated: return "truncated";
    case FormatErrorCode::kChecksumMismatch: return "checksum mismatch";
    case FormatErrorCode::kInvalidField: return "invalid field";
  }
  return "unknown";
}

FormatError::FormatError(FormatErrorCode code, const std::string& detail)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), detail)), code_(code) {}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = ::crc32(crc, bytes.data() + pos, static_cast<uInt>(chunk));
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void ByteWriter::put_le(std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) {
    out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_magic(std::string_view magic) {
  out_.insert(out_.end(), magic.begin(), magic.end());
}

void ByteWriter::put_bytes(std::span<const std::uint8_t> bytes) {
  out_.insert(out_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::put_blob(std::span<const std::uint8_t> blob) {
  put_u64(blob.size());
  put_bytes(blob);
}

Bytes ByteWriter::finish_with_crc() && {
  const std::uint32_t crc = crc32(out_);
  put_u32(crc);
  return std::move(out_);
}

std::uint8_t ByteReader::get_u8() {
  if (remaining() < 1) {
    throw FormatError(FormatErrorCode::kTruncated, "unexpected end of input");
  }
  return bytes_[pos_++];
}

std::uint64_t ByteReader::get_le(int width) {
  if (remaining() < static_cast<std::size_t>(width)) {
    throw FormatError(FormatErrorCode::kTruncated, "unexpected end of input");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
  }
  pos_ += width;
  return v;
}

double ByteReader::get_f64() { return std::bit_cast<double>(get_u64()); }

std::span<const std::uint8_t> ByteReader::get_bytes(std::uint64_t n) {
  if (remaining() < n) {
    throw FormatError(FormatErrorCode::kTruncated,
                      fmt::format("need {} bytes, {} remain", n, remaining()));
  }
  auto out = bytes_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::span<const std::uint8_t> ByteReader::get_blob() { return get_bytes(get_u64()); }

std::string_view peek_magic(std::span<const std::uint8_t> bytes) noexcept {
  if (bytes.size() < 4) return {};
  return {reinterpret_cast<const char*>(bytes.data()), 4};
}

ByteReader open_container(std::span<const std::uint8_t> bytes, std::string_view magic,
                          std::uint8_t version) {
  if (bytes.size() < magic.size()) {
    throw FormatError(FormatErrorCode::kTruncated,
                      fmt::format("{} bytes is shorter than the magic", bytes.size()));
  }
  if (std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
    throw FormatError(FormatErrorCode::kBadMagic, fmt::format("expected '{}'", magic));
  }
  ByteReader reader(bytes);
  reader.get_bytes(magic.size());
  const std::uint8_t got = reader.get_u8();
  if (got != version) {
    throw FormatError(FormatErrorCode::kUnknownVersion,
                      fmt::format("{} version {} (supported: {})", magic, got, version));
  }
  return reader;
}

void close_container(ByteReader& reader, std::span<const std::uint8_t> bytes) {
  const std::size_t covered = reader.position();
  const std::uint32_t stored = reader.get_u32();
  if (reader.remaining() != 0) {
    throw FormatError(FormatErrorCode::kInvalidField,
                      fmt::format("{} trailing byte(s)", reader.remaining()));
  }
  const std::uint32_t actual = crc32(bytes.first(covered));
  if (stored != actual) {
    throw FormatError(FormatErrorCode::kChecksumMismatch,
                      fmt::format("stored {:08x}, computed {:08x}", stored, actual));
  }
}

}  // namespace sbf
