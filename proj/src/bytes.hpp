#pragma once

// Little-endian byte codec shared by the on-disk formats.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "pcda/core.hpp"

namespace pcda::detail {

class ByteWriter {
 public:
  void magic(const char (&m)[5]) { bytes_.insert(bytes_.end(), m, m + 4); }
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v); }
  void u32(std::uint32_t v) { put(v); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v)); }
  void f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  template <class U>
  void put(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void expect_magic(const char (&m)[5]) {
    if (remaining() < 4 || std::memcmp(bytes_.data(), m, 4) != 0) {
      throw DataError("BadMagic", std::string("expected \"") + m + "\" at offset 0");
    }
    pos_ = 4;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(get<std::uint8_t>()); }
  std::uint16_t u16() { return get<std::uint16_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(get<std::uint32_t>()); }
  float f32() {
    std::size_t at = pos_;
    float v = std::bit_cast<float>(get<std::uint32_t>());
    if (!std::isfinite(v)) {
      throw DataError("NonFiniteValue", "at offset " + std::to_string(at));
    }
    return v;
  }

 private:
  template <class U>
  U get() {
    if (remaining() < sizeof(U)) {
      throw DataError("TruncatedFile", "needed " + std::to_string(sizeof(U)) +
                                           " bytes at offset " + std::to_string(pos_));
    }
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace pcda::detail
