// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#ifndef TAGRAND_BYTES_HPP_
#define TAGRAND_BYTES_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tagrand {

using Bytes = std::vector<std::uint8_t>;

inline std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

inline Bytes from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("from_hex: invalid hex digit");
  };
  if (hex.size() % 2 != 0) {
    throw std::invalid_argument("from_hex: odd-length hex string");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

inline void xor_into(std::span<std::uint8_t> dst,
                     std::span<const std::uint8_t> src) {
  for (std::size_t i = 0; i < dst.size() && i < src.size(); ++i) {
    dst[i] ^= src[i];
  }
}

inline Bytes xor_bytes(std::span<const std::uint8_t> a,
                       std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("xor_bytes: length mismatch");
  }
  Bytes out(a.begin(), a.end());
  xor_into(out, b);
  return out;
}

// Little-endian encoding of a 64-bit counter into `len` bytes.  Throws if the
// value does not fit (i.e. any nonzero byte would be truncated).
inline Bytes le_counter(std::uint64_t value, std::size_t len) {
  Bytes out(len, 0);
  std::uint64_t v = value;
  for (std::size_t i = 0; i < len && v != 0; ++i) {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
  if (len < 8 && (len == 0 ? value != 0 : (value >> (8 * len)) != 0)) {
    throw std::overflow_error("le_counter: value does not fit in field");
  }
  return out;
}

}  // namespace tagrand

#endif  // TAGRAND_BYTES_HPP_
