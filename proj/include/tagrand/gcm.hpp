// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Galois/Counter mode over the AES block cipher: seal (encrypt+tag) and open
// (decrypt+verify).  Both the 96-bit IV fast path and the general
// GHASH-derived pre-counter are implemented.

#ifndef TAGRAND_GCM_HPP_
#define TAGRAND_GCM_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "tagrand/aes.hpp"
#include "tagrand/bytes.hpp"

namespace tagrand {

// 128-bit GHASH element; hi holds bytes 0..7 big-endian (bit 0 of the GCM
// bit string is the most significant bit of hi).
struct U128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  friend bool operator==(const U128&, const U128&) = default;
};

// Bitwise reference multiplication in GF(2^128) with the GCM reduction
// polynomial; slow, used to cross-check the table-driven path in tests.
U128 gf128_mul_bitwise(const U128& x, const U128& y);

class Gcm {
 public:
  explicit Gcm(std::span<const std::uint8_t> key);

  // Returns ciphertext || tag (tag_len in [4, 16] bytes).
  Bytes seal(std::span<const std::uint8_t> iv, std::span<const std::uint8_t> aad,
             std::span<const std::uint8_t> plaintext,
             std::size_t tag_len = 16) const;

  // Splits sealed into ciphertext || tag, verifies, returns the plaintext or
  // an empty optional on authentication failure.
  std::optional<Bytes> open(std::span<const std::uint8_t> iv,
                            std::span<const std::uint8_t> aad,
                            std::span<const std::uint8_t> sealed,
                            std::size_t tag_len = 16) const;

  // Table-driven multiply by H (exposed for the equivalence test).
  U128 mul_h(const U128& x) const;

 private:
  void ghash_absorb(U128& state, std::span<const std::uint8_t> data) const;
  void derive_j0(std::span<const std::uint8_t> iv, std::uint8_t j0[16]) const;
  void ctr_crypt(const std::uint8_t j0[16], std::span<const std::uint8_t> in,
                 std::uint8_t* out) const;
  void compute_tag(const std::uint8_t j0[16], std::span<const std::uint8_t> aad,
                   std::span<const std::uint8_t> ct, std::uint8_t tag[16]) const;

  Aes aes_;
  std::array<U128, 256> htable_{};  // htable_[v] = (byte v at position 0) * H
};

}  // namespace tagrand

#endif  // TAGRAND_GCM_HPP_
