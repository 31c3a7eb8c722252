// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "tagrand/aes.hpp"

#include <bit>
#include <stdexcept>

namespace tagrand {
namespace {

constexpr std::uint8_t xtime(std::uint8_t x) {
  return static_cast<std::uint8_t>((x << 1) ^ ((x >> 7) * 0x1b));
}

constexpr std::uint8_t rotl8(std::uint8_t x, int r) {
  return static_cast<std::uint8_t>((x << r) | (x >> (8 - r)));
}

// S-box built from the GF(2^8) inverse (exp/log over generator 3) followed by
// the affine transform, instead of a typed-in table.
constexpr std::array<std::uint8_t, 256> make_sbox() {
  std::array<std::uint8_t, 256> exp{}, log{};
  std::uint8_t x = 1;
  for (int i = 0; i < 255; ++i) {
    exp[i] = x;
    log[x] = static_cast<std::uint8_t>(i);
    x = static_cast<std::uint8_t>(x ^ xtime(x));  // multiply by 3
  }
  std::array<std::uint8_t, 256> sbox{};
  sbox[0] = 0x63;
  for (int a = 1; a < 256; ++a) {
    std::uint8_t inv = exp[(255 - log[a]) % 255];
    std::uint8_t s = static_cast<std::uint8_t>(
        inv ^ rotl8(inv, 1) ^ rotl8(inv, 2) ^ rotl8(inv, 3) ^ rotl8(inv, 4) ^
        0x63);
    sbox[a] = s;
  }
  return sbox;
}

constexpr std::array<std::uint8_t, 256> kSbox = make_sbox();
static_assert(kSbox[0x00] == 0x63 && kSbox[0x01] == 0x7c &&
              kSbox[0x53] == 0xed);

// Combined SubBytes+MixColumns table: kTe[x] packs the column contribution
// (2s, s, s, 3s) big-endian for s = sbox[x]; the other three row positions
// are byte rotations of this word.
constexpr std::array<std::uint32_t, 256> make_te() {
  std::array<std::uint32_t, 256> te{};
  for (int i = 0; i < 256; ++i) {
    std::uint8_t s = kSbox[i];
    te[i] = (static_cast<std::uint32_t>(xtime(s)) << 24) |
            (static_cast<std::uint32_t>(s) << 16) |
            (static_cast<std::uint32_t>(s) << 8) |
            static_cast<std::uint32_t>(xtime(s) ^ s);  // 3s = 2s ^ s
  }
  return te;
}

constexpr std::array<std::uint32_t, 256> kTe = make_te();

inline std::uint32_t load_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) |
         static_cast<std::uint32_t>(p[3]);
}

inline void store_be32(std::uint8_t* p, std::uint32_t v) {
  p[0] = static_cast<std::uint8_t>(v >> 24);
  p[1] = static_cast<std::uint8_t>(v >> 16);
  p[2] = static_cast<std::uint8_t>(v >> 8);
  p[3] = static_cast<std::uint8_t>(v);
}

inline std::uint32_t sub_word(std::uint32_t w) {
  return (static_cast<std::uint32_t>(kSbox[(w >> 24) & 0xff]) << 24) |
         (static_cast<std::uint32_t>(kSbox[(w >> 16) & 0xff]) << 16) |
         (static_cast<std::uint32_t>(kSbox[(w >> 8) & 0xff]) << 8) |
         static_cast<std::uint32_t>(kSbox[w & 0xff]);
}

constexpr std::uint8_t kRcon[] = {0x01, 0x02, 0x04, 0x08, 0x10,
                                  0x20, 0x40, 0x80, 0x1b, 0x36};

}  // namespace

Aes::Aes(std::span<const std::uint8_t> key) {
  const std::size_t nk = key.size() / 4;
  if (key.size() != 16 && key.size() != 24 && key.size() != 32) {
    throw std::invalid_argument("Aes: key must be 16, 24 or 32 bytes");
  }
  rounds_ = static_cast<int>(nk) + 6;
  const std::size_t total = 4 * (rounds_ + 1);
  for (std::size_t i = 0; i < nk; ++i) {
    rk_[i] = load_be32(key.data() + 4 * i);
  }
  for (std::size_t i = nk; i < total; ++i) {
    std::uint32_t temp = rk_[i - 1];
    if (i % nk == 0) {
      temp = sub_word(std::rotl(temp, 8)) ^
             (static_cast<std::uint32_t>(kRcon[i / nk - 1]) << 24);
    } else if (nk > 6 && i % nk == 4) {
      temp = sub_word(temp);
    }
    rk_[i] = rk_[i - nk] ^ temp;
  }
}

void Aes::encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const {
  std::uint32_t s0 = load_be32(in + 0) ^ rk_[0];
  std::uint32_t s1 = load_be32(in + 4) ^ rk_[1];
  std::uint32_t s2 = load_be32(in + 8) ^ rk_[2];
  std::uint32_t s3 = load_be32(in + 12) ^ rk_[3];

  const std::uint32_t* rk = rk_.data() + 4;
  for (int r = 1; r < rounds_; ++r, rk += 4) {
    const std::uint32_t t0 = kTe[(s0 >> 24)] ^ std::rotr(kTe[(s1 >> 16) & 0xff], 8) ^
                             std::rotr(kTe[(s2 >> 8) & 0xff], 16) ^
                             std::rotr(kTe[s3 & 0xff], 24) ^ rk[0];
    const std::uint32_t t1 = kTe[(s1 >> 24)] ^ std::rotr(kTe[(s2 >> 16) & 0xff], 8) ^
                             std::rotr(kTe[(s3 >> 8) & 0xff], 16) ^
                             std::rotr(kTe[s0 & 0xff], 24) ^ rk[1];
    const std::uint32_t t2 = kTe[(s2 >> 24)] ^ std::rotr(kTe[(s3 >> 16) & 0xff], 8) ^
                             std::rotr(kTe[(s0 >> 8) & 0xff], 16) ^
                             std::rotr(kTe[s1 & 0xff], 24) ^ rk[2];
    const std::uint32_t t3 = kTe[(s3 >> 24)] ^ std::rotr(kTe[(s0 >> 16) & 0xff], 8) ^
                             std::rotr(kTe[(s1 >> 8) & 0xff], 16) ^
                             std::rotr(kTe[s2 & 0xff], 24) ^ rk[3];
    s0 = t0;
    s1 = t1;
    s2 = t2;
    s3 = t3;
  }

  // Final round: SubBytes + ShiftRows + AddRoundKey, no MixColumns.
  auto final_word = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c,
                        std::uint32_t d) {
    return (static_cast<std::uint32_t>(kSbox[(a >> 24) & 0xff]) << 24) |
           (static_cast<std::uint32_t>(kSbox[(b >> 16) & 0xff]) << 16) |
           (static_cast<std::uint32_t>(kSbox[(c >> 8) & 0xff]) << 8) |
           static_cast<std::uint32_t>(kSbox[d & 0xff]);
  };
  store_be32(out + 0, final_word(s0, s1, s2, s3) ^ rk[0]);
  store_be32(out + 4, final_word(s1, s2, s3, s0) ^ rk[1]);
  store_be32(out + 8, final_word(s2, s3, s0, s1) ^ rk[2]);
  store_be32(out + 12, final_word(s3, s0, s1, s2) ^ rk[3]);
}

}  // namespace tagrand
