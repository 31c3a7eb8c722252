// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "tagrand/gcm.hpp"

#include <cstring>
#include <stdexcept>

namespace tagrand {
namespace {

inline std::uint64_t load_be64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

inline void store_be64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    p[i] = static_cast<std::uint8_t>(v);
    v >>= 8;
  }
}

inline U128 load_block(const std::uint8_t* p) {
  return {load_be64(p), load_be64(p + 8)};
}

inline void store_block(std::uint8_t* p, const U128& v) {
  store_be64(p, v.hi);
  store_be64(p + 8, v.lo);
}

// Multiply by x (one-bit shift toward higher polynomial powers, i.e. a
// right shift of the big-endian bit string) with reduction.
inline U128 mulx(U128 v) {
  const bool carry = v.lo & 1;
  v.lo = (v.lo >> 1) | (v.hi << 63);
  v.hi >>= 1;
  if (carry) v.hi ^= 0xe100000000000000ULL;
  return v;
}

// Reduction table for byte-wise shifts: kShift8Red[v] is the reduced
// contribution of the byte v that falls off the low end when the 128-bit
// string is shifted right by 8 bits.
struct Shift8Table {
  U128 red[256];
  Shift8Table() {
    U128 contrib[8];
    for (int k = 0; k < 8; ++k) {
      // Coefficient at string position 127 - k, shifted right by 8:
      // alpha^(135-k) reduced.  Start from alpha^127 (lo bit set) and apply
      // mulx (8 - k) times.
      U128 v{0, 1};
      for (int s = 0; s < 8 - k; ++s) v = mulx(v);
      contrib[k] = v;
    }
    for (int b = 0; b < 256; ++b) {
      U128 acc{0, 0};
      for (int k = 0; k < 8; ++k) {
        if (b & (1 << k)) {
          acc.hi ^= contrib[k].hi;
          acc.lo ^= contrib[k].lo;
        }
      }
      red[b] = acc;
    }
  }
};

const Shift8Table kShift8;

inline U128 shift8(U128 v) {
  const std::uint8_t dropped = static_cast<std::uint8_t>(v.lo);
  v.lo = (v.lo >> 8) | (v.hi << 56);
  v.hi >>= 8;
  const U128& r = kShift8.red[dropped];
  v.hi ^= r.hi;
  v.lo ^= r.lo;
  return v;
}

inline void inc32(std::uint8_t ctr[16]) {
  for (int i = 15; i >= 12; --i) {
    if (++ctr[i] != 0) break;
  }
}

}  // namespace

U128 gf128_mul_bitwise(const U128& x, const U128& y) {
  U128 z{0, 0};
  U128 v = y;
  for (int i = 0; i < 128; ++i) {
    const bool bit = (i < 64) ? ((x.hi >> (63 - i)) & 1)
                              : ((x.lo >> (127 - i)) & 1);
    if (bit) {
      z.hi ^= v.hi;
      z.lo ^= v.lo;
    }
    v = mulx(v);
  }
  return z;
}

Gcm::Gcm(std::span<const std::uint8_t> key) : aes_(key) {
  std::uint8_t zero[16] = {0};
  std::uint8_t hbytes[16];
  aes_.encrypt_block(zero, hbytes);
  const U128 h = load_block(hbytes);

  // htable_[1 << (7 - j)] = H * alpha^j; other entries by linearity.
  U128 w = h;
  for (int j = 0; j < 8; ++j) {
    htable_[0x80 >> j] = w;
    w = mulx(w);
  }
  for (int i = 2; i < 256; i <<= 1) {
    for (int j = 1; j < i; ++j) {
      htable_[i + j] = {htable_[i].hi ^ htable_[j].hi,
                        htable_[i].lo ^ htable_[j].lo};
    }
  }
}

U128 Gcm::mul_h(const U128& x) const {
  // Horner over the 16 bytes of x, most significant (lowest polynomial
  // position) byte last.
  std::uint8_t bytes[16];
  store_block(bytes, x);
  U128 acc = htable_[bytes[15]];
  for (int b = 14; b >= 0; --b) {
    acc = shift8(acc);
    const U128& t = htable_[bytes[b]];
    acc.hi ^= t.hi;
    acc.lo ^= t.lo;
  }
  return acc;
}

void Gcm::ghash_absorb(U128& state, std::span<const std::uint8_t> data) const {
  std::size_t i = 0;
  while (i + 16 <= data.size()) {
    const U128 blk = load_block(data.data() + i);
    state.hi ^= blk.hi;
    state.lo ^= blk.lo;
    state = mul_h(state);
    i += 16;
  }
  if (i < data.size()) {
    std::uint8_t last[16] = {0};
    std::memcpy(last, data.data() + i, data.size() - i);
    const U128 blk = load_block(last);
    state.hi ^= blk.hi;
    state.lo ^= blk.lo;
    state = mul_h(state);
  }
}

void Gcm::derive_j0(std::span<const std::uint8_t> iv, std::uint8_t j0[16]) const {
  if (iv.size() == 12) {
    std::memcpy(j0, iv.data(), 12);
    j0[12] = j0[13] = j0[14] = 0;
    j0[15] = 1;
    return;
  }
  U128 s{0, 0};
  ghash_absorb(s, iv);
  s.lo ^= static_cast<std::uint64_t>(iv.size()) * 8;
  s = mul_h(s);
  store_block(j0, s);
}

void Gcm::ctr_crypt(const std::uint8_t j0[16], std::span<const std::uint8_t> in,
                    std::uint8_t* out) const {
  std::uint8_t ctr[16];
  std::memcpy(ctr, j0, 16);
  std::size_t off = 0;
  while (off < in.size()) {
    inc32(ctr);
    std::uint8_t ks[16];
    aes_.encrypt_block(ctr, ks);
    const std::size_t chunk = std::min<std::size_t>(16, in.size() - off);
    for (std::size_t i = 0; i < chunk; ++i) {
      out[off + i] = in[off + i] ^ ks[i];
    }
    off += chunk;
  }
}

void Gcm::compute_tag(const std::uint8_t j0[16],
                      std::span<const std::uint8_t> aad,
                      std::span<const std::uint8_t> ct,
                      std::uint8_t tag[16]) const {
  U128 s{0, 0};
  ghash_absorb(s, aad);
  ghash_absorb(s, ct);
  s.hi ^= static_cast<std::uint64_t>(aad.size()) * 8;
  s.lo ^= static_cast<std::uint64_t>(ct.size()) * 8;
  s = mul_h(s);
  std::uint8_t mask[16];
  aes_.encrypt_block(j0, mask);
  std::uint8_t sb[16];
  store_block(sb, s);
  for (int i = 0; i < 16; ++i) tag[i] = sb[i] ^ mask[i];
}

Bytes Gcm::seal(std::span<const std::uint8_t> iv,
                std::span<const std::uint8_t> aad,
                std::span<const std::uint8_t> plaintext,
                std::size_t tag_len) const {
  if (tag_len < 4 || tag_len > 16) {
    throw std::invalid_argument("Gcm::seal: tag length out of range");
  }
  if (iv.empty()) {
    throw std::invalid_argument("Gcm::seal: empty IV");
  }
  std::uint8_t j0[16];
  derive_j0(iv, j0);
  Bytes out(plaintext.size() + tag_len);
  ctr_crypt(j0, plaintext, out.data());
  std::uint8_t tag[16];
  compute_tag(j0, aad, {out.data(), plaintext.size()}, tag);
  std::memcpy(out.data() + plaintext.size(), tag, tag_len);
  return out;
}

std::optional<Bytes> Gcm::open(std::span<const std::uint8_t> iv,
                               std::span<const std::uint8_t> aad,
                               std::span<const std::uint8_t> sealed,
                               std::size_t tag_len) const {
  if (tag_len < 4 || tag_len > 16 || sealed.size() < tag_len || iv.empty()) {
    return std::nullopt;
  }
  const std::size_t ct_len = sealed.size() - tag_len;
  std::uint8_t j0[16];
  derive_j0(iv, j0);
  std::uint8_t tag[16];
  compute_tag(j0, aad, sealed.first(ct_len), tag);
  std::uint8_t diff = 0;
  for (std::size_t i = 0; i < tag_len; ++i) {
    diff |= static_cast<std::uint8_t>(tag[i] ^ sealed[ct_len + i]);
  }
  if (diff != 0) {
    return std::nullopt;
  }
  Bytes pt(ct_len);
  ctr_crypt(j0, sealed.first(ct_len), pt.data());
  return pt;
}

}  // namespace tagrand
