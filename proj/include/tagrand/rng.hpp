// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic pseudo-random material for the whole harness.  Everything
// here is pinned bit-exactly so that runs are reproducible from a single
// 64-bit seed and so that external reimplementations (e.g. the Python
// fixtures under tests/oracle/) can generate identical byte streams.
//
// Generator: splitmix64.  The state advances additively by the golden-ratio
// increment and each output is an avalanching finalizer of the state, which
// makes random access O(1): output block i (0-based) is
// finalize(seed + (i + 1) * kGamma), serialized little-endian.

#ifndef TAGRAND_RNG_HPP_
#define TAGRAND_RNG_HPP_

#include <cstdint>
#include <span>

namespace tagrand {

class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::uint64_t finalize(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t next() {
    state_ += kGamma;
    return finalize(state_);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, bound).  Bias is at most bound/2^64, which is negligible
  // for the small bounds used internally (populations, node indices, ...).
  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

// Infinite deterministic byte stream over a splitmix64 sequence.  Byte j is
// byte (j mod 8) of the (j/8 + 1)-th splitmix64 output, little-endian.  Both
// sequential (fill) and random (byte_at / fill_at) access observe the same
// stream.
class ByteStream {
 public:
  explicit ByteStream(std::uint64_t seed) : seed_(seed) {}

  std::uint8_t byte_at(std::uint64_t index) const {
    std::uint64_t word =
        SplitMix64::finalize(seed_ + (index / 8 + 1) * SplitMix64::kGamma);
    return static_cast<std::uint8_t>(word >> (8 * (index % 8)));
  }

  void fill_at(std::uint64_t index, std::span<std::uint8_t> out) const {
    std::size_t i = 0;
    // Leading partial word.
    while (i < out.size() && (index + i) % 8 != 0) {
      out[i] = byte_at(index + i);
      ++i;
    }
    // Whole words.
    while (i + 8 <= out.size()) {
      std::uint64_t word = SplitMix64::finalize(
          seed_ + ((index + i) / 8 + 1) * SplitMix64::kGamma);
      for (int b = 0; b < 8; ++b) {
        out[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
      }
      i += 8;
    }
    // Trailing partial word.
    while (i < out.size()) {
      out[i] = byte_at(index + i);
      ++i;
    }
  }

  // Sequential interface; continues where the previous fill stopped.
  void fill(std::span<std::uint8_t> out) {
    fill_at(pos_, out);
    pos_ += out.size();
  }

  std::uint64_t position() const { return pos_; }
  void seek(std::uint64_t pos) { pos_ = pos; }

 private:
  std::uint64_t seed_;
  std::uint64_t pos_ = 0;
};

// Domain-separated seed derivation: independent sub-seeds for the different
// consumers of the master seed.  derive_seed(s, d) = splitmix64(s ^ d).next().
// Chain derive_seed calls with an integer index for per-run / per-context
// sub-streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t domain) {
  return SplitMix64(seed ^ domain).next();
}

namespace domains {
// Arbitrary fixed 64-bit tags (ASCII mnemonics); part of the stream format.
inline constexpr std::uint64_t kKeyDerive = 0x6b65792d64657276ULL;   // key-derv
inline constexpr std::uint64_t kPmnRandom = 0x706d6e2d72616e64ULL;   // pmn-rand
inline constexpr std::uint64_t kReference = 0x7265662d67656e30ULL;   // ref-gen0
inline constexpr std::uint64_t kSacSample = 0x7361632d73616d70ULL;   // sac-samp
inline constexpr std::uint64_t kEacircRun = 0x6561632d72756e30ULL;   // eac-run0
inline constexpr std::uint64_t kGenome    = 0x67656e6f6d652d30ULL;   // genome-0
inline constexpr std::uint64_t kWinSplit  = 0x77696e2d73706c30ULL;   // win-spl0
}  // namespace domains

}  // namespace tagrand

#endif  // TAGRAND_RNG_HPP_
