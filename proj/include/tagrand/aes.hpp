// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// AES block cipher, encryption direction only (the modes built on top --
// GCM, CTR, CBC-MAC -- never need the inverse cipher).

#ifndef TAGRAND_AES_HPP_
#define TAGRAND_AES_HPP_

#include <array>
#include <cstdint>
#include <span>

namespace tagrand {

class Aes {
 public:
  // Accepts 16-, 24- or 32-byte keys; throws std::invalid_argument otherwise.
  explicit Aes(std::span<const std::uint8_t> key);

  void encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const;

  int rounds() const { return rounds_; }

 private:
  std::array<std::uint32_t, 60> rk_{};
  int rounds_ = 0;
};

}  // namespace tagrand

#endif  // TAGRAND_AES_HPP_
