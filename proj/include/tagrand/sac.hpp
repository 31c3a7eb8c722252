// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Strict-avalanche-criterion analyzer: estimates, for a chosen input field
// of an AEAD cipher, the probability that complementing one input bit flips
// each authentication-tag bit.  An ideal cipher sits at 1/2 everywhere;
// deterministic tag differences (the broken-avalanche case) pin entries to
// exactly 0 or 1.

#ifndef TAGRAND_SAC_HPP_
#define TAGRAND_SAC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tagrand/aead.hpp"

namespace tagrand {

enum class SacField { kPlaintext, kPmn, kKey };

const char* to_string(SacField field);
SacField sac_field_from_string(const std::string& s);  // throws invalid_argument

struct SacConfig {
  SacField field = SacField::kPlaintext;
  // Fresh: every sample draws its own random key, message numbers and base
  // plaintext.  Fixed: key derived once from the seed, zero message numbers
  // and associated data, counter plaintext -- the same schedule the
  // zero-PMN stream scenario uses, so results line up with it.
  bool fresh_context = true;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::size_t plaintext_len = 16;
  std::size_t adata_len = 2;  // associated data is always zero bytes
};

struct AvalancheMatrix {
  std::size_t rows = 0;     // input bits of the flipped field
  std::size_t cols = 0;     // tag bits
  std::size_t samples = 0;
  std::vector<double> entries;  // row-major flip probabilities in [0,1]

  double at(std::size_t i, std::size_t j) const {
    return entries[i * cols + j];
  }
};

// entry[i][j] = fraction of samples in which complementing field bit i
// (most significant bit of each byte first) flipped tag bit j.  Throws
// std::invalid_argument for an empty field or zero samples; cipher errors
// propagate.
AvalancheMatrix avalanche_matrix(const AeadImpl& cipher,
                                 const SacConfig& config);

// Max over entries of |entry - 1/2|.
double sac_deviation(const AvalancheMatrix& m);

// True iff sac_deviation(m) <= tolerance (boundary passes).  Throws
// std::invalid_argument unless tolerance > 0.
bool sac_pass(const AvalancheMatrix& m, double tolerance);

// CSV: header row of tag bit indices, one row per input bit.
std::string render_csv(const AvalancheMatrix& m);

}  // namespace tagrand

#endif  // TAGRAND_SAC_HPP_
