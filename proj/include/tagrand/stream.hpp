// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Tag-stream generation: drive an AEAD cipher over a deterministic input
// schedule and concatenate the authentication tags.  The schedule models
// nonce misuse: the plaintext is a little-endian block counter, associated
// data and secret message number are fixed zeros, the key is random but
// fixed for the stream, and the public message number follows one of three
// scenarios -- all zeros (full reuse), a counter (normal use), or fresh
// random values.

#ifndef TAGRAND_STREAM_HPP_
#define TAGRAND_STREAM_HPP_

#include <cstdint>
#include <string>

#include "tagrand/aead.hpp"
#include "tagrand/bytes.hpp"

namespace tagrand {

enum class PmnMode { kZero, kCounter, kRandom };

const char* to_string(PmnMode mode);
PmnMode pmn_mode_from_string(const std::string& s);  // throws invalid_argument

struct StreamConfig {
  std::string cipher = "aes128gcm";
  PmnMode mode = PmnMode::kZero;
  std::uint64_t num_tags = 0;
  std::uint64_t master_seed = 0;
  std::size_t plaintext_len = 16;
  std::size_t adata_len = 2;
};

// Key material for a stream: leading key_len bytes of the byte stream seeded
// with derive_seed(master_seed, key-derivation domain).
Bytes derive_key(std::uint64_t master_seed, std::size_t key_len);

// Little-endian block counter; throws std::overflow_error if index does not
// fit in len bytes.
Bytes plaintext_at(std::uint64_t index, std::size_t len);

// Public message numbers for one stream.  Zero and counter modes are pure
// functions of the index; random mode draws from the dedicated sub-stream
// and guarantees values never repeat within a stream (for fields of at
// least 8 bytes the generator's word permutation makes distinct indices
// collision-free by construction; narrower fields fall back to stateful
// rejection of repeats).
class PmnSequence {
 public:
  PmnSequence(PmnMode mode, std::size_t pmn_len, std::uint64_t master_seed);

  Bytes at(std::uint64_t index);

 private:
  PmnMode mode_;
  std::size_t pmn_len_;
  std::uint64_t seed_;
  // Rejection-sampled history for narrow random fields.
  std::vector<Bytes> small_cache_;
  std::uint64_t small_cursor_ = 0;
};

struct TagStream {
  StreamConfig config;
  std::size_t tag_len = 0;
  Bytes bytes;  // num_tags * tag_len
};

// Generates the full stream; throws UnknownCipher / LengthError /
// std::overflow_error on configuration problems.
TagStream generate_stream(const StreamConfig& config);

// Single stream element (tag of the index-th encryption); equals the
// corresponding slice of generate_stream's output.
Bytes stream_tag_at(const StreamConfig& config, std::uint64_t index);

// Raw tag bytes at `path` plus a JSON sidecar at `path + ".meta.json"`
// recording the generation parameters.
void export_stream(const TagStream& stream, const std::string& path);
TagStream import_stream(const std::string& path);

}  // namespace tagrand

#endif  // TAGRAND_STREAM_HPP_
