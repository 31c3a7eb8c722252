// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Authenticated-encryption abstraction used by the stream generator: a
// five-input encrypt (plaintext, associated data, key, secret message
// number, public message number) returning ciphertext with the trailing
// authentication tag, plus the matching verify-and-decrypt.

#ifndef TAGRAND_AEAD_HPP_
#define TAGRAND_AEAD_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tagrand/bytes.hpp"

namespace tagrand {

// An input whose length disagrees with the cipher's declared parameter
// lengths is a caller bug, reported by exception; a failed authentication
// on decrypt is an expected runtime outcome, reported by empty optional.
struct LengthError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownCipher : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CipherSpec {
  std::string name;
  std::size_t key_len = 0;
  std::size_t pmn_len = 0;  // public message number (nonce)
  std::size_t smn_len = 0;  // secret message number
  std::size_t tag_len = 0;  // appended to the ciphertext
};

struct AeadInputs {
  std::span<const std::uint8_t> plaintext;
  std::span<const std::uint8_t> adata;
  std::span<const std::uint8_t> key;
  std::span<const std::uint8_t> smn;
  std::span<const std::uint8_t> pmn;
};

class AeadImpl {
 public:
  virtual ~AeadImpl() = default;

  const CipherSpec& spec() const { return spec_; }

  // Returns ciphertext || tag, length plaintext.size() + tag_len.
  // Throws LengthError if key/smn/pmn lengths disagree with the spec.
  Bytes encrypt(const AeadInputs& in) const;

  // Empty optional signals authentication failure (including truncated
  // input); length errors on key/smn/pmn still throw.
  std::optional<Bytes> decrypt(std::span<const std::uint8_t> sealed,
                               std::span<const std::uint8_t> adata,
                               std::span<const std::uint8_t> key,
                               std::span<const std::uint8_t> smn,
                               std::span<const std::uint8_t> pmn) const;

 protected:
  explicit AeadImpl(CipherSpec spec) : spec_(std::move(spec)) {}

  virtual Bytes do_encrypt(const AeadInputs& in) const = 0;
  virtual std::optional<Bytes> do_decrypt(
      std::span<const std::uint8_t> sealed, std::span<const std::uint8_t> adata,
      std::span<const std::uint8_t> key, std::span<const std::uint8_t> smn,
      std::span<const std::uint8_t> pmn) const = 0;

 private:
  CipherSpec spec_;
};

// Trailing tag_len bytes of a sealed buffer; validates the total length
// against the expected plaintext length.
Bytes extract_tag(std::span<const std::uint8_t> sealed, std::size_t pt_len,
                  const CipherSpec& spec);

class CipherRegistry {
 public:
  static CipherRegistry& instance();

  // Takes ownership; throws std::invalid_argument on duplicate names.
  void add(std::unique_ptr<AeadImpl> impl);

  const AeadImpl* find(const std::string& name) const;

  // Throws UnknownCipher with the list of known names.
  const AeadImpl& require(const std::string& name) const;

  std::vector<std::string> names() const;

 private:
  CipherRegistry();

  std::map<std::string, std::unique_ptr<AeadImpl>> impls_;
};

struct RoundtripReport {
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::string first_failure;  // description of the first mismatch, if any
  bool ok() const { return failures == 0; }
};

// Random-input encrypt/decrypt fidelity check: plaintext and associated
// data lengths vary per trial, all material drawn deterministically from
// the seed.
RoundtripReport roundtrip_check(const AeadImpl& impl, std::size_t trials,
                                std::uint64_t seed);

// Built-in implementations (registered automatically by the registry).
std::unique_ptr<AeadImpl> make_aes_gcm(std::size_t key_len);
std::unique_ptr<AeadImpl> make_xortag();
std::unique_ptr<AeadImpl> make_prftag();

}  // namespace tagrand

#endif  // TAGRAND_AEAD_HPP_
