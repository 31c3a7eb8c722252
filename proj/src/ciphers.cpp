// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Built-in cipher implementations: AES-GCM (the subject of study) and the
// two calibration controls -- xortag, a deliberately weak toy whose tags
// leak plaintext/nonce structure in every scenario, and prftag, a
// misuse-resistant construction whose tags stay pseudorandom even under
// nonce reuse.

#include <cstring>

#include "tagrand/aead.hpp"
#include "tagrand/aes.hpp"
#include "tagrand/gcm.hpp"

namespace tagrand {
namespace {

class GcmAead final : public AeadImpl {
 public:
  explicit GcmAead(std::size_t key_len)
      : AeadImpl({key_len == 16 ? "aes128gcm" : "aes256gcm",
                  key_len, /*pmn_len=*/12, /*smn_len=*/0, /*tag_len=*/16}) {}

  Bytes do_encrypt(const AeadInputs& in) const override {
    return Gcm(in.key).seal(in.pmn, in.adata, in.plaintext, spec().tag_len);
  }

  std::optional<Bytes> do_decrypt(std::span<const std::uint8_t> sealed,
                                  std::span<const std::uint8_t> adata,
                                  std::span<const std::uint8_t> key,
                                  std::span<const std::uint8_t>,
                                  std::span<const std::uint8_t> pmn)
      const override {
    return Gcm(key).open(pmn, adata, sealed, spec().tag_len);
  }
};

// xortag: ct[i] = pt[i] ^ key[i mod 16]; tag = key ^ pad16(pmn) ^ fold16(pt)
// where fold16 XOR-folds the plaintext into a zero-padded 16-byte block.
// The tag is affine in every input, so any honest analysis tool must flag it.
class XorTag final : public AeadImpl {
 public:
  XorTag()
      : AeadImpl({"xortag", /*key_len=*/16, /*pmn_len=*/12, /*smn_len=*/0,
                  /*tag_len=*/16}) {}

  Bytes do_encrypt(const AeadInputs& in) const override {
    Bytes out(in.plaintext.size() + 16);
    for (std::size_t i = 0; i < in.plaintext.size(); ++i) {
      out[i] = in.plaintext[i] ^ in.key[i % 16];
    }
    std::uint8_t tag[16];
    make_tag(in.plaintext, in.key, in.pmn, tag);
    std::memcpy(out.data() + in.plaintext.size(), tag, 16);
    return out;
  }

  std::optional<Bytes> do_decrypt(std::span<const std::uint8_t> sealed,
                                  std::span<const std::uint8_t>,
                                  std::span<const std::uint8_t> key,
                                  std::span<const std::uint8_t>,
                                  std::span<const std::uint8_t> pmn)
      const override {
    const std::size_t pt_len = sealed.size() - 16;
    Bytes pt(pt_len);
    for (std::size_t i = 0; i < pt_len; ++i) {
      pt[i] = sealed[i] ^ key[i % 16];
    }
    std::uint8_t tag[16];
    make_tag(pt, key, pmn, tag);
    std::uint8_t diff = 0;
    for (int i = 0; i < 16; ++i) {
      diff |= static_cast<std::uint8_t>(tag[i] ^ sealed[pt_len + i]);
    }
    if (diff != 0) return std::nullopt;
    return pt;
  }

 private:
  static void make_tag(std::span<const std::uint8_t> pt,
                       std::span<const std::uint8_t> key,
                       std::span<const std::uint8_t> pmn, std::uint8_t tag[16]) {
    for (int i = 0; i < 16; ++i) tag[i] = key[i];
    for (std::size_t i = 0; i < pmn.size(); ++i) tag[i] ^= pmn[i];
    for (std::size_t i = 0; i < pt.size(); ++i) tag[i % 16] ^= pt[i];
  }
};

// prftag: synthetic-IV construction.  tag = CBC-MAC(key, encoding of
// (pmn, smn, adata, plaintext) with 8-byte little-endian length prefixes);
// ciphertext = plaintext XOR CTR keystream with the tag as starting counter.
// Nonce reuse never repeats a (tag, keystream) pair unless the entire input
// repeats, so its tag streams are pseudorandom in every scenario.
class PrfTag final : public AeadImpl {
 public:
  PrfTag()
      : AeadImpl({"prftag", /*key_len=*/16, /*pmn_len=*/12, /*smn_len=*/0,
                  /*tag_len=*/16}) {}

  Bytes do_encrypt(const AeadInputs& in) const override {
    const Aes aes(in.key);
    std::uint8_t tag[16];
    mac(aes, in.pmn, in.smn, in.adata, in.plaintext, tag);
    Bytes out(in.plaintext.size() + 16);
    ctr(aes, tag, in.plaintext, out.data());
    std::memcpy(out.data() + in.plaintext.size(), tag, 16);
    return out;
  }

  std::optional<Bytes> do_decrypt(std::span<const std::uint8_t> sealed,
                                  std::span<const std::uint8_t> adata,
                                  std::span<const std::uint8_t> key,
                                  std::span<const std::uint8_t> smn,
                                  std::span<const std::uint8_t> pmn)
      const override {
    const Aes aes(key);
    const std::size_t pt_len = sealed.size() - 16;
    const std::uint8_t* tag = sealed.data() + pt_len;
    Bytes pt(pt_len);
    ctr(aes, tag, sealed.first(pt_len), pt.data());
    std::uint8_t expect[16];
    mac(aes, pmn, smn, adata, pt, expect);
    std::uint8_t diff = 0;
    for (int i = 0; i < 16; ++i) {
      diff |= static_cast<std::uint8_t>(expect[i] ^ tag[i]);
    }
    if (diff != 0) return std::nullopt;
    return pt;
  }

 private:
  struct CbcMac {
    const Aes& aes;
    std::uint8_t block[16] = {0};
    std::uint8_t state[16] = {0};
    std::size_t fill = 0;

    explicit CbcMac(const Aes& a) : aes(a) {}

    void update(std::span<const std::uint8_t> data) {
      for (std::uint8_t b : data) {
        block[fill++] = b;
        if (fill == 16) flush();
      }
    }

    void update_len(std::uint64_t v) {
      std::uint8_t le[8];
      for (int i = 0; i < 8; ++i) {
        le[i] = static_cast<std::uint8_t>(v >> (8 * i));
      }
      update(le);
    }

    void flush() {
      for (std::size_t i = 0; i < fill; ++i) state[i] ^= block[i];
      aes.encrypt_block(state, state);
      fill = 0;
    }

    void finish(std::uint8_t out[16]) {
      if (fill > 0) flush();
      std::memcpy(out, state, 16);
    }
  };

  static void mac(const Aes& aes, std::span<const std::uint8_t> pmn,
                  std::span<const std::uint8_t> smn,
                  std::span<const std::uint8_t> adata,
                  std::span<const std::uint8_t> pt, std::uint8_t out[16]) {
    CbcMac m(aes);
    m.update_len(pmn.size());
    m.update(pmn);
    m.update_len(smn.size());
    m.update(smn);
    m.update_len(adata.size());
    m.update(adata);
    m.update_len(pt.size());
    m.update(pt);
    m.finish(out);
  }

  static void ctr(const Aes& aes, const std::uint8_t iv[16],
                  std::span<const std::uint8_t> in, std::uint8_t* out) {
    std::uint8_t ctr_block[16];
    std::memcpy(ctr_block, iv, 16);
    std::size_t off = 0;
    std::uint32_t counter = 0;
    while (off < in.size()) {
      ++counter;
      for (int i = 0; i < 4; ++i) {
        ctr_block[12 + i] =
            static_cast<std::uint8_t>(iv[12 + i] ^ (counter >> (8 * (3 - i))));
      }
      std::uint8_t ks[16];
      aes.encrypt_block(ctr_block, ks);
      const std::size_t chunk = std::min<std::size_t>(16, in.size() - off);
      for (std::size_t i = 0; i < chunk; ++i) {
        out[off + i] = in[off + i] ^ ks[i];
      }
      off += chunk;
    }
  }
};

}  // namespace

std::unique_ptr<AeadImpl> make_aes_gcm(std::size_t key_len) {
  return std::make_unique<GcmAead>(key_len);
}

std::unique_ptr<AeadImpl> make_xortag() { return std::make_unique<XorTag>(); }

std::unique_ptr<AeadImpl> make_prftag() { return std::make_unique<PrfTag>(); }

}  // namespace tagrand
