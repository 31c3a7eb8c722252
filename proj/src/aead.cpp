// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "tagrand/aead.hpp"

#include <sstream>

#include "tagrand/rng.hpp"

namespace tagrand {
namespace {

void check_len(const char* what, std::size_t got, std::size_t want,
               const std::string& cipher) {
  if (got != want) {
    std::ostringstream os;
    os << cipher << ": " << what << " length " << got << ", expected " << want;
    throw LengthError(os.str());
  }
}

}  // namespace

Bytes AeadImpl::encrypt(const AeadInputs& in) const {
  check_len("key", in.key.size(), spec_.key_len, spec_.name);
  check_len("smn", in.smn.size(), spec_.smn_len, spec_.name);
  check_len("pmn", in.pmn.size(), spec_.pmn_len, spec_.name);
  Bytes out = do_encrypt(in);
  if (out.size() != in.plaintext.size() + spec_.tag_len) {
    throw std::logic_error(spec_.name + ": implementation produced " +
                           std::to_string(out.size()) + " bytes, expected " +
                           std::to_string(in.plaintext.size() + spec_.tag_len));
  }
  return out;
}

std::optional<Bytes> AeadImpl::decrypt(std::span<const std::uint8_t> sealed,
                                       std::span<const std::uint8_t> adata,
                                       std::span<const std::uint8_t> key,
                                       std::span<const std::uint8_t> smn,
                                       std::span<const std::uint8_t> pmn) const {
  check_len("key", key.size(), spec_.key_len, spec_.name);
  check_len("smn", smn.size(), spec_.smn_len, spec_.name);
  check_len("pmn", pmn.size(), spec_.pmn_len, spec_.name);
  if (sealed.size() < spec_.tag_len) {
    return std::nullopt;  // truncated input cannot authenticate
  }
  return do_decrypt(sealed, adata, key, smn, pmn);
}

Bytes extract_tag(std::span<const std::uint8_t> sealed, std::size_t pt_len,
                  const CipherSpec& spec) {
  if (sealed.size() != pt_len + spec.tag_len) {
    throw LengthError(spec.name + ": sealed length " +
                      std::to_string(sealed.size()) + ", expected " +
                      std::to_string(pt_len + spec.tag_len));
  }
  return Bytes(sealed.begin() + static_cast<std::ptrdiff_t>(pt_len),
               sealed.end());
}

CipherRegistry::CipherRegistry() {
  add(make_aes_gcm(16));
  add(make_aes_gcm(32));
  add(make_xortag());
  add(make_prftag());
}

CipherRegistry& CipherRegistry::instance() {
  static CipherRegistry registry;
  return registry;
}

void CipherRegistry::add(std::unique_ptr<AeadImpl> impl) {
  const std::string name = impl->spec().name;
  if (!impls_.emplace(name, std::move(impl)).second) {
    throw std::invalid_argument("cipher already registered: " + name);
  }
}

const AeadImpl* CipherRegistry::find(const std::string& name) const {
  auto it = impls_.find(name);
  return it == impls_.end() ? nullptr : it->second.get();
}

const AeadImpl& CipherRegistry::require(const std::string& name) const {
  const AeadImpl* impl = find(name);
  if (impl == nullptr) {
    std::string known;
    for (const auto& [n, _] : impls_) {
      known += known.empty() ? n : ", " + n;
    }
    throw UnknownCipher("unknown cipher '" + name + "' (known: " + known + ")");
  }
  return *impl;
}

std::vector<std::string> CipherRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(impls_.size());
  for (const auto& [n, _] : impls_) out.push_back(n);
  return out;
}

RoundtripReport roundtrip_check(const AeadImpl& impl, std::size_t trials,
                                std::uint64_t seed) {
  const CipherSpec& spec = impl.spec();
  RoundtripReport report;
  report.trials = trials;
  ByteStream material(derive_seed(seed, 0x726f756e64747269ULL));  // "roundtri"
  SplitMix64 lens(derive_seed(seed, 0x6c656e2d64726177ULL));      // "len-draw"
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t pt_len = lens.next_below(49);
    const std::size_t ad_len = lens.next_below(17);
    Bytes key(spec.key_len), smn(spec.smn_len), pmn(spec.pmn_len);
    Bytes pt(pt_len), ad(ad_len);
    material.fill(key);
    material.fill(smn);
    material.fill(pmn);
    material.fill(pt);
    material.fill(ad);
    const Bytes sealed = impl.encrypt({pt, ad, key, smn, pmn});
    const std::optional<Bytes> back = impl.decrypt(sealed, ad, key, smn, pmn);
    if (!back.has_value() || *back != pt) {
      ++report.failures;
      if (report.first_failure.empty()) {
        report.first_failure =
            "trial " + std::to_string(t) + ": " +
            (back.has_value() ? "plaintext mismatch" : "authentication failed") +
            " (pt_len=" + std::to_string(pt_len) +
            ", ad_len=" + std::to_string(ad_len) + ")";
      }
    }
  }
  return report;
}

}  // namespace tagrand
