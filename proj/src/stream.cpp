// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "tagrand/stream.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tagrand/rng.hpp"

namespace tagrand {

const char* to_string(PmnMode mode) {
  switch (mode) {
    case PmnMode::kZero:
      return "zero";
    case PmnMode::kCounter:
      return "counter";
    case PmnMode::kRandom:
      return "random";
  }
  return "?";
}

PmnMode pmn_mode_from_string(const std::string& s) {
  if (s == "zero") return PmnMode::kZero;
  if (s == "counter") return PmnMode::kCounter;
  if (s == "random") return PmnMode::kRandom;
  throw std::invalid_argument("unknown scenario '" + s +
                              "' (expected zero, counter or random)");
}

Bytes derive_key(std::uint64_t master_seed, std::size_t key_len) {
  Bytes key(key_len);
  ByteStream(derive_seed(master_seed, domains::kKeyDerive)).fill(key);
  return key;
}

Bytes plaintext_at(std::uint64_t index, std::size_t len) {
  return le_counter(index, len);
}

PmnSequence::PmnSequence(PmnMode mode, std::size_t pmn_len,
                         std::uint64_t master_seed)
    : mode_(mode),
      pmn_len_(pmn_len),
      seed_(derive_seed(master_seed, domains::kPmnRandom)) {}

Bytes PmnSequence::at(std::uint64_t index) {
  switch (mode_) {
    case PmnMode::kZero:
      return Bytes(pmn_len_, 0);
    case PmnMode::kCounter:
      return le_counter(index, pmn_len_);
    case PmnMode::kRandom:
      break;
  }
  if (pmn_len_ == 0) {
    throw std::overflow_error("random pmn: zero-length field cannot be unique");
  }
  if (pmn_len_ >= 8) {
    // The stream's underlying word permutation is a bijection, and each
    // value occupies whole words, so the leading 8 bytes of distinct
    // indices are distinct 64-bit values: uniqueness by construction.
    const std::uint64_t blocks_per = (pmn_len_ + 7) / 8;
    Bytes out(pmn_len_);
    ByteStream(seed_).fill_at(index * blocks_per * 8, out);
    return out;
  }
  // Narrow field: rejection-sample against the history.  Deterministic for
  // a given seed, so replaying indices yields identical values.
  const std::uint64_t space = 1ull << (8 * pmn_len_);
  if (index >= space) {
    throw std::overflow_error("random pmn: field space exhausted");
  }
  std::unordered_set<std::uint64_t> seen;
  for (const Bytes& b : small_cache_) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    seen.insert(v);
  }
  ByteStream stream(seed_);
  stream.seek(small_cursor_);
  while (small_cache_.size() <= index) {
    Bytes candidate(pmn_len_);
    stream.fill(candidate);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      v |= static_cast<std::uint64_t>(candidate[i]) << (8 * i);
    }
    if (seen.insert(v).second) {
      small_cache_.push_back(std::move(candidate));
    }
  }
  small_cursor_ = stream.position();
  return small_cache_[index];
}

TagStream generate_stream(const StreamConfig& config) {
  const AeadImpl& impl = CipherRegistry::instance().require(config.cipher);
  const CipherSpec& spec = impl.spec();

  TagStream out;
  out.config = config;
  out.tag_len = spec.tag_len;
  out.bytes.reserve(config.num_tags * spec.tag_len);

  const Bytes key = derive_key(config.master_seed, spec.key_len);
  const Bytes adata(config.adata_len, 0);
  const Bytes smn(spec.smn_len, 0);
  PmnSequence pmns(config.mode, spec.pmn_len, config.master_seed);

  for (std::uint64_t i = 0; i < config.num_tags; ++i) {
    const Bytes pt = plaintext_at(i, config.plaintext_len);
    const Bytes pmn = pmns.at(i);
    const Bytes sealed = impl.encrypt({pt, adata, key, smn, pmn});
    const Bytes tag = extract_tag(sealed, pt.size(), spec);
    out.bytes.insert(out.bytes.end(), tag.begin(), tag.end());
  }
  return out;
}

Bytes stream_tag_at(const StreamConfig& config, std::uint64_t index) {
  const AeadImpl& impl = CipherRegistry::instance().require(config.cipher);
  const CipherSpec& spec = impl.spec();
  const Bytes key = derive_key(config.master_seed, spec.key_len);
  const Bytes adata(config.adata_len, 0);
  const Bytes smn(spec.smn_len, 0);
  PmnSequence pmns(config.mode, spec.pmn_len, config.master_seed);
  const Bytes pt = plaintext_at(index, config.plaintext_len);
  const Bytes sealed = impl.encrypt({pt, adata, key, smn, pmns.at(index)});
  return extract_tag(sealed, pt.size(), spec);
}

void export_stream(const TagStream& stream, const std::string& path) {
  {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(stream.bytes.data()),
            static_cast<std::streamsize>(stream.bytes.size()));
  }
  nlohmann::ordered_json meta;
  meta["format"] = "tagrand-stream";
  meta["version"] = 1;
  meta["cipher"] = stream.config.cipher;
  meta["mode"] = to_string(stream.config.mode);
  meta["num_tags"] = stream.config.num_tags;
  meta["tag_len"] = stream.tag_len;
  meta["master_seed"] = stream.config.master_seed;
  meta["plaintext_len"] = stream.config.plaintext_len;
  meta["adata_len"] = stream.config.adata_len;
  std::ofstream mf(path + ".meta.json");
  if (!mf) throw std::runtime_error("cannot open for writing: " + path);
  mf << meta.dump(2) << "\n";
}

TagStream import_stream(const std::string& path) {
  std::ifstream mf(path + ".meta.json");
  if (!mf) throw std::runtime_error("missing sidecar: " + path + ".meta.json");
  nlohmann::json meta = nlohmann::json::parse(mf);
  if (meta.at("format") != "tagrand-stream" || meta.at("version") != 1) {
    throw std::runtime_error("unrecognized stream format in sidecar");
  }
  TagStream out;
  out.config.cipher = meta.at("cipher").get<std::string>();
  out.config.mode = pmn_mode_from_string(meta.at("mode").get<std::string>());
  out.config.num_tags = meta.at("num_tags").get<std::uint64_t>();
  out.config.master_seed = meta.at("master_seed").get<std::uint64_t>();
  out.config.plaintext_len = meta.at("plaintext_len").get<std::size_t>();
  out.config.adata_len = meta.at("adata_len").get<std::size_t>();
  out.tag_len = meta.at("tag_len").get<std::size_t>();

  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  out.bytes.assign(std::istreambuf_iterator<char>(f),
                   std::istreambuf_iterator<char>());
  if (out.bytes.size() != out.config.num_tags * out.tag_len) {
    throw std::runtime_error("stream length disagrees with sidecar");
  }
  return out;
}

}  // namespace tagrand
