// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "tagrand/sac.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "tagrand/parallel.hpp"
#include "tagrand/rng.hpp"
#include "tagrand/stream.hpp"

namespace tagrand {
namespace {

struct SampleInputs {
  Bytes key;
  Bytes pmn;
  Bytes smn;
  Bytes plaintext;
  Bytes adata;
};

SampleInputs inputs_for_sample(const CipherSpec& spec, const SacConfig& config,
                               std::uint64_t sample_root, std::size_t s) {
  SampleInputs in;
  in.adata.assign(config.adata_len, 0);
  if (config.fresh_context) {
    ByteStream stream(derive_seed(sample_root, s));
    in.key.resize(spec.key_len);
    stream.fill(in.key);
    in.pmn.resize(spec.pmn_len);
    stream.fill(in.pmn);
    in.smn.resize(spec.smn_len);
    stream.fill(in.smn);
    in.plaintext.resize(config.plaintext_len);
    stream.fill(in.plaintext);
  } else {
    in.key = derive_key(config.seed, spec.key_len);
    in.pmn.assign(spec.pmn_len, 0);
    in.smn.assign(spec.smn_len, 0);
    in.plaintext = plaintext_at(s, config.plaintext_len);
  }
  return in;
}

Bytes* field_buffer(SampleInputs& in, SacField field) {
  switch (field) {
    case SacField::kPlaintext:
      return &in.plaintext;
    case SacField::kPmn:
      return &in.pmn;
    case SacField::kKey:
      return &in.key;
  }
  throw std::invalid_argument("avalanche_matrix: unknown field");
}

}  // namespace

const char* to_string(SacField field) {
  switch (field) {
    case SacField::kPlaintext:
      return "plaintext";
    case SacField::kPmn:
      return "pmn";
    case SacField::kKey:
      return "key";
  }
  throw std::invalid_argument("to_string: unknown avalanche field");
}

SacField sac_field_from_string(const std::string& s) {
  if (s == "plaintext") return SacField::kPlaintext;
  if (s == "pmn") return SacField::kPmn;
  if (s == "key") return SacField::kKey;
  throw std::invalid_argument(
      "unknown avalanche field '" + s + "' (expected plaintext, pmn or key)");
}

AvalancheMatrix avalanche_matrix(const AeadImpl& cipher,
                                 const SacConfig& config) {
  const CipherSpec& spec = cipher.spec();
  if (config.samples < 1) {
    throw std::invalid_argument("avalanche_matrix: need at least one sample");
  }
  std::size_t field_len = 0;
  switch (config.field) {
    case SacField::kPlaintext:
      field_len = config.plaintext_len;
      break;
    case SacField::kPmn:
      field_len = spec.pmn_len;
      break;
    case SacField::kKey:
      field_len = spec.key_len;
      break;
  }
  if (field_len == 0) {
    throw std::invalid_argument(
        std::string("avalanche_matrix: cipher '") + spec.name +
        "' has an empty " + to_string(config.field) + " field");
  }

  const std::size_t rows = field_len * 8;
  const std::size_t cols = spec.tag_len * 8;
  const std::uint64_t sample_root =
      derive_seed(config.seed, domains::kSacSample);

  // Per-worker flip counters, merged at the end; the merged sum (and thus
  // the matrix) does not depend on the worker count.
  const std::size_t workers = worker_count();
  std::vector<std::vector<std::uint32_t>> counts(
      workers, std::vector<std::uint32_t>(rows * cols, 0));

  parallel_for(workers, [&](std::size_t w) {
    std::vector<std::uint32_t>& local = counts[w];
    for (std::size_t s = w; s < config.samples; s += workers) {
      SampleInputs in = inputs_for_sample(spec, config, sample_root, s);
      const AeadInputs base{in.plaintext, in.adata, in.key, in.smn, in.pmn};
      const Bytes base_tag =
          extract_tag(cipher.encrypt(base), in.plaintext.size(), spec);

      Bytes& field = *field_buffer(in, config.field);
      for (std::size_t i = 0; i < rows; ++i) {
        const std::uint8_t mask =
            static_cast<std::uint8_t>(0x80u >> (i & 7));
        field[i >> 3] ^= mask;
        const Bytes tag =
            extract_tag(cipher.encrypt(base), in.plaintext.size(), spec);
        field[i >> 3] ^= mask;
        for (std::size_t j = 0; j < cols; ++j) {
          const std::uint8_t diff = tag[j >> 3] ^ base_tag[j >> 3];
          local[i * cols + j] +=
              static_cast<std::uint32_t>((diff >> (7 - (j & 7))) & 1);
        }
      }
    }
  });

  AvalancheMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.samples = config.samples;
  m.entries.resize(rows * cols);
  for (std::size_t idx = 0; idx < m.entries.size(); ++idx) {
    std::uint64_t total = 0;
    for (std::size_t w = 0; w < workers; ++w) total += counts[w][idx];
    m.entries[idx] =
        static_cast<double>(total) / static_cast<double>(config.samples);
  }
  return m;
}

double sac_deviation(const AvalancheMatrix& m) {
  double dev = 0.0;
  for (double e : m.entries) {
    dev = std::max(dev, std::fabs(e - 0.5));
  }
  return dev;
}

bool sac_pass(const AvalancheMatrix& m, double tolerance) {
  if (!(tolerance > 0.0)) {
    throw std::invalid_argument("sac_pass: tolerance must be positive");
  }
  return sac_deviation(m) <= tolerance;
}

std::string render_csv(const AvalancheMatrix& m) {
  std::string out = "input_bit";
  for (std::size_t j = 0; j < m.cols; ++j) {
    out += ",";
    out += std::to_string(j);
  }
  out += "\n";
  char cell[32];
  for (std::size_t i = 0; i < m.rows; ++i) {
    out += std::to_string(i);
    for (std::size_t j = 0; j < m.cols; ++j) {
      std::snprintf(cell, sizeof(cell), ",%.6f", m.at(i, j));
      out += cell;
    }
    out += "\n";
  }
  return out;
}

}  // namespace tagrand
