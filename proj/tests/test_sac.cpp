// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Avalanche analyzer: exact matrices for ciphers with deterministic tag
// differences (identity stub, xor control, fixed-context GCM), near-half
// entries for real avalanche at scale, convergence with sample count, and
// the deviation/threshold/CSV plumbing.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "tagrand/aead.hpp"
#include "tagrand/sac.hpp"

using namespace tagrand;

namespace {

// tag = plaintext: flipping plaintext bit i flips exactly tag bit i.
struct IdentityTag : AeadImpl {
  IdentityTag()
      : AeadImpl({"identity-tag", /*key_len=*/16, /*pmn_len=*/0,
                  /*smn_len=*/0, /*tag_len=*/16}) {}

  Bytes do_encrypt(const AeadInputs& in) const override {
    Bytes out(in.plaintext.begin(), in.plaintext.end());
    out.insert(out.end(), in.plaintext.begin(), in.plaintext.end());
    return out;
  }

  std::optional<Bytes> do_decrypt(std::span<const std::uint8_t>,
                                  std::span<const std::uint8_t>,
                                  std::span<const std::uint8_t>,
                                  std::span<const std::uint8_t>,
                                  std::span<const std::uint8_t>) const override {
    return std::nullopt;
  }
};

bool is_exact_zero_one(const AvalancheMatrix& m) {
  for (double e : m.entries) {
    if (e != 0.0 && e != 1.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("avalanche field names round-trip") {
  CHECK(std::string(to_string(SacField::kPlaintext)) == "plaintext");
  CHECK(std::string(to_string(SacField::kPmn)) == "pmn");
  CHECK(std::string(to_string(SacField::kKey)) == "key");
  CHECK(sac_field_from_string("plaintext") == SacField::kPlaintext);
  CHECK(sac_field_from_string("pmn") == SacField::kPmn);
  CHECK(sac_field_from_string("key") == SacField::kKey);
  CHECK_THROWS_AS(sac_field_from_string("adata"), std::invalid_argument);
}

TEST_CASE("identity-tag stub yields exactly the identity matrix") {
  const IdentityTag stub;
  for (const bool fresh : {true, false}) {
    CAPTURE(fresh);
    SacConfig config;
    config.fresh_context = fresh;
    config.samples = 50;
    const AvalancheMatrix m = avalanche_matrix(stub, config);
    REQUIRE(m.rows == 128);
    REQUIRE(m.cols == 128);
    CHECK(m.samples == 50);
    for (std::size_t i = 0; i < m.rows; ++i) {
      for (std::size_t j = 0; j < m.cols; ++j) {
        if (m.at(i, j) != (i == j ? 1.0 : 0.0)) {
          CAPTURE(i);
          CAPTURE(j);
          REQUIRE(m.at(i, j) == (i == j ? 1.0 : 0.0));
        }
      }
    }
    CHECK(sac_deviation(m) == 0.5);
  }
}

TEST_CASE("fixed context pins every entry to 0 or 1 for gcm and xortag") {
  const auto& registry = CipherRegistry::instance();
  SacConfig config;
  config.fresh_context = false;
  config.samples = 200;

  const AvalancheMatrix gcm1 =
      avalanche_matrix(registry.require("aes128gcm"), config);
  CHECK(is_exact_zero_one(gcm1));
  // The flip pattern is nontrivial: each input bit flips some but not all
  // tag bits.
  for (std::size_t i = 0; i < gcm1.rows; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < gcm1.cols; ++j) {
      ones += gcm1.at(i, j) == 1.0 ? 1 : 0;
    }
    CAPTURE(i);
    CHECK(ones > 0);
    CHECK(ones < gcm1.cols);
  }

  // A different key (different seed) produces a different deterministic
  // pattern.
  config.seed = 2;
  const AvalancheMatrix gcm2 =
      avalanche_matrix(registry.require("aes128gcm"), config);
  CHECK(is_exact_zero_one(gcm2));
  CHECK(gcm1.entries != gcm2.entries);

  // The xor control folds plaintext blocks into the tag, so plaintext bit i
  // always flips exactly tag bit i mod 128 -- in any context.
  for (const bool fresh : {false, true}) {
    CAPTURE(fresh);
    SacConfig xconfig;
    xconfig.fresh_context = fresh;
    xconfig.samples = 100;
    const AvalancheMatrix x =
        avalanche_matrix(registry.require("xortag"), xconfig);
    REQUIRE(x.rows == 128);
    REQUIRE(x.cols == 128);
    for (std::size_t i = 0; i < x.rows; ++i) {
      for (std::size_t j = 0; j < x.cols; ++j) {
        if (x.at(i, j) != (i == j ? 1.0 : 0.0)) {
          CAPTURE(i);
          CAPTURE(j);
          REQUIRE(x.at(i, j) == (i == j ? 1.0 : 0.0));
        }
      }
    }
    CHECK(sac_deviation(x) == 0.5);
    CHECK_FALSE(sac_pass(x, 0.02));
  }
}

TEST_CASE("gcm fresh-context avalanche sits near one half at scale") {
  const auto& gcm = CipherRegistry::instance().require("aes128gcm");
  SacConfig config;  // plaintext field, fresh, 10^4 samples, seed 1
  const AvalancheMatrix m = avalanche_matrix(gcm, config);
  REQUIRE(m.rows == 128);
  REQUIRE(m.cols == 128);
  const double dev = sac_deviation(m);
  CHECK(dev < 0.02);
  CHECK(dev > 0.001);  // finite-sample noise, not a degenerate all-0.5 matrix
  CHECK(sac_pass(m, 0.02));
  double mean = 0.0;
  for (double e : m.entries) mean += e;
  mean /= static_cast<double>(m.entries.size());
  CHECK(mean == doctest::Approx(0.5).epsilon(0.002));

  // Message-number and key avalanche behave the same way (smaller sample
  // count keeps this cheap; the bound is correspondingly looser).
  SacConfig quick;
  quick.samples = 2000;
  quick.field = SacField::kPmn;
  const AvalancheMatrix mp = avalanche_matrix(gcm, quick);
  CHECK(mp.rows == 96);
  CHECK(sac_deviation(mp) < 0.06);
  quick.field = SacField::kKey;
  const AvalancheMatrix mk = avalanche_matrix(gcm, quick);
  CHECK(mk.rows == 128);
  CHECK(sac_deviation(mk) < 0.06);
}

TEST_CASE("deviation shrinks as samples grow for a well-behaved cipher") {
  const auto& prf = CipherRegistry::instance().require("prftag");
  SacConfig config;
  config.samples = 400;
  const double dev1 = sac_deviation(avalanche_matrix(prf, config));
  config.samples = 1600;
  const double dev4 = sac_deviation(avalanche_matrix(prf, config));
  const double margin = 3.0 * 0.5 / std::sqrt(400.0);
  CHECK(dev4 <= dev1 + margin);
}

TEST_CASE("deviation and pass threshold arithmetic") {
  AvalancheMatrix m;
  m.rows = 2;
  m.cols = 2;
  m.samples = 10;
  m.entries = {0.5, 0.5, 0.5, 0.5};
  CHECK(sac_deviation(m) == 0.0);
  CHECK(sac_pass(m, 0.02));

  m.entries = {1.0, 0.0, 0.0, 1.0};
  CHECK(sac_deviation(m) == 0.5);
  CHECK_FALSE(sac_pass(m, 0.02));

  m.entries = {0.5, 0.48, 0.5, 0.5};
  CHECK(sac_deviation(m) == doctest::Approx(0.02).epsilon(1e-12));

  // Boundary is inclusive (0.25 is exact in binary, so no tolerance games).
  m.entries = {0.25, 0.5, 0.5, 0.75};
  CHECK(sac_deviation(m) == 0.25);
  CHECK(sac_pass(m, 0.25));
  CHECK_FALSE(sac_pass(m, 0.2499));
  CHECK_THROWS_AS(sac_pass(m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sac_pass(m, -1.0), std::invalid_argument);
}

TEST_CASE("csv export lists tag bits per input bit") {
  AvalancheMatrix m;
  m.rows = 2;
  m.cols = 3;
  m.samples = 4;
  m.entries = {1.0, 0.0, 0.25, 0.5, 0.75, 0.0};
  const std::string csv = render_csv(m);
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "input_bit,0,1,2");
  REQUIRE(std::getline(lines, line));
  CHECK(line == "0,1.000000,0.000000,0.250000");
  REQUIRE(std::getline(lines, line));
  CHECK(line == "1,0.500000,0.750000,0.000000");
  CHECK_FALSE(std::getline(lines, line));
}

TEST_CASE("configuration errors are rejected") {
  const IdentityTag stub;
  SacConfig config;
  config.samples = 0;
  CHECK_THROWS_AS(avalanche_matrix(stub, config), std::invalid_argument);

  config.samples = 1;
  config.field = SacField::kPmn;  // stub has no public message number
  CHECK_THROWS_AS(avalanche_matrix(stub, config), std::invalid_argument);
}
