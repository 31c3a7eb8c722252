// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Statistical battery: every test reproduces independently generated
// reference p-values (short hand-checkable strings, a 1024-bit fixture and a
// full 10^6-bit fixture), the special-function backends match the reference
// library to 1e-12, and the two-level interpretation (proportions,
// uniformity, suite verdict) behaves per its definition.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <utility>

#include "tagrand/bytes.hpp"
#include "tagrand/rng.hpp"
#include "tagrand/sts.hpp"

#include "sts_expected.inc"
#include "thresholds.inc"

using namespace tagrand;

namespace {

std::pair<Bytes, std::size_t> pack_bits(const std::string& s) {
  Bytes out((s.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '1') {
      out[i >> 3] |= static_cast<std::uint8_t>(0x80u >> (i & 7));
    }
  }
  return {std::move(out), s.size()};
}

// Relative agreement for values of any magnitude; absolute for exact zero.
void check_close(double got, double want, double eps) {
  if (want == 0.0) {
    CHECK(std::fabs(got) <= eps);
  } else if (std::fabs(want) > 1e-8) {
    CHECK(got == doctest::Approx(want).epsilon(eps));
  } else {
    CHECK(got / want == doctest::Approx(1.0).epsilon(eps));
  }
}

void check_fixture(const BitView& bits, const StsNamedP* expected,
                   std::size_t count, std::size_t serial_m, std::size_t apen_m,
                   std::size_t block_m) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::string test = expected[i].test;
    CAPTURE(test);
    if (test == "monobit") {
      check_close(monobit_test(bits).p_value, expected[i].p, 1e-6);
    } else if (test == "block_frequency") {
      check_close(block_frequency_test(bits, block_m).p_value, expected[i].p,
                  1e-6);
    } else if (test == "runs") {
      check_close(runs_test(bits).p_value, expected[i].p, 1e-6);
    } else if (test == "longest_run") {
      check_close(longest_run_test(bits).p_value, expected[i].p, 1e-6);
    } else if (test == "cusum_forward") {
      check_close(cusum_test(bits, false).p_value, expected[i].p, 1e-6);
    } else if (test == "cusum_backward") {
      check_close(cusum_test(bits, true).p_value, expected[i].p, 1e-6);
    } else if (test == "serial") {
      const auto pr = serial_test(bits, serial_m);
      check_close(pr.first.p_value, expected[i].p, 1e-6);
      check_close(pr.second.p_value, expected[i].p2, 1e-6);
    } else if (test == "approximate_entropy") {
      check_close(approximate_entropy_test(bits, apen_m).p_value,
                  expected[i].p, 1e-6);
    } else if (test == "spectral_dft") {
      check_close(spectral_dft_test(bits).p_value, expected[i].p, 1e-6);
    } else {
      FAIL("unknown fixture test name: " << test);
    }
  }
}

}  // namespace

TEST_CASE("bit view is MSB-first and counts ones over partial bytes") {
  const Bytes data = {0xa0, 0xff};
  const BitView bits(data, 12);
  CHECK(bits.size() == 12);
  const bool expect[12] = {1, 0, 1, 0, 0, 0, 0, 0, 1, 1, 1, 1};
  for (std::size_t i = 0; i < 12; ++i) {
    CAPTURE(i);
    CHECK(bits.bit(i) == expect[i]);
  }
  CHECK(bits.ones() == 6);
  CHECK(BitView(data, 16).ones() == 10);
  CHECK(BitView(data, 3).ones() == 2);
  CHECK_THROWS_AS(BitView(data, 17), std::invalid_argument);
}

TEST_CASE("short reference strings reproduce frozen p-values") {
  for (const StsShortCase& c : kStsShortCases) {
    const std::string name = c.name;
    CAPTURE(name);
    const auto [bytes, nbits] = pack_bits(c.bits);
    const BitView bits(bytes, nbits);
    if (name.rfind("monobit", 0) == 0) {
      check_close(monobit_test(bits).p_value, c.p, 1e-6);
    } else if (name.rfind("runs", 0) == 0) {
      check_close(runs_test(bits).p_value, c.p, 1e-6);
    } else if (name.rfind("block_frequency", 0) == 0) {
      check_close(block_frequency_test(bits, c.param).p_value, c.p, 1e-6);
    } else if (name.rfind("cusum", 0) == 0) {
      check_close(cusum_test(bits, false).p_value, c.p, 1e-6);
    } else if (name.rfind("serial", 0) == 0) {
      const auto pr = serial_test(bits, c.param);
      check_close(pr.first.p_value, c.p, 1e-6);
      check_close(pr.second.p_value, c.p2, 1e-6);
    } else if (name.rfind("apen", 0) == 0) {
      check_close(approximate_entropy_test(bits, c.param).p_value, c.p, 1e-6);
    } else if (name.rfind("dft", 0) == 0) {
      check_close(spectral_dft_test(bits).p_value, c.p, 1e-6);
    } else if (name.rfind("longest_run", 0) == 0) {
      check_close(longest_run_test(bits).p_value, c.p, 1e-6);
    } else {
      FAIL("unknown short case: " << name);
    }
  }
}

TEST_CASE("1024-bit stream fixture reproduces frozen p-values") {
  ByteStream stream(12345);
  Bytes data(128);
  stream.fill(data);
  CHECK(to_hex(Bytes(data.begin(), data.begin() + 16)) == kFixture1024Head);
  const BitView bits(data, 1024);
  check_fixture(bits, kFixture1024Expected, std::size(kFixture1024Expected),
                /*serial_m=*/5, /*apen_m=*/4, /*block_m=*/128);
}

TEST_CASE("10^6-bit stream fixture reproduces frozen p-values") {
  ByteStream stream(derive_seed(kFixture1MSeedBase, domains::kReference));
  Bytes data(125000);
  stream.fill(data);
  CHECK(to_hex(Bytes(data.begin(), data.begin() + 16)) == kFixture1MHead);
  const BitView bits(data, 1'000'000);
  check_fixture(bits, kFixture1MExpected, std::size(kFixture1MExpected),
                /*serial_m=*/16, /*apen_m=*/10, /*block_m=*/128);
}

TEST_CASE("regularized gamma and erfc agree with the reference library") {
  for (const SpecialFnCase& c : kIgamcCases) {
    CAPTURE(c.a);
    CAPTURE(c.x);
    check_close(igamc(c.a, c.x), c.expected, 1e-12);
  }
  for (const SpecialFnCase& c : kErfcCases) {
    CAPTURE(c.x);
    check_close(std::erfc(c.x), c.expected, 1e-12);
  }
  CHECK(igamc(4.5, 0.0) == 1.0);
  CHECK(igamc(4.5, -1.0) == 1.0);  // negative chi-square only via FP jitter
  CHECK_THROWS_AS(igamc(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("binomial thresholds match the reference tables") {
  for (const BinomThreshold& t : kSuiteFailThresholds) {
    CAPTURE(t.trials);
    CHECK(suite_fail_threshold(t.trials, 0.01) == t.value);
  }
  for (const BinomThreshold& t : kValidationThresholds) {
    CAPTURE(t.trials);
    CHECK(validation_threshold(t.trials, 0.01) == t.value);
  }
  for (const BinomThreshold& t : kCampaignThresholds) {
    CAPTURE(t.trials);
    CHECK(binom_quantile(0.99, t.trials, 0.01) == t.value);
  }
  CHECK(binom_cdf(10, 10, 0.5) == 1.0);
  CHECK(binom_cdf(5, 10, 0.5) == doctest::Approx(0.623046875).epsilon(1e-12));
  CHECK(binom_quantile(0.0, 100, 0.5) == 0);
  // Contract: the smallest k whose CDF reaches q (the CDF saturates to 1.0
  // in double precision well before k = n).
  const unsigned top = binom_quantile(1.0, 100, 0.5);
  CHECK(binom_cdf(top, 100, 0.5) == 1.0);
  CHECK((top == 0 || binom_cdf(top - 1, 100, 0.5) < 1.0));
  CHECK_THROWS_AS(binom_cdf(1, 10, 1.5), std::invalid_argument);
}

TEST_CASE("proportion bound and p-value uniformity behave per definition") {
  CHECK(proportion_lower_bound(0.01, 100) ==
        doctest::Approx(0.96015037688680142).epsilon(1e-12));
  CHECK(proportion_lower_bound(0.01, 1000) ==
        doctest::Approx(0.98056072036646857).epsilon(1e-12));

  std::vector<double> uniform;
  for (int rep = 0; rep < 2; ++rep) {
    for (int b = 0; b < 10; ++b) uniform.push_back(0.05 + 0.1 * b);
  }
  CHECK(pvalue_uniformity(uniform) == 1.0);

  const std::vector<double> concentrated(20, 1.0);  // p=1 lands in top bin
  CHECK(pvalue_uniformity(concentrated) < 1e-4);

  CHECK(pvalue_uniformity({}) == 1.0);
}

TEST_CASE("too-short sequences and bad parameters are rejected") {
  const Bytes data(16, 0x5a);
  CHECK_THROWS_AS(monobit_test(BitView(data, 0)), SequenceTooShort);
  CHECK_THROWS_AS(runs_test(BitView(data, 1)), SequenceTooShort);
  CHECK_THROWS_AS(longest_run_test(BitView(data, 100)), SequenceTooShort);
  CHECK_THROWS_AS(spectral_dft_test(BitView(data, 9)), SequenceTooShort);
  CHECK_THROWS_AS(block_frequency_test(BitView(data, 2), 3), SequenceTooShort);
  CHECK_THROWS_AS(serial_test(BitView(data, 3), 4), SequenceTooShort);
  CHECK_THROWS_AS(serial_test(BitView(data, 8), 1), std::invalid_argument);
  CHECK_THROWS_AS(approximate_entropy_test(BitView(data, 3), 3),
                  SequenceTooShort);
  CHECK_THROWS_AS(approximate_entropy_test(BitView(data, 8), 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(block_frequency_test(BitView(data, 8), 0),
                  std::invalid_argument);
}

TEST_CASE("battery slices sequences, runs the roster and passes a reference "
          "stream") {
  BatteryConfig config;
  config.seq_len_bits = 1'000'000;
  config.seq_count = 10;

  const std::size_t bytes_per = 125000;
  Bytes data(bytes_per * config.seq_count);
  ByteStream stream(derive_seed(7, domains::kReference));
  stream.fill(data);

  CHECK_THROWS_AS(
      run_battery(std::span<const std::uint8_t>(data.data(), 100), config),
      InsufficientData);

  const BatteryReport report = run_battery(data, config);
  REQUIRE(report.lines.size() == 10);
  const char* expected_names[] = {
      "monobit",        "block_frequency", "runs",
      "longest_run",    "cusum_forward",   "cusum_backward",
      "serial_1",       "serial_2",        "approximate_entropy",
      "spectral_dft",
  };
  for (std::size_t j = 0; j < report.lines.size(); ++j) {
    CHECK(report.lines[j].name == expected_names[j]);
    CHECK(report.lines[j].pvalues.size() == config.seq_count);
  }

  // Sequence 0 is byte-for-byte the 10^6-bit fixture, so its p-values must
  // match the frozen references (serial contributes lines 6 and 7).
  const double expect_seq0[] = {
      kFixture1MExpected[0].p, kFixture1MExpected[1].p, kFixture1MExpected[2].p,
      kFixture1MExpected[3].p, kFixture1MExpected[4].p, kFixture1MExpected[5].p,
      kFixture1MExpected[6].p, kFixture1MExpected[6].p2,
      kFixture1MExpected[7].p, kFixture1MExpected[8].p,
  };
  for (std::size_t j = 0; j < report.lines.size(); ++j) {
    CAPTURE(j);
    check_close(report.lines[j].pvalues[0], expect_seq0[j], 1e-6);
  }

  CHECK(report.fail_threshold == 1);
  CHECK(report.verdict == Verdict::kPass);
  CHECK(std::string(to_string(report.verdict)) == "PASS");
  for (const TestLine& line : report.lines) {
    CAPTURE(line.name);
    CHECK(line.proportion_bound ==
          doctest::Approx(proportion_lower_bound(0.01, 10)));
    CHECK_FALSE(line.failed());
  }
}

TEST_CASE("suite verdict tolerates one failing line and rejects on two") {
  BatteryReport report;
  report.config.alpha = 0.01;
  report.config.seq_count = 20;
  report.lines.resize(10);
  std::vector<double> uniform;
  for (int rep = 0; rep < 2; ++rep) {
    for (int b = 0; b < 10; ++b) uniform.push_back(0.05 + 0.1 * b);
  }
  for (std::size_t j = 0; j < report.lines.size(); ++j) {
    report.lines[j].name = "line" + std::to_string(j);
    report.lines[j].pvalues = uniform;
  }

  interpret(report);
  CHECK(report.lines_failing == 0);
  CHECK(report.fail_threshold == 1);
  CHECK(report.verdict == Verdict::kPass);

  report.lines[3].pvalues.assign(20, 0.001);
  interpret(report);
  CHECK(report.lines_failing == 1);
  CHECK_FALSE(report.lines[3].proportion_ok);
  CHECK(report.verdict == Verdict::kPass);

  // Concentrated p-values fail the uniformity check even though every one
  // of them clears alpha.
  report.lines[8].pvalues.assign(20, 0.5);
  interpret(report);
  CHECK(report.lines[8].proportion_ok);
  CHECK_FALSE(report.lines[8].uniformity_ok);
  CHECK(report.lines[8].failed());
  CHECK(report.lines_failing == 2);
  CHECK(report.verdict == Verdict::kReject);
  CHECK(std::string(to_string(report.verdict)) == "REJECT");
}
