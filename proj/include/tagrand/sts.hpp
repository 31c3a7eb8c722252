// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Statistical test battery for bit streams: eight classic randomness tests
// producing ten p-values per sequence (the serial test yields two, the
// cumulative-sums test runs in both directions), plus the two-level
// interpretation -- per-test pass proportions with a binomial tolerance
// interval and a chi-square uniformity check over the p-value histogram,
// aggregated into a suite verdict via a binomial quantile on the number of
// failing tests.

#ifndef TAGRAND_STS_HPP_
#define TAGRAND_STS_HPP_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tagrand {

struct SequenceTooShort : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InsufficientData : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Read-only bit view over a byte buffer, most significant bit of each byte
// first (bit i is bit (7 - i%8) of byte i/8).
class BitView {
 public:
  BitView(std::span<const std::uint8_t> data, std::size_t nbits)
      : data_(data), nbits_(nbits) {
    if (nbits > data.size() * 8) {
      throw std::invalid_argument("BitView: not enough bytes for bit count");
    }
  }

  std::size_t size() const { return nbits_; }
  bool bit(std::size_t i) const {
    return (data_[i >> 3] >> (7 - (i & 7))) & 1;
  }
  std::span<const std::uint8_t> bytes() const { return data_; }

  // Population count over the whole view.
  std::size_t ones() const;

 private:
  std::span<const std::uint8_t> data_;
  std::size_t nbits_;
};

struct TestResult {
  std::string name;
  double p_value = 0.0;
  bool pass = false;  // p_value >= alpha used at evaluation time
  std::string params;
};

// --- special functions / distributions (GSL-backed) ---------------------

// Regularized upper incomplete gamma Q(a, x).
double igamc(double a, double x);

// P[Binomial(n, p) <= k].
double binom_cdf(unsigned k, unsigned n, double p);

// Smallest k with P[Binomial(n, p) <= k] >= q.
unsigned binom_quantile(double q, unsigned n, double p);

// Suite-level failure tolerance: a perfect generator fails each test with
// probability alpha, so more than qbinom(1-alpha; tests, alpha) failing
// tests is grounds for rejection.
unsigned suite_fail_threshold(std::size_t num_tests, double alpha);

// One-sided distinguisher threshold: smallest t such that
// P[Binomial(n, 1/2) > t] <= alpha.
unsigned validation_threshold(unsigned n, double alpha);

// --- individual tests ----------------------------------------------------

TestResult monobit_test(const BitView& bits);
TestResult block_frequency_test(const BitView& bits, std::size_t block_len);
TestResult runs_test(const BitView& bits);
TestResult longest_run_test(const BitView& bits);
TestResult cusum_test(const BitView& bits, bool backward);
std::pair<TestResult, TestResult> serial_test(const BitView& bits,
                                              std::size_t m);
TestResult approximate_entropy_test(const BitView& bits, std::size_t m);
TestResult spectral_dft_test(const BitView& bits);

// --- battery --------------------------------------------------------------

enum class Verdict { kPass, kReject };
const char* to_string(Verdict v);

// Lines in a battery report: eight tests, ten p-values per sequence (two
// cumulative-sums directions, two serial statistics).
inline constexpr std::size_t kBatteryRosterSize = 10;

struct BatteryConfig {
  std::size_t seq_len_bits = 1'000'000;
  std::size_t seq_count = 100;
  double alpha = 0.01;
  std::size_t block_len = 128;  // block frequency
  std::size_t serial_m = 16;
  std::size_t apen_m = 10;
};

struct TestLine {
  std::string name;
  std::vector<double> pvalues;      // one per sequence
  std::size_t pass_count = 0;
  double proportion = 0.0;
  double proportion_bound = 0.0;    // reject proportion below this
  bool proportion_ok = true;
  double uniformity_p = 1.0;        // chi-square over 10 p-value bins
  bool uniformity_ok = true;
  bool failed() const { return !proportion_ok || !uniformity_ok; }
};

struct BatteryReport {
  BatteryConfig config;
  std::vector<TestLine> lines;
  std::size_t lines_failing = 0;
  unsigned fail_threshold = 0;
  Verdict verdict = Verdict::kPass;
};

double proportion_lower_bound(double alpha, std::size_t seq_count);

// Chi-square uniformity of p-values over 10 equal bins -> igamc(4.5, x/2).
double pvalue_uniformity(std::span<const double> pvalues);

// Recomputes pass counts, proportions, uniformity and the verdict from the
// stored p-values (lines must be populated).
void interpret(BatteryReport& report);

// Splits data into seq_count sequences of seq_len_bits and runs all tests.
// Throws InsufficientData if the buffer is too small.
BatteryReport run_battery(std::span<const std::uint8_t> data,
                          const BatteryConfig& config);

}  // namespace tagrand

#endif  // TAGRAND_STS_HPP_
