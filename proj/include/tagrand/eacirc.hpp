// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0
//
// Evolutionary circuit distinguisher: evolves small feed-forward byte
// circuits that try to tell cipher tag vectors from reference random
// vectors.  A run trains by genetic search on labeled vector windows and
// then classifies fresh held-out vectors; it rejects randomness when the
// held-out accuracy clears a one-sided binomial bound.  Campaigns repeat
// runs with independent seeds (hence independent cipher keys) and report
// the rejecting proportion.

#ifndef TAGRAND_EACIRC_HPP_
#define TAGRAND_EACIRC_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tagrand/bytes.hpp"
#include "tagrand/rng.hpp"
#include "tagrand/stream.hpp"

namespace tagrand {

struct MalformedGenome : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptySet : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class NodeOp : std::uint8_t {
  kNop = 0,    // first selected input (0x00 if none)
  kConst = 1,  // arg, ignores inputs
  kNot = 2,    // complement of first selected input
  kAnd = 3,    // AND over selected inputs (0xff if none)
  kOr = 4,     // OR over selected inputs (0x00 if none)
  kXor = 5,    // XOR over selected inputs (0x00 if none)
  kRotl = 6,   // first selected input rotated left by arg mod 8
};
inline constexpr std::size_t kNodeOpCount = 7;

struct CircuitNode {
  NodeOp op = NodeOp::kNop;
  std::uint8_t arg = 0;    // constant value / rotate amount
  std::uint16_t mask = 0;  // connector bitmask over the previous layer

  bool operator==(const CircuitNode&) const = default;
};

// Feed-forward circuit: layer 0 nodes select input bytes via their
// connector mask, later layers select outputs of the previous layer, and
// the first node of the final layer is the circuit output.
struct CircuitGenome {
  std::size_t layers = 5;
  std::size_t width = 8;       // nodes per layer, at most 16
  std::size_t vector_len = 16; // input bytes, at most 16
  std::vector<CircuitNode> nodes;  // layers * width, layer-major

  CircuitNode& node(std::size_t layer, std::size_t pos) {
    return nodes[layer * width + pos];
  }
  const CircuitNode& node(std::size_t layer, std::size_t pos) const {
    return nodes[layer * width + pos];
  }
  bool operator==(const CircuitGenome&) const = default;
};

// Throws MalformedGenome if dimensions, opcodes or connector masks are
// inconsistent (masks must only reference existing predecessors).
void validate(const CircuitGenome& genome);

// Deterministic evaluation; validates the genome and the input length.
std::uint8_t evaluate(const CircuitGenome& genome,
                      std::span<const std::uint8_t> input);

// Uniformly random valid genome.
CircuitGenome random_genome(std::size_t layers, std::size_t width,
                            std::size_t vector_len, SplitMix64& rng);

// Per-locus point mutation: each node's op, arg and mask independently
// re-rolled with probability `rate`.
CircuitGenome mutate(const CircuitGenome& genome, double rate,
                     SplitMix64& rng);

// Layer-aligned splice: child takes a leading span of layers from `a` and
// the rest from `b`.  Parents must have identical shape.
CircuitGenome crossover(const CircuitGenome& a, const CircuitGenome& b,
                        SplitMix64& rng);

// Textual layer-by-layer dump for inspection.
std::string render_genome(const CircuitGenome& genome);

// Classification accuracy: a vector is labeled class A when the circuit
// output is >= 128; accuracy is the fraction of correct labels over both
// sets.  Throws EmptySet if either set is empty, std::invalid_argument if
// the sets differ in size.
double fitness(const CircuitGenome& genome,
               std::span<const Bytes> vectors_a,
               std::span<const Bytes> vectors_b);

// Supplies test vectors by absolute index; implementations are
// deterministic functions of (construction parameters, index).
class VectorSource {
 public:
  virtual ~VectorSource() = default;
  virtual void vector_at(std::uint64_t index,
                         std::span<std::uint8_t> out) = 0;
};

// Vectors drawn from the deterministic reference byte stream.
class ReferenceVectorSource : public VectorSource {
 public:
  explicit ReferenceVectorSource(std::uint64_t seed) : stream_(seed) {}
  void vector_at(std::uint64_t index, std::span<std::uint8_t> out) override;

 private:
  ByteStream stream_;
};

// Vectors carved from a cipher tag stream (vector i covers stream bytes
// [i*len, (i+1)*len), generated lazily tag by tag).
class TagVectorSource : public VectorSource {
 public:
  explicit TagVectorSource(const StreamConfig& config);
  void vector_at(std::uint64_t index, std::span<std::uint8_t> out) override;

 private:
  StreamConfig config_;
  const AeadImpl* cipher_;
  Bytes key_;
  Bytes smn_;
  Bytes adata_;
  PmnSequence pmns_;
  std::uint64_t cached_index_;
  Bytes cached_tag_;
};

struct EvolutionConfig {
  std::size_t population = 20;
  std::size_t generations = 50;
  double mutation_rate = 0.05;
  std::size_t vectors_per_eval = 1000;  // per source per generation
  std::size_t vector_len = 16;
  double alpha = 0.01;
  std::uint64_t seed = 1;
  // Number of distinct training windows; generations beyond this recycle
  // earlier windows, bounding the data a run consumes.  0 means one fresh
  // window per generation.  A window spans 2*vectors_per_eval vector
  // slots: half are trained on, half stay held out for the final reject
  // decision.
  std::size_t train_windows = 0;
  std::size_t circuit_layers = 5;
  std::size_t circuit_width = 8;

  bool operator==(const EvolutionConfig&) const = default;
};

struct RunOutcome {
  bool reject = false;
  double best_accuracy = 0.0;  // held-out accuracy of the final champion
  std::size_t generations_used = 0;
};

using GenerationObserver =
    std::function<void(std::size_t generation, double best_fitness)>;

// Full evolutionary run: per-generation fitness on the training half of
// labeled windows, elitist reproduction, early stop once training accuracy
// stays high, and a final decision on the held-out half of the last
// trained window -- vectors from the same stream region as training that
// never took part in selection.  Reject iff correct classifications exceed
// the one-sided binomial bound at level alpha for 2*vectors_per_eval
// fair-coin trials.
RunOutcome evolve(const EvolutionConfig& config, VectorSource& cipher_source,
                  VectorSource& reference_source,
                  const GenerationObserver& observer = {});

struct CampaignResult {
  std::size_t runs = 0;
  std::size_t rejecting = 0;
  double proportion = 0.0;
  std::vector<RunOutcome> outcomes;
};

// Builds a source for one run from that run's seed.
using SourceFactory =
    std::function<std::unique_ptr<VectorSource>(std::uint64_t seed)>;

// n_runs independent evolve() runs; run r derives its own seed chain from
// config.seed, feeds the cipher factory the run seed and the reference
// factory an independent sub-seed, and evolves with a run-specific genome
// seed.  Runs execute in parallel.
CampaignResult campaign(const EvolutionConfig& config, std::size_t n_runs,
                        const SourceFactory& cipher_factory,
                        const SourceFactory& reference_factory);

// Standard factories: cipher tag streams keyed per run, and the reference
// generator.
SourceFactory tag_vector_factory(StreamConfig config);
SourceFactory reference_vector_factory();

}  // namespace tagrand

#endif  // TAGRAND_EACIRC_HPP_
