// Copyright tagrand contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "tagrand/eacirc.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <numeric>

#include "tagrand/aead.hpp"
#include "tagrand/parallel.hpp"
#include "tagrand/sts.hpp"

namespace tagrand {
namespace {

// Reproduction shape: the two fittest genomes survive unchanged, children
// come from binary-tournament parents with this crossover probability, and
// a tenth of each new generation is fresh random genomes (random
// immigrants), which keeps exploration pressure constant after the bred
// part of the population converges.  A run stops early once the generation
// best holds at or above the early-stop accuracy for the streak length
// (obvious distinguishers do not need the full budget; the held-out
// decision is unaffected).
constexpr std::size_t kEliteCount = 2;
constexpr double kCrossoverRate = 0.7;
constexpr std::size_t kImmigrantDivisor = 10;  // population/10 fresh per gen
constexpr double kEarlyStopAccuracy = 0.70;
constexpr std::size_t kEarlyStopStreak = 3;

const char* op_name(NodeOp op) {
  switch (op) {
    case NodeOp::kNop:
      return "NOP";
    case NodeOp::kConst:
      return "CONST";
    case NodeOp::kNot:
      return "NOT";
    case NodeOp::kAnd:
      return "AND";
    case NodeOp::kOr:
      return "OR";
    case NodeOp::kXor:
      return "XOR";
    case NodeOp::kRotl:
      return "ROTL";
  }
  return "?";
}

std::uint8_t eval_node(const CircuitNode& node,
                       const std::uint8_t* prev, std::size_t prev_count) {
  if (node.op == NodeOp::kConst) return node.arg;
  std::uint32_t bits = node.mask & ((1u << prev_count) - 1);
  switch (node.op) {
    case NodeOp::kNop:
      return bits ? prev[std::countr_zero(bits)] : 0x00;
    case NodeOp::kNot:
      return static_cast<std::uint8_t>(
          ~(bits ? prev[std::countr_zero(bits)] : 0x00));
    case NodeOp::kRotl:
      return std::rotl(bits ? prev[std::countr_zero(bits)] : std::uint8_t{0},
                       node.arg & 7);
    case NodeOp::kAnd: {
      std::uint8_t acc = 0xff;
      while (bits) {
        acc &= prev[std::countr_zero(bits)];
        bits &= bits - 1;
      }
      return acc;
    }
    case NodeOp::kOr: {
      std::uint8_t acc = 0x00;
      while (bits) {
        acc |= prev[std::countr_zero(bits)];
        bits &= bits - 1;
      }
      return acc;
    }
    case NodeOp::kXor: {
      std::uint8_t acc = 0x00;
      while (bits) {
        acc ^= prev[std::countr_zero(bits)];
        bits &= bits - 1;
      }
      return acc;
    }
    default:
      return 0;
  }
}

// Batched evaluation path: vectors are packed byte-position-major into
// lanes of kLaneWidth vectors, so every node operation runs as a
// straight-line byte loop over a whole lane (which the optimizer turns
// into SIMD).  Results are identical to evaluate() per vector; this only
// restructures the loops.
constexpr std::size_t kLaneWidth = 32;
using Lane = std::array<std::uint8_t, kLaneWidth>;
using LaneBlock = std::array<Lane, 16>;

struct PackedVectors {
  std::size_t count = 0;  // valid vectors; lanes beyond this are padding
  std::size_t vector_len = 0;
  std::vector<LaneBlock> blocks;
};

PackedVectors pack_vectors(std::span<const Bytes> vectors) {
  PackedVectors packed;
  packed.count = vectors.size();
  packed.vector_len = vectors.empty() ? 0 : vectors[0].size();
  packed.blocks.assign((packed.count + kLaneWidth - 1) / kLaneWidth,
                       LaneBlock{});
  for (std::size_t v = 0; v < packed.count; ++v) {
    for (std::size_t j = 0; j < vectors[v].size(); ++j) {
      packed.blocks[v / kLaneWidth][j][v % kLaneWidth] = vectors[v][j];
    }
  }
  return packed;
}

void eval_node_lanes(const CircuitNode& node, const LaneBlock& prev,
                     std::size_t prev_count, Lane& out) {
  if (node.op == NodeOp::kConst) {
    out.fill(node.arg);
    return;
  }
  std::uint32_t bits = node.mask & ((1u << prev_count) - 1);
  switch (node.op) {
    case NodeOp::kNop:
      if (bits) {
        out = prev[std::countr_zero(bits)];
      } else {
        out.fill(0x00);
      }
      break;
    case NodeOp::kNot:
      if (bits) {
        const Lane& src = prev[std::countr_zero(bits)];
        for (std::size_t b = 0; b < kLaneWidth; ++b) {
          out[b] = static_cast<std::uint8_t>(~src[b]);
        }
      } else {
        out.fill(0xff);
      }
      break;
    case NodeOp::kRotl: {
      if (!bits) {
        out.fill(0x00);
        break;
      }
      const Lane& src = prev[std::countr_zero(bits)];
      const unsigned r = node.arg & 7;
      if (r == 0) {
        out = src;
      } else {
        for (std::size_t b = 0; b < kLaneWidth; ++b) {
          out[b] = static_cast<std::uint8_t>((src[b] << r) | (src[b] >> (8 - r)));
        }
      }
      break;
    }
    case NodeOp::kAnd:
      out.fill(0xff);
      while (bits) {
        const Lane& src = prev[std::countr_zero(bits)];
        for (std::size_t b = 0; b < kLaneWidth; ++b) out[b] &= src[b];
        bits &= bits - 1;
      }
      break;
    case NodeOp::kOr:
      out.fill(0x00);
      while (bits) {
        const Lane& src = prev[std::countr_zero(bits)];
        for (std::size_t b = 0; b < kLaneWidth; ++b) out[b] |= src[b];
        bits &= bits - 1;
      }
      break;
    case NodeOp::kXor:
      out.fill(0x00);
      while (bits) {
        const Lane& src = prev[std::countr_zero(bits)];
        for (std::size_t b = 0; b < kLaneWidth; ++b) out[b] ^= src[b];
        bits &= bits - 1;
      }
      break;
    default:
      out.fill(0x00);
      break;
  }
}

// Number of vectors in `packed` whose circuit output is >= 128; the genome
// must already be validated.
std::size_t count_high_outputs(const CircuitGenome& g,
                               const PackedVectors& packed) {
  std::size_t total = 0;
  LaneBlock buf_a;
  LaneBlock buf_b;
  for (std::size_t blk = 0; blk < packed.blocks.size(); ++blk) {
    const LaneBlock* prev = &packed.blocks[blk];
    std::size_t prev_count = g.vector_len;
    LaneBlock* cur = &buf_a;
    for (std::size_t layer = 0; layer < g.layers; ++layer) {
      for (std::size_t w = 0; w < g.width; ++w) {
        eval_node_lanes(g.node(layer, w), *prev, prev_count, (*cur)[w]);
      }
      prev = cur;
      prev_count = g.width;
      cur = cur == &buf_a ? &buf_b : &buf_a;
    }
    const Lane& out = (*prev)[0];
    const std::size_t valid =
        std::min(kLaneWidth, packed.count - blk * kLaneWidth);
    for (std::size_t b = 0; b < valid; ++b) {
      total += out[b] >> 7;
    }
  }
  return total;
}

double fitness_packed(const CircuitGenome& g, const PackedVectors& a,
                      const PackedVectors& b) {
  const std::size_t correct =
      count_high_outputs(g, a) + (b.count - count_high_outputs(g, b));
  return static_cast<double>(correct) / static_cast<double>(a.count + b.count);
}

// Evaluation core without the per-call structure checks; callers must have
// validated the genome.
std::uint8_t eval_unchecked(const CircuitGenome& g,
                            std::span<const std::uint8_t> input) {
  std::uint8_t buf_a[16];
  std::uint8_t buf_b[16];
  const std::uint8_t* prev = input.data();
  std::size_t prev_count = g.vector_len;
  std::uint8_t* cur = buf_a;
  for (std::size_t layer = 0; layer < g.layers; ++layer) {
    for (std::size_t w = 0; w < g.width; ++w) {
      cur[w] = eval_node(g.node(layer, w), prev, prev_count);
    }
    prev = cur;
    prev_count = g.width;
    cur = cur == buf_a ? buf_b : buf_a;
  }
  return prev[0];
}

std::uint16_t random_mask(std::size_t bits, SplitMix64& rng) {
  return static_cast<std::uint16_t>(rng.next() & ((1u << bits) - 1));
}

CircuitNode random_node(std::size_t mask_bits, SplitMix64& rng) {
  CircuitNode n;
  n.op = static_cast<NodeOp>(rng.next_below(kNodeOpCount));
  n.arg = static_cast<std::uint8_t>(rng.next() & 0xff);
  n.mask = random_mask(mask_bits, rng);
  return n;
}

// Orders genome indices best-first with index as the deterministic
// tie-break.
bool fitter(const std::vector<double>& fit, std::size_t a, std::size_t b) {
  return fit[a] != fit[b] ? fit[a] > fit[b] : a < b;
}

void check_config(const EvolutionConfig& c) {
  if (c.population < 2) {
    throw std::invalid_argument("evolve: population must be at least 2");
  }
  if (!(c.mutation_rate > 0.0 && c.mutation_rate < 1.0)) {
    throw std::invalid_argument("evolve: mutation rate must lie in (0, 1)");
  }
  if (c.generations < 1) {
    throw std::invalid_argument("evolve: need at least one generation");
  }
  if (c.vectors_per_eval < 1) {
    throw std::invalid_argument("evolve: need at least one vector per side");
  }
  if (c.vector_len < 1 || c.vector_len > 16) {
    throw std::invalid_argument("evolve: vector length must be 1..16 bytes");
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) {
    throw std::invalid_argument("evolve: alpha must lie in (0, 1)");
  }
  if (c.circuit_layers < 1 || c.circuit_width < 1 || c.circuit_width > 16) {
    throw std::invalid_argument("evolve: circuit shape out of range");
  }
}

}  // namespace

void validate(const CircuitGenome& g) {
  if (g.layers < 1) {
    throw MalformedGenome("genome: need at least one layer");
  }
  if (g.width < 1 || g.width > 16) {
    throw MalformedGenome("genome: width must be 1..16 nodes");
  }
  if (g.vector_len < 1 || g.vector_len > 16) {
    throw MalformedGenome("genome: vector length must be 1..16 bytes");
  }
  if (g.nodes.size() != g.layers * g.width) {
    throw MalformedGenome("genome: node count does not match layers*width");
  }
  for (std::size_t layer = 0; layer < g.layers; ++layer) {
    const std::size_t prev_count = layer == 0 ? g.vector_len : g.width;
    for (std::size_t w = 0; w < g.width; ++w) {
      const CircuitNode& n = g.node(layer, w);
      if (static_cast<std::size_t>(n.op) >= kNodeOpCount) {
        throw MalformedGenome("genome: undefined node opcode");
      }
      if (n.mask >> prev_count != 0) {
        throw MalformedGenome(
            "genome: connector mask references nodes beyond the previous "
            "layer");
      }
    }
  }
}

std::uint8_t evaluate(const CircuitGenome& genome,
                      std::span<const std::uint8_t> input) {
  validate(genome);
  if (input.size() != genome.vector_len) {
    throw std::invalid_argument("evaluate: input length != genome vector_len");
  }
  return eval_unchecked(genome, input);
}

CircuitGenome random_genome(std::size_t layers, std::size_t width,
                            std::size_t vector_len, SplitMix64& rng) {
  CircuitGenome g;
  g.layers = layers;
  g.width = width;
  g.vector_len = vector_len;
  g.nodes.resize(layers * width);
  for (std::size_t layer = 0; layer < layers; ++layer) {
    const std::size_t mask_bits = layer == 0 ? vector_len : width;
    for (std::size_t w = 0; w < width; ++w) {
      g.node(layer, w) = random_node(mask_bits, rng);
    }
  }
  validate(g);
  return g;
}

CircuitGenome mutate(const CircuitGenome& genome, double rate,
                     SplitMix64& rng) {
  CircuitGenome out = genome;
  for (std::size_t layer = 0; layer < out.layers; ++layer) {
    const std::size_t mask_bits = layer == 0 ? out.vector_len : out.width;
    for (std::size_t w = 0; w < out.width; ++w) {
      CircuitNode& n = out.node(layer, w);
      if (rng.next_unit() < rate) {
        n.op = static_cast<NodeOp>(rng.next_below(kNodeOpCount));
      }
      if (rng.next_unit() < rate) {
        n.arg = static_cast<std::uint8_t>(rng.next() & 0xff);
      }
      if (rng.next_unit() < rate) {
        n.mask = random_mask(mask_bits, rng);
      }
    }
  }
  return out;
}

CircuitGenome crossover(const CircuitGenome& a, const CircuitGenome& b,
                        SplitMix64& rng) {
  if (a.layers != b.layers || a.width != b.width ||
      a.vector_len != b.vector_len) {
    throw std::invalid_argument("crossover: parent shapes differ");
  }
  const std::size_t cut = rng.next_below(a.layers + 1);
  CircuitGenome child = a;
  for (std::size_t layer = cut; layer < a.layers; ++layer) {
    for (std::size_t w = 0; w < a.width; ++w) {
      child.node(layer, w) = b.node(layer, w);
    }
  }
  return child;
}

std::string render_genome(const CircuitGenome& g) {
  std::string out;
  char buf[64];
  for (std::size_t layer = 0; layer < g.layers; ++layer) {
    std::snprintf(buf, sizeof(buf), "layer %zu:", layer);
    out += buf;
    for (std::size_t w = 0; w < g.width; ++w) {
      const CircuitNode& n = g.node(layer, w);
      std::snprintf(buf, sizeof(buf), " %s(arg=0x%02x,mask=0x%04x)",
                    op_name(n.op), n.arg, n.mask);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

double fitness(const CircuitGenome& genome, std::span<const Bytes> vectors_a,
               std::span<const Bytes> vectors_b) {
  if (vectors_a.empty() || vectors_b.empty()) {
    throw EmptySet("fitness: both vector sets must be nonempty");
  }
  if (vectors_a.size() != vectors_b.size()) {
    throw std::invalid_argument("fitness: vector sets differ in size");
  }
  validate(genome);
  return fitness_packed(genome, pack_vectors(vectors_a),
                        pack_vectors(vectors_b));
}

void ReferenceVectorSource::vector_at(std::uint64_t index,
                                      std::span<std::uint8_t> out) {
  stream_.fill_at(index * out.size(), out);
}

TagVectorSource::TagVectorSource(const StreamConfig& config)
    : config_(config),
      cipher_(&CipherRegistry::instance().require(config.cipher)),
      key_(derive_key(config.master_seed, cipher_->spec().key_len)),
      smn_(cipher_->spec().smn_len, 0),
      adata_(config.adata_len, 0),
      pmns_(config.mode, cipher_->spec().pmn_len, config.master_seed),
      cached_index_(~std::uint64_t{0}) {}

void TagVectorSource::vector_at(std::uint64_t index,
                                std::span<std::uint8_t> out) {
  const std::size_t tag_len = cipher_->spec().tag_len;
  std::uint64_t pos = index * out.size();
  std::size_t filled = 0;
  while (filled < out.size()) {
    const std::uint64_t tag_index = pos / tag_len;
    const std::size_t offset = static_cast<std::size_t>(pos % tag_len);
    if (tag_index != cached_index_) {
      const Bytes plaintext = plaintext_at(tag_index, config_.plaintext_len);
      const Bytes pmn = pmns_.at(tag_index);
      const Bytes sealed =
          cipher_->encrypt({plaintext, adata_, key_, smn_, pmn});
      cached_tag_ = extract_tag(sealed, plaintext.size(), cipher_->spec());
      cached_index_ = tag_index;
    }
    const std::size_t chunk =
        std::min(out.size() - filled, tag_len - offset);
    std::copy_n(cached_tag_.begin() + static_cast<std::ptrdiff_t>(offset),
                chunk, out.begin() + static_cast<std::ptrdiff_t>(filled));
    filled += chunk;
    pos += chunk;
  }
}

RunOutcome evolve(const EvolutionConfig& config, VectorSource& cipher_source,
                  VectorSource& reference_source,
                  const GenerationObserver& observer) {
  check_config(config);
  const std::size_t pop_size = config.population;
  const std::size_t num_vectors = config.vectors_per_eval;
  const std::size_t windows =
      config.train_windows == 0 ? config.generations : config.train_windows;

  // Each window owns 2*V consecutive vector slots, divided half/half into
  // a training part and a held-out part by a balanced pseudorandom split
  // (a pure function of the window index).  The reject decision reads the
  // held-out slots of the last window that was trained on: data from the
  // same stream region as training -- a balanced split keeps the two
  // halves statistically interchangeable, so accuracy generalizes exactly
  // when the circuit captured window-wide structure -- yet disjoint from
  // every vector selection ever saw.
  std::vector<std::uint32_t> split(2 * num_vectors);
  const auto split_window = [&split](std::uint64_t window) {
    std::iota(split.begin(), split.end(), 0);
    SplitMix64 srng(derive_seed(domains::kWinSplit, window));
    for (std::size_t k = split.size(); k > 1; --k) {
      std::swap(split[k - 1], split[srng.next_below(k)]);
    }
  };

  SplitMix64 rng(derive_seed(config.seed, domains::kGenome));
  std::vector<CircuitGenome> population;
  population.reserve(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    population.push_back(random_genome(config.circuit_layers,
                                       config.circuit_width,
                                       config.vector_len, rng));
  }

  std::vector<Bytes> side_a(num_vectors, Bytes(config.vector_len));
  std::vector<Bytes> side_b(num_vectors, Bytes(config.vector_len));
  // half 0 = training slots, half 1 = held-out slots of `window`; assumes
  // split_window(window) was just called.
  const auto load = [&](VectorSource& source, std::uint64_t window,
                        std::size_t half, std::vector<Bytes>& out) {
    const std::uint64_t base = window * 2 * num_vectors;
    for (std::size_t v = 0; v < num_vectors; ++v) {
      source.vector_at(base + split[half * num_vectors + v], out[v]);
    }
  };

  std::vector<double> fit(pop_size);
  std::size_t best_index = 0;
  std::size_t generations_used = 0;
  std::size_t streak = 0;
  std::uint64_t last_window = 0;
  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    last_window = gen % windows;
    split_window(last_window);
    load(cipher_source, last_window, 0, side_a);
    load(reference_source, last_window, 0, side_b);
    const PackedVectors packed_a = pack_vectors(side_a);
    const PackedVectors packed_b = pack_vectors(side_b);
    for (std::size_t i = 0; i < pop_size; ++i) {
      fit[i] = fitness_packed(population[i], packed_a, packed_b);
    }
    best_index = 0;
    for (std::size_t i = 1; i < pop_size; ++i) {
      if (fitter(fit, i, best_index)) best_index = i;
    }
    ++generations_used;
    if (observer) observer(gen, fit[best_index]);

    streak = fit[best_index] >= kEarlyStopAccuracy ? streak + 1 : 0;
    if (streak >= kEarlyStopStreak) break;
    if (gen + 1 == config.generations) break;

    std::vector<std::size_t> order(pop_size);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fitter(fit, a, b); });
    const auto tournament = [&]() {
      const std::size_t a = rng.next_below(pop_size);
      const std::size_t b = rng.next_below(pop_size);
      return fitter(fit, a, b) ? a : b;
    };
    std::vector<CircuitGenome> next;
    next.reserve(pop_size);
    for (std::size_t e = 0; e < std::min(kEliteCount, pop_size); ++e) {
      next.push_back(population[order[e]]);
    }
    const std::size_t immigrants = pop_size / kImmigrantDivisor;
    while (next.size() + immigrants < pop_size) {
      const std::size_t p1 = tournament();
      const std::size_t p2 = tournament();
      CircuitGenome child = rng.next_unit() < kCrossoverRate
                                ? crossover(population[p1], population[p2], rng)
                                : population[p1];
      next.push_back(mutate(child, config.mutation_rate, rng));
    }
    while (next.size() < pop_size) {
      next.push_back(random_genome(config.circuit_layers, config.circuit_width,
                                   config.vector_len, rng));
    }
    population = std::move(next);
  }

  const CircuitGenome& champion = population[best_index];
  split_window(last_window);
  load(cipher_source, last_window, 1, side_a);
  load(reference_source, last_window, 1, side_b);
  const PackedVectors holdout_a = pack_vectors(side_a);
  const PackedVectors holdout_b = pack_vectors(side_b);
  const std::size_t correct = count_high_outputs(champion, holdout_a) +
                              (holdout_b.count -
                               count_high_outputs(champion, holdout_b));
  const unsigned threshold =
      validation_threshold(static_cast<unsigned>(2 * num_vectors),
                           config.alpha);
  RunOutcome outcome;
  outcome.reject = correct > threshold;
  outcome.best_accuracy = static_cast<double>(correct) /
                          static_cast<double>(2 * num_vectors);
  outcome.generations_used = generations_used;
  return outcome;
}

CampaignResult campaign(const EvolutionConfig& config, std::size_t n_runs,
                        const SourceFactory& cipher_factory,
                        const SourceFactory& reference_factory) {
  if (n_runs < 1) {
    throw std::invalid_argument("campaign: need at least one run");
  }
  check_config(config);
  const std::uint64_t root = derive_seed(config.seed, domains::kEacircRun);
  CampaignResult result;
  result.runs = n_runs;
  result.outcomes.resize(n_runs);
  parallel_for(n_runs, [&](std::size_t r) {
    const std::uint64_t run_seed = derive_seed(root, r);
    EvolutionConfig run_config = config;
    run_config.seed = run_seed;
    auto cipher = cipher_factory(run_seed);
    auto reference =
        reference_factory(derive_seed(run_seed, domains::kReference));
    result.outcomes[r] = evolve(run_config, *cipher, *reference);
  });
  for (const RunOutcome& outcome : result.outcomes) {
    result.rejecting += static_cast<std::size_t>(outcome.reject);
  }
  result.proportion =
      static_cast<double>(result.rejecting) / static_cast<double>(n_runs);
  return result;
}

SourceFactory tag_vector_factory(StreamConfig config) {
  return [config](std::uint64_t seed) -> std::unique_ptr<VectorSource> {
    StreamConfig run_config = config;
    run_config.master_seed = seed;
    return std::make_unique<TagVectorSource>(run_config);
  };
}

SourceFactory reference_vector_factory() {
  return [](std::uint64_t seed) -> std::unique_ptr<VectorSource> {
    return std::make_unique<ReferenceVectorSource>(seed);
  };
}

}  // namespace tagrand
