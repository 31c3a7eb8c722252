# Copyright tagrand contributors.
# Licensed under the Apache License, Version 2.0, see LICENSE for details.
# SPDX-License-Identifier: Apache-2.0
"""Reference replica of the project's deterministic byte stream.

Must stay bit-exact with include/tagrand/rng.hpp: splitmix64 with additive
golden-ratio state advance and avalanche finalizer; byte j of the stream is
byte (j mod 8), little-endian, of finalize(seed + (j//8 + 1) * GAMMA).
"""

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

DOMAIN_KEY_DERIVE = 0x6B65792D64657276  # "key-derv"
DOMAIN_PMN_RANDOM = 0x706D6E2D72616E64  # "pmn-rand"
DOMAIN_REFERENCE = 0x7265662D67656E30   # "ref-gen0"
DOMAIN_SAC_SAMPLE = 0x7361632D73616D70  # "sac-samp"
DOMAIN_EACIRC_RUN = 0x6561632D72756E30  # "eac-run0"
DOMAIN_GENOME = 0x67656E6F6D652D30      # "genome-0"


def finalize(z: int) -> int:
    z &= MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK
    z ^= z >> 31
    return z


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK

    def next(self) -> int:
        self.state = (self.state + GAMMA) & MASK
        return finalize(self.state)


def derive_seed(seed: int, domain: int) -> int:
    return SplitMix64(seed ^ domain).next()


def stream_bytes(seed: int, offset: int, length: int) -> bytes:
    out = bytearray()
    j = offset
    while len(out) < length:
        word = finalize((seed + (j // 8 + 1) * GAMMA) & MASK)
        out.append((word >> (8 * (j % 8))) & 0xFF)
        j += 1
    return bytes(out)
