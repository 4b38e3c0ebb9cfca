"""Portable seeded Gaussian generator: SplitMix64 + Box-Muller.

Simulation outputs must reproduce bit-identically across platforms and
library versions, so the generator is pinned here instead of relying on a
library RNG whose stream may change.
"""

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = float(2.0 ** -53)


def _splitmix64(seed, count):
    """`count` SplitMix64 outputs for the given seed, counter-based."""
    state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    z = state + _GOLDEN * (np.arange(1, count + 1, dtype=np.uint64))
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniforms(seed, count):
    """`count` doubles in (0, 1], each built from 53 high bits."""
    bits = _splitmix64(seed, count)
    return ((bits >> np.uint64(11)) + np.uint64(1)).astype(float) * _INV_2_53


def normals(seed, count):
    """`count` standard normal deviates via the Box-Muller transform."""
    pairs = (count + 1) // 2
    u = uniforms(seed, 2 * pairs)
    u1 = u[0::2]
    u2 = u[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count]
