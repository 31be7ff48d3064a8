"""Portable seeded random streams.

Seeds are combined with SplitMix64 (Steele, Lea & Flood's finalizer, the one
used to seed the xoshiro family). Each derived 64-bit key drives a
Philox4x64-10 counter-based generator (numpy's ``Philox``; its blocks equal
the Random123 reference outputs for counters 1, 2, 3, ...). Raw 64-bit words
become doubles in [0, 1) as ``(w >> 11) * 2**-53``; normals come from the
Box-Muller transform applied to consecutive pairs (u1, u2)::

    z_even = sqrt(-2 ln(1 - u1)) cos(2 pi u2)
    z_odd  = sqrt(-2 ln(1 - u1)) sin(2 pi u2)
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

STREAM_FREQUENCIES = 1
STREAM_INITIAL_STATE = 2


def splitmix64(x: int) -> int:
    """SplitMix64 output for generator state ``x`` (the state is advanced first)."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(base: int, *parts: int) -> int:
    """Fold integer ``parts`` into ``base``: h = sm(base); h = sm(h ^ p) for each p."""
    h = splitmix64(int(base) & MASK64)
    for p in parts:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


def raw_words(key: int, n: int) -> np.ndarray:
    return np.random.Philox(key=int(key) & MASK64).random_raw(n)


def uniforms(key: int, n: int) -> np.ndarray:
    words = raw_words(key, n)
    return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53


def normals(key: int, n: int) -> np.ndarray:
    m = (n + 1) // 2
    u = uniforms(key, 2 * m)
    u1, u2 = u[0::2], u[1::2]
    rad = np.sqrt(-2.0 * np.log(1.0 - u1))
    ang = 2.0 * np.pi * u2
    z = np.empty(2 * m)
    z[0::2] = rad * np.cos(ang)
    z[1::2] = rad * np.sin(ang)
    return z[:n]
