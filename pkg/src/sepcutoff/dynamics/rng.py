"""Counter-based random numbers (Philox4x64-10) usable from numba kernels.

Every random quantity in the simulators is a pure function of a 64-bit seed,
a stream tag and an integer counter, so replicas, clock keys and events can
be addressed directly without carrying generator state between them.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0

# stream tags keep unrelated consumers of one master seed apart
STREAM_REPLICA = np.uint64(0x5EED)
STREAM_EXCLUSION = np.uint64(0xE8C1)
STREAM_CLOCKS = np.uint64(0xC10C)


@njit(cache=True, inline="always")
def _mulhilo(a, b):
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    mid = (p0 >> _S32) + (p1 & _MASK32) + (p2 & _MASK32)
    hi = p3 + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)
    return hi, a * b


@njit(cache=True)
def philox4x64(k0, k1, c0, c1, c2, c3):
    """Philox4x64 with 10 rounds; returns the four output words."""
    k0 = np.uint64(k0)
    k1 = np.uint64(k1)
    c0 = np.uint64(c0)
    c1 = np.uint64(c1)
    c2 = np.uint64(c2)
    c3 = np.uint64(c3)
    for r in range(10):
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        if r < 9:
            k0 = k0 + _W0
            k1 = k1 + _W1
    return c0, c1, c2, c3


@njit(cache=True, inline="always")
def to_unit(w):
    """Map a 64-bit word to a double in [0, 1) using its top 53 bits."""
    return float(w >> _S11) * _TWO_M53


@njit(cache=True)
def derive_seed(master, stream, index):
    """Child seed number `index` of `master` within `stream`."""
    w0, w1, w2, w3 = philox4x64(master, stream, np.uint64(index), np.uint64(0),
                                np.uint64(0), np.uint64(0))
    return w0


def replica_seeds(master: int, n: int, stream=STREAM_REPLICA) -> np.ndarray:
    """Per-replica seeds; replica `r` always gets the same seed for a given master."""
    m = np.uint64(master & 0xFFFFFFFFFFFFFFFF)
    return np.array([derive_seed(m, np.uint64(stream), r) for r in range(n)], dtype=np.uint64)


def seed_from_rng(rng: np.random.Generator) -> int:
    """Draw a 64-bit seed from a numpy generator."""
    return int(rng.integers(0, 2**64, dtype=np.uint64))


# -- sequential stream for hot loops -----------------------------------------
# xoshiro256** seeded through splitmix64 from a Philox-derived replica seed.

_SM_G = np.uint64(0x9E3779B97F4A7C15)
_SM_A = np.uint64(0xBF58476D1CE4E5B9)
_SM_B = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def xoshiro_state(seed):
    s = np.empty(4, np.uint64)
    z = seed
    for i in range(4):
        z = z + _SM_G
        x = z
        x = (x ^ (x >> np.uint64(30))) * _SM_A
        x = (x ^ (x >> np.uint64(27))) * _SM_B
        s[i] = x ^ (x >> np.uint64(31))
    return s


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True, inline="always")
def xoshiro_next(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result
