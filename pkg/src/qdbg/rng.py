"""Counter-based deterministic random streams.

Every random draw in the debugger comes from a `Stream` keyed by a seed plus
an index path (e.g. shot number, tomography setting).  Draw i of a stream is
a pure function of (seed, path, i), so shots can run in any order or in
parallel and still reproduce bit-identically.

The algorithm is the SplitMix64 finalizer applied to a hashed key; its name
(`ALGORITHM`) is recorded in io_log headers so transcripts are verifiable.
"""

import numpy as np

ALGORITHM = "splitmix64-counter"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    # SplitMix64 output function (Steele, Lea, Flood 2014).
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


class Stream:
    """Counter-based uniform double stream for a (seed, *path) key."""

    def __init__(self, seed: int, *path: int):
        key = _mix(seed & _MASK)
        for p in path:
            key = _mix(key ^ _mix(p & _MASK))
        self.key = key
        self.counter = 0

    def uniform_at(self, i: int) -> float:
        """Draw i of the stream, in [0, 1); stateless."""
        # 53 high bits -> double, the standard 64-to-double mapping
        return (_mix(self.key ^ _mix(i)) >> 11) * (1.0 / (1 << 53))

    def uniform(self) -> float:
        """Next draw; advances the internal counter."""
        u = self.uniform_at(self.counter)
        self.counter += 1
        return u

    def choice(self, cumulative) -> int:
        """Index of the first cumulative weight exceeding the next draw."""
        u = self.uniform()
        for i, c in enumerate(cumulative):
            if u < c:
                return i
        return len(cumulative) - 1


# --- vectorized form (bit-identical to Stream, for batch shot execution) -----

_U64_CONSTS = (np.uint64(_GOLDEN), np.uint64(0xBF58476D1CE4E5B9),
               np.uint64(0x94D049BB133111EB))


def mix_array(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer over a uint64 array (wrapping arithmetic)."""
    g, c1, c2 = _U64_CONSTS
    with np.errstate(over="ignore"):
        z = (z + g).astype(np.uint64)
        z = ((z ^ (z >> np.uint64(30))) * c1).astype(np.uint64)
        z = ((z ^ (z >> np.uint64(27))) * c2).astype(np.uint64)
        return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, indices: np.ndarray) -> np.ndarray:
    """Keys of Stream(seed, i) for an array of path indices i."""
    base = np.uint64(_mix(seed & _MASK))
    return mix_array(base ^ mix_array(indices.astype(np.uint64)))


def uniforms(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Draw `counters[j]` of each stream `keys[j]`, matching uniform_at."""
    bits = mix_array(keys ^ mix_array(counters.astype(np.uint64)))
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
