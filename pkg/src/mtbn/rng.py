"""Counter-based uniform streams keyed by (seed, sample index, instance index).

Every draw is a pure hash of its key, so results do not depend on evaluation
order, worker count, or how many other instances consumed randomness.  The
mix is the splitmix64 finalizer applied three times, computed with vectorized
numpy uint64 arithmetic, which both the numba and the pure-Python samplers
consume verbatim.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U53 = np.float64(1.0 / (1 << 53))


def _sm64(x: np.ndarray) -> np.ndarray:
    z = x + _GAMMA
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniform_block(seed: int, sample_lo: int, sample_hi: int, n_instances: int) -> np.ndarray:
    """Uniforms in [0, 1) for samples [sample_lo, sample_hi) x instances."""
    samples = np.arange(sample_lo, sample_hi, dtype=np.uint64).reshape(-1, 1)
    inst = np.arange(n_instances, dtype=np.uint64).reshape(1, -1)
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        h = _sm64(_sm64(_sm64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF)) ^ samples) ^ inst)
    return (h >> np.uint64(11)).astype(np.float64) * _U53


def uniform_one(seed: int, sample: int, instance: int) -> float:
    return float(uniform_block(seed, sample, sample + 1, instance + 1)[0, instance])
