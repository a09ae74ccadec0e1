"""Counter-based uniform substreams.

Coordinate ``p`` of run ``r`` under seed ``s`` is the ``r``-th raw word of a
Philox stream keyed by ``(s, p)``.  Any run range can therefore be produced
independently of how the work is chunked or which coordinates were drawn
before, which is what makes serial and parallel Monte Carlo agree bit for bit.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_SCALE = 2.0**-53


def _key(seed: int, coord: int) -> int:
    if seed < 0 or seed > _MASK64:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    if coord < 1:
        raise ValueError(f"coordinates are 1-based, got {coord}")
    return (coord << 64) | seed


def _to_unit(raw: np.ndarray) -> np.ndarray:
    # midpoint of a 53-bit grid cell: never 0, never 1, never a multiple of 1/27
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _SCALE


def uniform_block(seed: int, coord: int, start: int, count: int) -> np.ndarray:
    """Coordinate ``coord`` for runs ``start .. start+count-1``."""
    bitgen = np.random.Philox(key=_key(seed, coord))
    if start:
        bitgen.advance(start // 4)
        if start % 4:
            bitgen.random_raw(start % 4)
    return _to_unit(np.asarray(bitgen.random_raw(count), dtype=np.uint64))


def uniform_at(seed: int, coord: int, run: int) -> float:
    return float(uniform_block(seed, coord, run, 1)[0])


def derive_seed(seed: int, *keys: int) -> int:
    """Independent child seed for a named sub-experiment."""
    ss = np.random.SeedSequence([seed, *keys])
    return int(ss.generate_state(1, np.uint64)[0])
