"""Sequential Measurements hidden-variable model.

A microstate is a point ``u`` of the unit hypercube ``[0, 1]^inf``.  Its
first ``K`` coordinates hold measurement records, each an exact multiple of
1/27 stored as an integer code; every later coordinate is a free uniform
number.  Measuring ``V_ij`` overwrites coordinate ``K + 1`` with the code of
``(i, j, outcome)``, where the outcome comes from inverting the Born-rule CDF
of ``V_ij`` conditioned (Lueders) on the decoded history.

Free coordinates past the explicitly listed ones are drawn on demand from a
counter-based stream keyed by ``(tail_seed, coordinate)`` at position
``stream``, so a microstate is a plain immutable value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _streams
from .qcore import (
    Observable,
    QuantumState,
    as_observable,
    born_prob,
    check_cell,
    check_sign,
    luders_update,
    magic_square_operator,
)

Cell = tuple[int, int]
MeasurementHistory = tuple[tuple[Observable, int], ...]
CdfHook = Callable[[np.ndarray], np.ndarray]

PLUS_OFFSET = 18


class DigitCode(int):
    """Measurement record ``code/27`` with base-3 digits ``(d2 d1 d0)``.

    ``d2`` is 0 for outcome -1 and 2 for +1; ``d1 = i - 1`` and ``d0 = j - 1``.
    Codes 9..17 (``d2 = 1``) never arise and are rejected.
    """

    def __new__(cls, code: int):
        if isinstance(code, bool) or not isinstance(code, (int, np.integer)):
            raise TypeError(f"digit code must be an integer, got {code!r}")
        code = int(code)
        if not 0 <= code <= 26:
            raise ValueError(f"digit code {code} outside 0..26")
        if code // 9 == 1:
            raise ValueError(f"digit code {code} is unreachable (middle base-3 digit 1)")
        return super().__new__(cls, code)

    @property
    def value(self) -> Fraction:
        return Fraction(int(self), 27)

    @property
    def cell(self) -> Cell:
        return (int(self) % 9 // 3 + 1, int(self) % 3 + 1)

    @property
    def outcome(self) -> int:
        return 1 if self >= PLUS_OFFSET else -1

    def __repr__(self) -> str:
        return f"DigitCode({int(self)})"


def nu(i: int, j: int, x: int) -> DigitCode:
    """Encode the measurement of ``V_ij`` with outcome ``x``."""
    i, j = check_cell(i, j)
    x = check_sign(x)
    base = 3 * (i - 1) + (j - 1)
    return DigitCode(base if x == -1 else PLUS_OFFSET + base)


def decode(c: int) -> tuple[int, int, int]:
    """Inverse of :func:`nu`: ``code -> (i, j, outcome)``."""
    c = DigitCode(c)
    i, j = c.cell
    return i, j, c.outcome


@dataclass(frozen=True)
class Microstate:
    """Hidden-variable state ``u`` (coordinates are 1-based).

    Attributes:
        measured: codes of the first ``K`` coordinates.
        free: explicit values of coordinates ``K+1 .. K+len(free)``.
        tail_seed: seed of the stream supplying all later coordinates.
        stream: position within that stream (the run index in Monte Carlo).
    """

    measured: tuple[DigitCode, ...] = ()
    free: tuple[float, ...] = ()
    tail_seed: int = 0
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "measured", tuple(DigitCode(c) for c in self.measured))
        free = tuple(float(x) for x in self.free)
        for x in free:
            if not 0.0 < x < 1.0:
                raise ValueError(f"free coordinate {x!r} not in the open interval (0, 1)")
            if (27.0 * x) % 1.0 == 0.0:
                raise ValueError(f"free coordinate {x!r} is a multiple of 1/27")
        object.__setattr__(self, "free", free)

    @property
    def K(self) -> int:
        return len(self.measured)

    def coordinate(self, p: int) -> Fraction | float:
        """Coordinate ``u_p``; measured ones come back as exact fractions."""
        if p < 1:
            raise IndexError("coordinates are 1-based")
        if p <= self.K:
            return self.measured[p - 1].value
        q = p - self.K - 1
        if q < len(self.free):
            return self.free[q]
        return _streams.uniform_at(self.tail_seed, p, self.stream)

    def prefix(self, n: int) -> list[Fraction | float]:
        return [self.coordinate(p) for p in range(1, n + 1)]

    def record(self, code: int) -> "Microstate":
        """Copy with coordinate ``K + 1`` replaced by ``code``."""
        return Microstate(self.measured + (DigitCode(code),), self.free[1:], self.tail_seed, self.stream)

    def to_json(self) -> dict:
        d = {"measured": [int(c) for c in self.measured], "free": list(self.free), "tail_seed": self.tail_seed}
        if self.stream:
            d["stream"] = self.stream
        return d

    @classmethod
    def from_json(cls, obj: dict | str) -> "Microstate":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            tuple(obj.get("measured", ())),
            tuple(obj.get("free", ())),
            int(obj.get("tail_seed", 0)),
            int(obj.get("stream", 0)),
        )


def measurement_history(u: Microstate) -> MeasurementHistory:
    return tuple((magic_square_operator(*c.cell), c.outcome) for c in u.measured)


def conditional_cdf_minus(
    state: QuantumState,
    hist: Iterable[tuple[Observable | Cell, int]],
    obs: Observable | Cell,
) -> float:
    """``F(-1 | history)`` for ``obs`` after Lueders-updating through ``hist``."""
    for o, s in hist:
        state = luders_update(state, o, s)
    return born_prob(state, obs, -1)


def chi(state: QuantumState, u: Microstate, i: int, j: int) -> int:
    """Outcome of measuring ``V_ij`` on ``u``.

    ``inf{x : F(x) > u_{K+1}}``: -1 when ``u_{K+1} < F(-1 | history)``,
    otherwise +1.
    """
    F = conditional_cdf_minus(state, measurement_history(u), (i, j))
    return -1 if u.coordinate(u.K + 1) < F else 1


def phi(state: QuantumState, u: Microstate, i: int, j: int) -> Microstate:
    """Measurement interaction map for ``V_ij``."""
    return u.record(nu(i, j, chi(state, u, i, j)))


def macrostate_g(u: Microstate) -> int:
    if u.K == 0:
        return 0
    return 1 if 2 * int(u.measured[-1]) > 27 else -1


@dataclass(frozen=True)
class Trajectory:
    """Ordered ``(cell, outcome)`` record of one simulated run."""

    steps: tuple[tuple[Cell, int], ...]

    @property
    def cells(self) -> list[Cell]:
        return [c for c, _ in self.steps]

    @property
    def outcomes(self) -> list[int]:
        return [s for _, s in self.steps]

    @property
    def product(self) -> int:
        return int(np.prod(self.outcomes)) if self.steps else 1


def run_sequential(
    state: QuantumState, u: Microstate, seq: Sequence[Cell]
) -> tuple[Trajectory, Microstate]:
    if not seq:
        raise ValueError("measurement sequence is empty")
    steps = []
    for i, j in seq:
        u = phi(state, u, i, j)
        steps.append(((i, j), macrostate_g(u)))
    return Trajectory(tuple(steps)), u


# --- ensembles -------------------------------------------------------------
#
# The same maps applied to many microstates at once.  Run r of an ensemble is
# the microstate Microstate(codes[r], (), seed, start + r); tests hold the two
# paths to bit-identical agreement.


@dataclass(frozen=True, eq=False)
class Ensemble:
    seed: int
    start: int
    codes: np.ndarray = field(repr=False)

    @classmethod
    def fresh(cls, seed: int, n: int, start: int = 0) -> "Ensemble":
        if n < 1:
            raise ValueError("ensemble needs at least one run")
        return cls(seed, start, np.zeros((n, 0), dtype=np.int8))

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def K(self) -> int:
        return self.codes.shape[1]

    def free_coordinate(self, p: int) -> np.ndarray:
        if p <= self.K:
            raise IndexError(f"coordinate {p} is already a measurement record")
        return _streams.uniform_block(self.seed, p, self.start, self.n)

    def microstate(self, r: int) -> Microstate:
        return Microstate(tuple(int(c) for c in self.codes[r]), (), self.seed, self.start + r)

    def outcomes(self) -> np.ndarray:
        """Outcome of every recorded measurement, shape ``(n, K)``."""
        return np.where(self.codes >= PLUS_OFFSET, 1, -1).astype(np.int8)


def _history_from_codes(row: Sequence[int]) -> MeasurementHistory:
    return tuple((magic_square_operator(*DigitCode(c).cell), DigitCode(c).outcome) for c in row)


def phi_batch(
    state: QuantumState, ens: Ensemble, cell: Cell, cdf_hook: CdfHook | None = None
) -> Ensemble:
    """:func:`phi` for every run of ``ens``.

    ``cdf_hook`` rewrites the conditional CDF values before inversion; it
    exists only to build deliberately broken models for negative controls.
    """
    i, j = check_cell(*cell)
    obs = as_observable((i, j))
    x = ens.free_coordinate(ens.K + 1)
    if ens.K == 0:
        F = np.full(ens.n, conditional_cdf_minus(state, (), obs))
    else:
        hists, inverse = np.unique(ens.codes, axis=0, return_inverse=True)
        table = np.array([conditional_cdf_minus(state, _history_from_codes(h), obs) for h in hists])
        F = table[inverse.reshape(-1)]
    if cdf_hook is not None:
        F = np.asarray(cdf_hook(F), dtype=float)
    base = 3 * (i - 1) + (j - 1)
    new = np.where(x < F, base, PLUS_OFFSET + base).astype(np.int8)
    return Ensemble(ens.seed, ens.start, np.column_stack([ens.codes, new]))


def g_batch(ens: Ensemble) -> np.ndarray:
    if ens.K == 0:
        return np.zeros(ens.n, dtype=np.int8)
    return np.where(ens.codes[:, -1] >= PLUS_OFFSET, 1, -1).astype(np.int8)


def run_sequential_batch(
    state: QuantumState, ens: Ensemble, seq: Sequence[Cell], cdf_hook: CdfHook | None = None
) -> tuple[np.ndarray, Ensemble]:
    """Outcomes of shape ``(n, len(seq))`` and the final ensemble."""
    if not seq:
        raise ValueError("measurement sequence is empty")
    cols = []
    for cell in seq:
        ens = phi_batch(state, ens, cell, cdf_hook)
        cols.append(g_batch(ens))
    return np.column_stack(cols), ens
