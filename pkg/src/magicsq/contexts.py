"""Simultaneous measurements, counterfactual value tables and the KS check."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import NamedTuple, Sequence

import numpy as np

from .hvmodel import (
    Cell,
    CdfHook,
    Ensemble,
    Microstate,
    g_batch,
    macrostate_g,
    phi,
    phi_batch,
)
from .qcore import QuantumState, check_cell

CONTEXT_NAMES = ("row1", "row2", "row3", "col1", "col2", "col3")


def context_cells(n: int) -> tuple[Cell, Cell, Cell]:
    """Cells of context ``n`` (1-3 rows, 4-6 columns) in grid order."""
    if not 1 <= n <= 6:
        raise ValueError(f"context index must be 1..6, got {n}")
    if n <= 3:
        return ((n, 1), (n, 2), (n, 3))
    j = n - 3
    return ((1, j), (2, j), (3, j))


def parse_ordering(spec: str) -> tuple[Cell, ...]:
    """``"33,32,31"`` -> ``((3, 3), (3, 2), (3, 1))`` (applied left to right)."""
    cells = []
    for tok in spec.split(","):
        tok = tok.strip()
        if len(tok) != 2 or not tok.isdigit():
            raise ValueError(f"bad cell {tok!r} in ordering {spec!r}; expected e.g. '33,32,31'")
        cells.append(check_cell(int(tok[0]), int(tok[1])))
    return tuple(cells)


def format_cells(cells: Sequence[Cell]) -> str:
    return ",".join(f"{i}{j}" for i, j in cells)


@dataclass(frozen=True)
class Context:
    """A row or column measured together, with the order its maps are applied.

    The default ordering matches the composition written right to left, so
    ``Context.paper(3)`` applies ``phi_33`` then ``phi_32`` then ``phi_31``.
    """

    n: int
    ordering: tuple[Cell, Cell, Cell]

    def __post_init__(self):
        cells = context_cells(self.n)
        order = tuple(tuple(c) for c in self.ordering)
        if sorted(order) != sorted(cells):
            raise ValueError(f"ordering {order} is not a permutation of {self.name} cells {cells}")
        object.__setattr__(self, "ordering", order)

    @classmethod
    def paper(cls, n: int) -> "Context":
        return cls(n, tuple(reversed(context_cells(n))))

    @classmethod
    def parse(cls, name: str, order: str = "paper") -> "Context":
        name = name.lower()
        if name not in CONTEXT_NAMES:
            raise ValueError(f"unknown context {name!r}; choose from {CONTEXT_NAMES}")
        n = CONTEXT_NAMES.index(name) + 1
        if order == "paper":
            return cls.paper(n)
        return cls(n, parse_ordering(order))

    @property
    def name(self) -> str:
        return CONTEXT_NAMES[self.n - 1]

    @property
    def cells(self) -> tuple[Cell, Cell, Cell]:
        return context_cells(self.n)

    @property
    def target_product(self) -> int:
        return -1 if self.n == 6 else 1


def capital_phi(state: QuantumState, u: Microstate, ctx: Context) -> Microstate:
    for i, j in ctx.ordering:
        u = phi(state, u, i, j)
    return u


def capital_g(state: QuantumState, u: Microstate, i: int, j: int) -> int:
    """Outcome ``V_ij`` would show if measured next on ``u``."""
    return macrostate_g(phi(state, u, i, j))


@dataclass(frozen=True, eq=False)
class ValueTable:
    """A complete +/-1 assignment to the nine cells."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.int8).reshape(3, 3)
        if not np.all(np.abs(v) == 1):
            raise ValueError("value table entries must all be +1 or -1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, cell: Cell) -> int:
        i, j = cell
        return int(self.values[i - 1, j - 1])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ValueTable) and bool(np.array_equal(self.values, other.values))

    def __hash__(self) -> int:
        return hash(self.values.tobytes())

    @classmethod
    def from_bits(cls, bits: int) -> "ValueTable":
        """Table number ``bits`` (0..511); bit ``3(i-1)+(j-1)`` set means -1."""
        return cls([[-1 if bits >> (3 * i + j) & 1 else 1 for j in range(3)] for i in range(3)])


def value_table(state: QuantumState, u: Microstate) -> ValueTable:
    return ValueTable([[capital_g(state, u, i, j) for j in (1, 2, 3)] for i in (1, 2, 3)])


class Membership(NamedTuple):
    R1: bool
    R2: bool
    R3: bool
    C1: bool
    C2: bool
    C3: bool

    def count(self) -> int:
        return sum(self)


SET_NAMES = Membership._fields


def _membership_array(v: np.ndarray) -> np.ndarray:
    """Row/column constraint flags for tables of shape (..., 3, 3).

    Zero entries (unrecorded values) fail every constraint they touch.
    """
    rows = np.prod(v, axis=-1)
    cols = np.prod(v, axis=-2)
    return np.concatenate([rows == 1, cols[..., :2] == 1, cols[..., 2:] == -1], axis=-1)


def set_membership(t: ValueTable | np.ndarray) -> Membership:
    v = t.values if isinstance(t, ValueTable) else np.asarray(t).reshape(3, 3)
    return Membership(*(bool(b) for b in _membership_array(v)))


def recorded_values(u: Microstate) -> np.ndarray:
    """Latest recorded outcome per cell, 0 where a cell was never measured."""
    v = np.zeros((3, 3), dtype=np.int8)
    for c in u.measured:
        i, j = c.cell
        v[i - 1, j - 1] = c.outcome
    return v


def microstate_membership(state: QuantumState, u: Microstate, mode: str = "counterfactual") -> Membership:
    """Row/column membership of ``u``.

    ``"counterfactual"`` evaluates every cell as ``G_ij(u)``.  ``"recorded"``
    uses only outcomes already written into ``u``; a microstate that has not
    been measured belongs to no set in this mode.
    """
    if mode == "counterfactual":
        return set_membership(value_table(state, u))
    if mode == "recorded":
        return set_membership(recorded_values(u))
    raise ValueError(f"unknown membership mode {mode!r}")


@dataclass(frozen=True)
class KSResult:
    count_all_six: int
    max_satisfiable: int
    per_constraint: tuple[int, ...]
    histogram: dict[int, int]


def all_tables() -> np.ndarray:
    """All 512 value tables, shape (512, 3, 3)."""
    signs = np.array(list(product((1, -1), repeat=9)), dtype=np.int8)
    return signs.reshape(-1, 3, 3)


def ks_exhaustive_check() -> KSResult:
    """Enumerate every +/-1 assignment against the six constraints."""
    m = _membership_array(all_tables())
    n_sat = m.sum(axis=1)
    hist = {int(k): int((n_sat == k).sum()) for k in np.unique(n_sat)}
    return KSResult(
        int(m.all(axis=1).sum()),
        int(n_sat.max()),
        tuple(int(x) for x in m.sum(axis=0)),
        hist,
    )


# --- decomposition into X1 = V11, X2 = V12, Y1 = V22, Y2 = V21 ------------------


@dataclass(frozen=True)
class Identity:
    name: str
    requires: tuple[str, ...]
    cell: Cell
    sign: int
    factors: tuple[Cell, ...]

    def holds(self, t: ValueTable) -> bool:
        return t[self.cell] == self.sign * int(np.prod([t[c] for c in self.factors]))


X1, X2, Y1, Y2 = (1, 1), (1, 2), (2, 2), (2, 1)

IDENTITIES = (
    Identity("R1: V13 = X1 X2", ("R1",), (1, 3), 1, (X1, X2)),
    Identity("R2: V23 = Y1 Y2", ("R2",), (2, 3), 1, (Y1, Y2)),
    Identity("R3: V33 = V31 V32", ("R3",), (3, 3), 1, ((3, 1), (3, 2))),
    Identity("C1: V31 = X1 Y2", ("C1",), (3, 1), 1, (X1, Y2)),
    Identity("C2: V32 = X2 Y1", ("C2",), (3, 2), 1, (X2, Y1)),
    Identity("C3: V33 = -V13 V23", ("C3",), (3, 3), -1, ((1, 3), (2, 3))),
    Identity("not R3: V33 = -X1 X2 Y1 Y2", ("C3", "R1", "R2"), (3, 3), -1, (X1, X2, Y1, Y2)),
    Identity("not C3: V33 = X1 Y2 X2 Y1", ("R3", "C1", "C2"), (3, 3), 1, (X1, Y2, X2, Y1)),
    Identity("not R1: V13 = -X1 X2", ("R2", "R3", "C1", "C2", "C3"), (1, 3), -1, (X1, X2)),
    Identity("not R2: V23 = -Y1 Y2", ("R1", "R3", "C1", "C2", "C3"), (2, 3), -1, (Y1, Y2)),
    Identity("not C1: V31 = -X1 Y2", ("R1", "R2", "R3", "C2", "C3"), (3, 1), -1, (X1, Y2)),
    Identity("not C2: V32 = -X2 Y1", ("R1", "R2", "R3", "C1", "C3"), (3, 2), -1, (X2, Y1)),
)


@dataclass
class DecompositionReport:
    """Which decomposition identities apply to a table, and whether they hold.

    ``results`` maps identity name to ``None`` when its hypothesis fails,
    otherwise to whether the conclusion holds.
    """

    membership: Membership
    results: dict[str, bool | None]

    @property
    def available(self) -> list[str]:
        return [k for k, v in self.results.items() if v is not None]

    @property
    def unavailable(self) -> list[str]:
        return [k for k, v in self.results.items() if v is None]

    @property
    def consistent(self) -> bool:
        return all(v is not False for v in self.results.values())

    @property
    def full_decomposition(self) -> bool:
        # every cell expressible in X1, X2, Y1, Y2 needs five of the six sets
        return self.membership.count() == 5


def check_decomposition(t: ValueTable) -> DecompositionReport:
    m = set_membership(t)
    flags = m._asdict()
    results = {}
    for ident in IDENTITIES:
        results[ident.name] = ident.holds(t) if all(flags[s] for s in ident.requires) else None
    return DecompositionReport(m, results)


# --- ensemble versions ---------------------------------------------------------


def capital_phi_batch(
    state: QuantumState, ens: Ensemble, ctx: Context, cdf_hook: CdfHook | None = None
) -> Ensemble:
    for cell in ctx.ordering:
        ens = phi_batch(state, ens, cell, cdf_hook)
    return ens


def capital_g_batch(state: QuantumState, ens: Ensemble, cell: Cell) -> np.ndarray:
    return g_batch(phi_batch(state, ens, cell))


def value_table_batch(state: QuantumState, ens: Ensemble) -> np.ndarray:
    """Counterfactual tables for every run, shape (n, 3, 3)."""
    out = np.empty((ens.n, 3, 3), dtype=np.int8)
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            out[:, i - 1, j - 1] = capital_g_batch(state, ens, (i, j))
    return out


def membership_batch(tables: np.ndarray) -> np.ndarray:
    """Boolean array (n, 6) ordered R1, R2, R3, C1, C2, C3."""
    return _membership_array(tables)
