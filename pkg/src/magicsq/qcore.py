"""Exact quantum oracle for the Mermin-Peres square.

Two-qubit operators are 4x4 complex arrays in the computational basis
ordered |00>, |01>, |10>, |11> with sigma_z|0> = +|0>.  Everything here is a
pure function of its inputs; arrays handed out are marked read-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

ATOL = 1e-12
PSD_TOL = 1e-10
ZERO_PROB_EPS = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# row-major, labels read left factor then right factor
SQUARE_LABELS = (
    ("XI", "IX", "XX"),
    ("IY", "YI", "YY"),
    ("XY", "YX", "ZZ"),
)

CELLS = tuple((i, j) for i in (1, 2, 3) for j in (1, 2, 3))
IDENTITY = np.eye(4, dtype=complex)


class ZeroProbabilityHistory(ValueError):
    """Conditioning on a measurement history that has probability zero."""


class InvalidStateError(ValueError):
    """A matrix that is not a valid two-qubit density matrix."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def pauli_product(label: str) -> np.ndarray:
    """Kronecker product for a two-letter label such as ``"XY"``."""
    if len(label) != 2 or any(c not in PAULI for c in label):
        raise ValueError(f"bad Pauli label {label!r}")
    return np.kron(PAULI[label[0]], PAULI[label[1]])


def check_sign(s: int) -> int:
    if s not in (-1, 1):
        raise ValueError(f"outcome must be -1 or +1, got {s!r}")
    return int(s)


def check_cell(i: int, j: int) -> tuple[int, int]:
    if not (isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer))):
        raise TypeError(f"grid indices must be integers, got ({i!r}, {j!r})")
    if not (1 <= i <= 3 and 1 <= j <= 3):
        raise IndexError(f"grid cell ({i}, {j}) outside the 3x3 square")
    return int(i), int(j)


@dataclass(frozen=True, eq=False)
class Observable:
    """One cell of the magic square together with its matrix."""

    row: int
    col: int
    matrix: np.ndarray = field(repr=False)

    @property
    def cell(self) -> tuple[int, int]:
        return (self.row, self.col)

    @property
    def label(self) -> str:
        return SQUARE_LABELS[self.row - 1][self.col - 1]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Observable) and self.cell == other.cell

    def __hash__(self) -> int:
        return hash(self.cell)

    def commutes_with(self, other: "Observable") -> bool:
        return cells_commute(self.cell, other.cell)


@lru_cache(maxsize=None)
def magic_square_operator(i: int, j: int) -> Observable:
    """Observable in row ``i``, column ``j`` (both 1-based)."""
    i, j = check_cell(i, j)
    return Observable(i, j, _frozen(pauli_product(SQUARE_LABELS[i - 1][j - 1])))


def square() -> list[Observable]:
    return [magic_square_operator(i, j) for i, j in CELLS]


def cells_commute(a: tuple[int, int], b: tuple[int, int]) -> bool:
    # same row or same column commute; everything else anticommutes
    return a[0] == b[0] or a[1] == b[1]


def as_observable(obs: Observable | tuple[int, int]) -> Observable:
    if isinstance(obs, Observable):
        return obs
    return magic_square_operator(*obs)


@dataclass
class AlgebraReport:
    """Outcome of :func:`verify_square_algebra`; ``checks`` maps name to pass flag."""

    checks: dict[str, bool]
    max_residual: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]


def verify_square_algebra(tol: float = ATOL) -> AlgebraReport:
    """Check the commutation structure and row/column products of the square.

    Four families are checked: commuting within rows and columns,
    anticommuting across, unit row and column-1/2 products, and the
    ``-1`` product of column 3.
    """
    ops = {c: magic_square_operator(*c).matrix for c in CELLS}
    checks: dict[str, bool] = {}
    resid = {"commute": 0.0, "anticommute": 0.0, "products": 0.0, "column3": 0.0}

    for a, b in combinations(CELLS, 2):
        A, B = ops[a], ops[b]
        if cells_commute(a, b):
            r = np.abs(A @ B - B @ A).max()
            checks[f"commute V{a[0]}{a[1]} V{b[0]}{b[1]}"] = bool(r <= tol)
            resid["commute"] = max(resid["commute"], float(r))
        else:
            r = np.abs(A @ B + B @ A).max()
            checks[f"anticommute V{a[0]}{a[1]} V{b[0]}{b[1]}"] = bool(r <= tol)
            resid["anticommute"] = max(resid["anticommute"], float(r))

    lines = [(f"row{i}", [(i, 1), (i, 2), (i, 3)], 1) for i in (1, 2, 3)]
    lines += [(f"col{j}", [(1, j), (2, j), (3, j)], 1 if j < 3 else -1) for j in (1, 2, 3)]
    for name, cells, sign in lines:
        prod = ops[cells[0]] @ ops[cells[1]] @ ops[cells[2]]
        r = float(np.abs(prod - sign * IDENTITY).max())
        checks[f"product {name} = {sign:+d}I"] = r <= tol
        key = "column3" if name == "col3" else "products"
        resid[key] = max(resid[key], r)

    return AlgebraReport(checks, resid)


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Two-qubit density matrix, validated on construction."""

    rho: np.ndarray = field(repr=False)
    name: str | None = None

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        validate_density_matrix(rho)
        object.__setattr__(self, "rho", _frozen(rho))

    def expectation(self, op: np.ndarray | Observable) -> float:
        m = op.matrix if isinstance(op, Observable) else np.asarray(op)
        return float(np.real(np.trace(self.rho @ m)))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(np.real(np.trace(self.rho @ self.rho)) - 1.0) < tol


def validate_density_matrix(rho: np.ndarray) -> None:
    """Raise :class:`InvalidStateError` naming the first violated invariant."""
    if rho.shape != (4, 4):
        raise InvalidStateError(f"density matrix must be 4x4, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density matrix has non-finite entries")
    herm = float(np.abs(rho - rho.conj().T).max())
    if herm > ATOL:
        raise InvalidStateError(f"not Hermitian (max |rho - rho^dagger| = {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > ATOL:
        raise InvalidStateError(f"trace is {tr.real:.15g}, expected 1")
    lo = float(np.linalg.eigvalsh(rho).min())
    if lo < -PSD_TOL:
        raise InvalidStateError(f"not positive semidefinite (min eigenvalue {lo:.3g})")


def pure_state(psi: Sequence[complex], name: str | None = None) -> QuantumState:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return QuantumState(np.outer(psi, psi.conj()), name)


def random_pure_state(seed: int) -> QuantumState:
    """Haar-random pure state from a seeded generator."""
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    return pure_state(psi, f"random-pure-{seed}")


def _named_matrix(name: str) -> np.ndarray:
    if name in ("singlet", "hasegawa-bell"):
        if name == "singlet":
            return 0.5 * np.array(
                [[0, 0, 0, 0], [0, 1, -1, 0], [0, -1, 1, 0], [0, 0, 0, 0]], dtype=complex
            )
        # (|down>|I> - |up>|II>)/sqrt2 with up = |0>, path I = |0>
        psi = np.zeros(4, dtype=complex)
        psi[0b10] = 1.0
        psi[0b01] = -1.0
        psi /= np.sqrt(2)
        return np.outer(psi, psi.conj())
    if name == "huang-bell":
        # (|u>|z+> + |d>|z->)/sqrt2 with u = z+ = |0>
        psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        return np.outer(psi, psi.conj())
    if name == "mixed":
        return IDENTITY / 4
    raise KeyError(f"unknown named state {name!r}; choose from {sorted(NAMED_STATES)}")


NAMED_STATES = ("singlet", "huang-bell", "hasegawa-bell", "mixed")


@lru_cache(maxsize=None)
def named_state(name: str) -> QuantumState:
    return QuantumState(_named_matrix(name), name)


def state_from_json(obj: dict | str | Path) -> QuantumState:
    """Load a state from ``{"named": ...}`` or ``{"matrix": [[[re, im], ...], ...]}``.

    ``obj`` may be an already-parsed dict, a JSON string, or a path.
    """
    if isinstance(obj, Path) or (isinstance(obj, str) and not obj.lstrip().startswith("{")):
        obj = json.loads(Path(obj).read_text())
    elif isinstance(obj, str):
        obj = json.loads(obj)
    if "named" in obj:
        return named_state(obj["named"])
    if "matrix" not in obj:
        raise InvalidStateError("state file needs a 'named' or 'matrix' entry")
    m = np.asarray(obj["matrix"], dtype=float)
    if m.shape != (4, 4, 2):
        raise InvalidStateError(f"matrix must be 4x4 of [re, im] pairs, got shape {m.shape}")
    return QuantumState(m[..., 0] + 1j * m[..., 1], obj.get("name"))


def state_to_json(state: QuantumState) -> dict:
    if state.name in NAMED_STATES:
        return {"named": state.name}
    rho = state.rho
    return {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in rho]}


def load_state(source: str) -> QuantumState:
    """Named state or path to a state file."""
    if source in NAMED_STATES:
        return named_state(source)
    return state_from_json(Path(source))


def projector(obs: Observable | np.ndarray, s: int) -> np.ndarray:
    """Eigenprojector ``(I + s*M)/2`` of an involution ``M``."""
    s = check_sign(s)
    m = obs.matrix if isinstance(obs, Observable) else np.asarray(obs, dtype=complex)
    if m.shape != (4, 4) or np.abs(m @ m - IDENTITY).max() > ATOL:
        raise ValueError("projector() needs a 4x4 involution (M @ M == I)")
    return (IDENTITY + s * m) / 2


@lru_cache(maxsize=None)
def _cell_projector(cell: tuple[int, int], s: int) -> np.ndarray:
    return _frozen(projector(magic_square_operator(*cell), s))


def _proj(obs: Observable | tuple[int, int] | np.ndarray, s: int) -> np.ndarray:
    if isinstance(obs, Observable):
        return _cell_projector(obs.cell, check_sign(s))
    if isinstance(obs, np.ndarray):
        return projector(obs, s)
    return _cell_projector(check_cell(*obs), check_sign(s))


def born_prob(state: QuantumState, obs: Observable | tuple[int, int] | np.ndarray, s: int) -> float:
    p = float(np.real(np.trace(state.rho @ _proj(obs, s))))
    return min(max(p, 0.0), 1.0)


def luders_update(
    state: QuantumState, obs: Observable | tuple[int, int], s: int, eps: float = ZERO_PROB_EPS
) -> QuantumState:
    """Post-measurement state ``P rho P / Tr[P rho P]`` for outcome ``s``."""
    P = _proj(obs, s)
    sigma = P @ state.rho @ P
    p = float(np.real(np.trace(sigma)))
    if p <= eps:
        what = "operator" if isinstance(obs, np.ndarray) else "V%d%d" % as_observable(obs).cell
        raise ZeroProbabilityHistory(f"outcome {s:+d} of {what} has probability {p:.3g} <= {eps:g}")
    sigma = sigma / p
    # restore exact Hermiticity lost to rounding
    return QuantumState((sigma + sigma.conj().T) / 2)


def joint_prob(
    state: QuantumState, seq: Iterable[tuple[Observable | tuple[int, int], int]]
) -> float:
    """Probability of a sequence of projective outcomes.

    Computed as ``Tr[K rho K^dagger]`` with ``K = P_n ... P_1``, built by
    iterating unnormalised Lueders updates.  Impossible sequences give 0.
    """
    sigma = state.rho
    for obs, s in seq:
        P = _proj(obs, s)
        sigma = P @ sigma @ P
    return min(max(float(np.real(np.trace(sigma))), 0.0), 1.0)


def trace_product_prob(
    state: QuantumState, seq: Iterable[tuple[Observable | tuple[int, int], int]]
) -> complex:
    """``Tr[rho P_1 ... P_n]`` taken literally.

    Agrees with :func:`joint_prob` whenever the observables commute; for
    non-commuting sequences it need not even be real.
    """
    prod = IDENTITY
    for obs, s in seq:
        prod = prod @ _proj(obs, s)
    return complex(np.trace(state.rho @ prod))
