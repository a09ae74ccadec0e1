"""Worked experiments on the entangled state and reanalysis of laboratory tests.

Replays run the fixed microstate ``u = [0.76, 0.51, 0.02, 0.82, ...]`` and
must match the reference codes and outcomes exactly.  The analyses of the
Huang, Hasegawa and Cabello set-ups run the model with ideal detectors; the
measured laboratory values are carried along for reference only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Sequence

import numpy as np

from . import _streams
from .contexts import (
    Context,
    all_tables,
    capital_g,
    capital_phi_batch,
    format_cells,
    membership_batch,
    microstate_membership,
    set_membership,
    value_table,
    value_table_batch,
)
from .hvmodel import Cell, Ensemble, Microstate, macrostate_g, phi, run_sequential_batch
from .qcore import PAULI, SQUARE_LABELS, QuantumState, joint_prob, magic_square_operator, named_state

PAPER_MICROSTATE = Microstate(free=(0.76, 0.51, 0.02, 0.82))


# --- exact replays ---------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    """A replayable experiment.

    ``plan`` is a tuple of cells for sequential measurement or a
    :class:`Context` for a simultaneous one.  ``expected`` holds the
    reference values keyed like the report's ``observed`` dict.
    """

    id: str
    title: str
    state: QuantumState
    plan: tuple[Cell, ...] | Context
    expected: dict[str, list]
    readouts: dict[str, tuple[Cell, ...]] = field(default_factory=dict)
    membership: dict[str, str] = field(default_factory=dict)


def _specs() -> dict[str, ExperimentSpec]:
    singlet = named_state("singlet")
    row3 = ((3, 1), (3, 2), (3, 3))
    col3 = ((1, 3), (2, 3), (3, 3))
    return {
        "Exp1": ExperimentSpec(
            "Exp1", "Sequential measurements of row 3", singlet, ((3, 3), (3, 2), (3, 1)),
            {"codes": [8, 25, 6], "outcomes": [-1, 1, -1], "free": [0.82], "initial_macrostate": [0]},
        ),
        "Exp2": ExperimentSpec(
            "Exp2", "Sequential measurements of column 3", singlet, ((3, 3), (2, 3), (1, 3)),
            {"codes": [8, 5, 2], "outcomes": [-1, -1, -1], "free": [0.82], "initial_macrostate": [0]},
        ),
        "Exp3": ExperimentSpec(
            "Exp3", "Simultaneous measurement of row 3", singlet, Context.paper(3),
            {"codes": [8, 25, 6], "outcomes": [-1, 1, -1], "free": [0.82], "unobserved_col3": [1, 1, -1]},
            readouts={"outcomes": row3, "unobserved_col3": col3},
            membership={"R3": "in"},
        ),
        "Exp3-Col3": ExperimentSpec(
            "Exp3-Col3", "Simultaneous measurement of column 3", singlet, Context.paper(6),
            {"codes": [8, 5, 2], "outcomes": [-1, -1, -1], "free": [0.82], "unobserved_row3": [1, 1, -1]},
            readouts={"outcomes": col3, "unobserved_row3": row3},
            membership={"C3": "in", "R3": "out"},
        ),
        "Exp4": ExperimentSpec(
            "Exp4", "Alternative simultaneous measurement of row 3", singlet,
            Context(3, ((3, 1), (3, 2), (3, 3))),
            {"codes": [24, 7, 8], "outcomes": [1, -1, -1], "free": [0.82]},
            readouts={"outcomes": row3},
        ),
    }


EXPERIMENTS = _specs()
_ALIASES = {"1": "Exp1", "2": "Exp2", "3": "Exp3", "3c": "Exp3-Col3", "4": "Exp4"}


def resolve_experiment(id: str) -> str:
    key = _ALIASES.get(str(id).lower(), str(id))
    for name in EXPERIMENTS:
        if name.lower() == key.lower():
            return name
    raise KeyError(f"unknown experiment {id!r}; choose from {list(EXPERIMENTS)} or {list(_ALIASES)}")


@dataclass
class ReplayReport:
    experiment: str
    steps: list[dict[str, Any]]
    observed: dict[str, list]
    expected: dict[str, list]
    first_divergence: str | None
    oracle_probability: float
    notes: list[str]

    @property
    def passed(self) -> bool:
        return self.first_divergence is None

    def to_json(self) -> dict:
        return {
            "experiment": self.experiment,
            "per_run": [{"steps": self.steps}],
            "aggregates": self.observed,
            "oracle_prediction": {"probability_of_observed_sequence": self.oracle_probability},
            "paper_reference_values": self.expected,
            "notes": self.notes,
            "first_divergence": self.first_divergence,
            "pass": self.passed,
        }


def _snapshot(label: str, u: Microstate, n_coords: int = 4) -> dict[str, Any]:
    return {
        "label": label,
        "codes": [int(c) for c in u.measured],
        "free": list(u.free),
        "coordinates": [str(x) if not isinstance(x, float) else x for x in u.prefix(n_coords)],
        "macrostate": macrostate_g(u),
    }


def _compare(expected: dict[str, list], observed: dict[str, list]) -> str | None:
    for key, want in expected.items():
        got = observed.get(key)
        if got is None:
            return f"{key}: not produced"
        if len(got) != len(want):
            return f"{key}: expected {len(want)} entries, got {len(got)}"
        for k, (a, b) in enumerate(zip(want, got)):
            if a != b:
                return f"{key}[{k}]: expected {a}, got {b}"
    return None


def replay_experiment(id: str, u: Microstate = PAPER_MICROSTATE) -> ReplayReport:
    """Run a worked experiment from ``u`` and compare entry by entry."""
    spec = EXPERIMENTS[resolve_experiment(id)]
    state = spec.state
    order = spec.plan.ordering if isinstance(spec.plan, Context) else spec.plan

    steps = [_snapshot("u", u)]
    seq_outcomes = []
    v = u
    for i, j in order:
        v = phi(state, v, i, j)
        seq_outcomes.append(macrostate_g(v))
        steps.append(_snapshot(f"phi{i}{j}", v))

    observed: dict[str, list] = {"codes": [int(c) for c in v.measured], "free": list(v.free[:1])}
    expected = dict(spec.expected)
    notes: list[str] = []
    if isinstance(spec.plan, Context):
        for key, cells in spec.readouts.items():
            observed[key] = [capital_g(state, v, *c) for c in cells]
        m = set_membership(value_table(state, v))._asdict()
        for name, want in spec.membership.items():
            flag = m[name] if want == "in" else not m[name]
            observed[f"membership_{name}_{want}"] = [bool(flag)]
            expected[f"membership_{name}_{want}"] = [True]
        if spec.id in ("Exp3", "Exp3-Col3"):
            cf = microstate_membership(state, u, "counterfactual")
            rec = microstate_membership(state, u, "recorded")
            notes.append(
                "initial u: counterfactual membership R3=%s C3=%s; recorded-values membership "
                "R3=%s C3=%s (reference places u in neither)" % (cf.R3, cf.C3, rec.R3, rec.C3)
            )
    else:
        observed["outcomes"] = seq_outcomes
        observed["initial_macrostate"] = [macrostate_g(u)]

    return ReplayReport(
        spec.id,
        steps,
        observed,
        expected,
        _compare(expected, observed),
        joint_prob(state, list(zip(order, seq_outcomes))),
        notes,
    )


# --- analyses ----------------------------------------------------------------------


@dataclass
class AnalysisResult:
    """Per-run records plus aggregates derived from them.

    ``aggregates`` is always reproducible from ``per_run`` through
    :meth:`recompute`.
    """

    experiment: str
    config: dict[str, Any]
    per_run: dict[str, np.ndarray]
    aggregates: dict[str, Any]
    oracle_prediction: dict[str, Any]
    paper_reference_values: dict[str, Any]
    passed: bool

    def recompute(self) -> dict[str, Any]:
        return _AGGREGATORS[self.experiment](self.per_run)

    def to_json(self, max_runs: int | None = 20) -> dict:
        runs = {k: np.asarray(v)[:max_runs].tolist() for k, v in self.per_run.items()}
        return {
            "experiment": self.experiment,
            "config": self.config,
            "per_run": runs,
            "aggregates": _jsonable(self.aggregates),
            "oracle_prediction": _jsonable(self.oracle_prediction),
            "paper_reference_values": self.paper_reference_values,
            "pass": self.passed,
        }


def _jsonable(obj):
    return json.loads(json.dumps(obj, default=lambda o: o.tolist() if hasattr(o, "tolist") else str(o)))


# Huang et al.: the square with sigma_y and sigma_z interchanged.

HUANG_LABELS = tuple(tuple(label.translate(str.maketrans("YZ", "ZY")) for label in row) for row in SQUARE_LABELS)

_W1 = (PAULI["Y"] + PAULI["Z"]) / np.sqrt(2)
RELABEL = np.kron(_W1, _W1)


def huang_operator(i: int, j: int) -> np.ndarray:
    a, b = HUANG_LABELS[i - 1][j - 1]
    return np.kron(PAULI[a], PAULI[b])


def huang_relabel_sign(i: int, j: int) -> int:
    """Sign ``s`` with ``W V'_ij W^dagger = s V_ij``; the relabeling flips sigma_x."""
    return (-1) ** HUANG_LABELS[i - 1][j - 1].count("X")


def relabel_state(state: QuantumState) -> QuantumState:
    return QuantumState(RELABEL @ state.rho @ RELABEL.conj().T)


Z1X2 = (3, 2)
X1Z2 = (3, 1)


def _huang_aggregates(r: dict[str, np.ndarray]) -> dict[str, Any]:
    equal = r["z1x2"] == r["x1z2"]
    return {
        "n_runs": int(equal.size),
        "fraction_equal": float(equal.mean()),
        "count_equal": int(equal.sum()),
        "mean_product": float((r["z1x2"] * r["x1z2"]).mean()),
        "fraction_in_R3prime": float(r["in_R3"].mean()),
    }


def analyze_huang(
    n_runs: int,
    seed: int,
    state: QuantumState | None = None,
    order: Sequence[Cell] = (Z1X2, X1Z2),
    tol: float = 0.01,
) -> AnalysisResult:
    """Joint measurement of ``Z1 X2`` and ``X1 Z2`` on the Huang Bell state.

    The primed square is mapped onto the standard one by a fixed unitary,
    so the model runs on standard cells and outcomes pick up the relabeling
    sign.  The oracle works on the primed operators directly.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    state = state or named_state("huang-bell")
    rel = relabel_state(state)
    outcomes, ens = run_sequential_batch(rel, Ensemble.fresh(seed, n_runs), list(order))
    cols = {c: outcomes[:, k] * huang_relabel_sign(*c) for k, c in enumerate(order)}
    in_r3 = membership_batch(value_table_batch(rel, ens))[:, 2]
    per_run = {"z1x2": cols[Z1X2].astype(np.int8), "x1z2": cols[X1Z2].astype(np.int8), "in_R3": in_r3}
    agg = _huang_aggregates(per_run)

    A, B = huang_operator(*Z1X2), huang_operator(*X1Z2)
    p_equal = sum(joint_prob(state, [(A, s), (B, s)]) for s in (-1, 1))
    if p_equal in (0.0, 1.0) or abs(p_equal - round(p_equal)) < 1e-12:
        ok = agg["fraction_equal"] == round(p_equal)
    else:
        ok = abs(agg["fraction_equal"] - p_equal) <= tol
    return AnalysisResult(
        "huang",
        {"n_runs": n_runs, "seed": seed, "state": state.name, "order": format_cells(order), "tol": tol},
        per_run,
        agg,
        {"fraction_equal": p_equal, "product_expectation": state.expectation(A @ B)},
        {"measured_fraction_equal": 0.19, "note": "laboratory value, not modeled"},
        bool(ok),
    )


# Hasegawa et al.: C' = 1 - Ex - Ey - Ez on the column-3 observables.

HASEGAWA_CELLS = {"x": (1, 3), "y": (2, 3), "z": (3, 3)}


def _hasegawa_aggregates(r: dict[str, np.ndarray]) -> dict[str, Any]:
    E = {a: float(r[f"outcome_{a}"].mean()) for a in "xyz"}
    c3 = np.concatenate([r[f"cnc_c3_{a}"] for a in "xyz"])
    hz = np.concatenate([r[f"cnc_hasegawa_{a}"] for a in "xyz"])
    direct = np.concatenate([r[f"cnc_direct_{a}"] for a in "xyz"])
    return {
        "E_x": E["x"],
        "E_y": E["y"],
        "E_z": E["z"],
        "C_prime": 1.0 - E["x"] - E["y"] - E["z"],
        "cnc_c3_values": sorted(int(v) for v in np.unique(c3)),
        "cnc_c3_all_equal_4": bool(np.all(c3 == 4)),
        "cnc_hasegawa_values": sorted(int(v) for v in np.unique(hz)),
        "cnc_direct_values": sorted(int(v) for v in np.unique(direct)),
        "fraction_in_R1_R2": float(np.concatenate([r[f"in_R1R2_{a}"] for a in "xyz"]).mean()),
        "fraction_in_C3": float(np.concatenate([r[f"in_C3_{a}"] for a in "xyz"]).mean()),
    }


def analyze_hasegawa(
    n_runs_per_observable: int,
    seed: int,
    state: QuantumState | None = None,
    via: str = "col3",
    tol: float = 0.02,
) -> AnalysisResult:
    """Three independent run sets for ``xx``, ``yy`` and ``zz``.

    ``via="col3"`` measures each observable through the column-3 context;
    ``via="rows"`` measures ``V_k3`` through row ``k``.

    Every trajectory also reports the noncontextual quantity evaluated on
    its post-measurement value table ``t`` in three ways, with ``a = t[1,3]``
    and ``b = t[2,3]`` standing for ``X1 X2`` and ``Y1 Y2``:
    ``direct = 1 - a - b - t[3,3]``, the column-3 form ``1 - a - b + a b``
    (values {0, 4}) and the row-3 form ``1 - a - b - a b`` (values {-2, 2}).
    """
    n = n_runs_per_observable
    if n < 1:
        raise ValueError("n_runs_per_observable must be >= 1")
    if via not in ("col3", "rows"):
        raise ValueError("via must be 'col3' or 'rows'")
    state = state or named_state("hasegawa-bell")
    per_run: dict[str, np.ndarray] = {}
    for k, (axis, cell) in enumerate(HASEGAWA_CELLS.items(), start=1):
        ctx = Context.paper(6) if via == "col3" else Context.paper(cell[0])
        ens = capital_phi_batch(state, Ensemble.fresh(_streams.derive_seed(seed, k), n), ctx)
        pos = ctx.ordering.index(cell)
        per_run[f"outcome_{axis}"] = ens.outcomes()[:, pos]
        t = value_table_batch(state, ens).astype(np.int64)
        a, b, c = t[:, 0, 2], t[:, 1, 2], t[:, 2, 2]
        per_run[f"cnc_direct_{axis}"] = 1 - a - b - c
        per_run[f"cnc_c3_{axis}"] = 1 - a - b + a * b
        per_run[f"cnc_hasegawa_{axis}"] = 1 - a - b - a * b
        m = membership_batch(t)
        per_run[f"in_R1R2_{axis}"] = m[:, 0] & m[:, 1]
        per_run[f"in_C3_{axis}"] = m[:, 5]
    agg = _hasegawa_aggregates(per_run)

    E_qm = {a: state.expectation(magic_square_operator(*c)) for a, c in HASEGAWA_CELLS.items()}
    c_qm = 1.0 - sum(E_qm.values())
    deterministic = all(abs(abs(e) - 1.0) < 1e-12 for e in E_qm.values())
    if deterministic:
        ok = agg["C_prime"] == round(c_qm) and agg["cnc_c3_all_equal_4"] == (round(c_qm) == 4)
    else:
        ok = abs(agg["C_prime"] - c_qm) <= tol
    return AnalysisResult(
        "hasegawa",
        {"n_runs_per_observable": n, "seed": seed, "state": state.name, "via": via, "tol": tol},
        per_run,
        agg,
        {"E_x": E_qm["x"], "E_y": E_qm["y"], "E_z": E_qm["z"], "C_QM": c_qm},
        {"measured_C_prime": 3.138, "measured_C_prime_err": 0.015, "noncontextual_bound": 2,
         "note": "laboratory value, not modeled"},
        bool(ok),
    )


# Cabello et al.: five sub-experiments, products of commuting observables.

X1, X2, Y1, Y2 = (1, 1), (1, 2), (2, 2), (2, 1)
CABELLO_SUBEXPERIMENTS = (
    (X1, X2),
    (Y1, Y2),
    ((3, 1), X1, Y2),
    ((3, 2), Y1, X2),
    ((3, 1), (3, 2)),
)
CABELLO_PREDICTION = (-1, -1, 1, 1, -1)
# relation k holds on a table iff the product of these cells equals the sign
CABELLO_RELATIONS = (
    ("3a", (X1, X2), -1, "B1"),
    ("3b", (Y1, Y2), -1, "B2"),
    ("3c", ((3, 1), X1, Y2), 1, "C1"),
    ("3d", ((3, 2), Y1, X2), 1, "C2"),
    ("3e", ((3, 1), (3, 2)), -1, "B3"),
)


def cabello_relations(tables: np.ndarray) -> np.ndarray:
    """Boolean (n, 5): which of relations 3a-3e each table satisfies."""
    tables = np.asarray(tables).reshape(-1, 3, 3)
    out = []
    for _, cells, sign, _ in CABELLO_RELATIONS:
        prod = np.ones(tables.shape[0], dtype=np.int64)
        for i, j in cells:
            prod = prod * tables[:, i - 1, j - 1]
        out.append(prod == sign)
    return np.column_stack(out)


def _cabello_aggregates(r: dict[str, np.ndarray]) -> dict[str, Any]:
    prods = [r[f"product_{k}"] for k in range(1, 6)]
    return {
        "averages": [float(p.mean()) for p in prods],
        "every_run_matches": bool(all(np.all(p == t) for p, t in zip(prods, CABELLO_PREDICTION))),
        "fraction_in_own_set": [float(r[f"in_own_set_{k}"].mean()) for k in range(1, 6)],
        "max_relations_per_table": int(max(r[f"n_relations_{k}"].max() for k in range(1, 6))),
    }


def analyze_cabello(
    n_runs: int,
    seed: int,
    state: QuantumState | None = None,
    orders: Sequence[Sequence[Cell]] | None = None,
) -> AnalysisResult:
    """Five sequential sub-experiments, each on fresh microstates.

    ``orders`` overrides the measurement order inside each sub-experiment;
    by default the observables are measured in the listed order.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    state = state or named_state("hasegawa-bell")
    orders = [tuple(o) for o in (orders or CABELLO_SUBEXPERIMENTS)]
    for o, ref in zip(orders, CABELLO_SUBEXPERIMENTS):
        if sorted(o) != sorted(ref):
            raise ValueError(f"order {o} is not a permutation of {ref}")
    per_run: dict[str, np.ndarray] = {}
    oracle = []
    for k, seq in enumerate(orders, start=1):
        outcomes, ens = run_sequential_batch(state, Ensemble.fresh(_streams.derive_seed(seed, k), n_runs), seq)
        per_run[f"product_{k}"] = np.prod(outcomes.astype(np.int64), axis=1).astype(np.int8)
        rel = cabello_relations(value_table_batch(state, ens))
        per_run[f"in_own_set_{k}"] = rel[:, k - 1]
        per_run[f"n_relations_{k}"] = rel.sum(axis=1).astype(np.int8)
        oracle.append(sum(
            int(np.prod(s)) * joint_prob(state, list(zip(seq, s))) for s in product((-1, 1), repeat=len(seq))
        ))
    agg = _cabello_aggregates(per_run)
    agg["tables_satisfying_all_five"] = int(cabello_relations(all_tables()).all(axis=1).sum())
    return AnalysisResult(
        "cabello",
        {"n_runs": n_runs, "seed": seed, "state": state.name, "orders": [format_cells(o) for o in orders]},
        per_run,
        agg,
        {"product_expectations": oracle},
        {"quantum_prediction": list(CABELLO_PREDICTION)},
        bool(agg["every_run_matches"] and agg["tables_satisfying_all_five"] == 0),
    )


def _cabello_recompute(r):
    agg = _cabello_aggregates(r)
    agg["tables_satisfying_all_five"] = int(cabello_relations(all_tables()).all(axis=1).sum())
    return agg


_AGGREGATORS: dict[str, Callable[[dict[str, np.ndarray]], dict[str, Any]]] = {
    "huang": _huang_aggregates,
    "hasegawa": _hasegawa_aggregates,
    "cabello": _cabello_recompute,
}
