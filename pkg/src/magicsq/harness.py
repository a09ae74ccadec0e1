"""Monte Carlo engine and statistical verification of the model.

Run ``r`` of a configuration with seed ``s`` always starts from the same
microstate, whose free coordinates come from the counter-based stream
``(s, coordinate)`` at position ``r``.  Chunking and worker count therefore
never change a result.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations, product
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import _streams
from .contexts import (
    Context,
    capital_g_batch,
    capital_phi_batch,
    format_cells,
    membership_batch,
    value_table_batch,
)
from .hvmodel import Cell, CdfHook, Ensemble, run_sequential_batch
from .qcore import (
    CELLS,
    QuantumState,
    ZeroProbabilityHistory,
    born_prob,
    cells_commute,
    joint_prob,
    load_state,
    named_state,
    random_pure_state,
)

log = logging.getLogger(__name__)

DEFAULT_CHUNK = 1 << 16
Outcome = tuple[int, ...]


@dataclass(frozen=True)
class RunConfig:
    """One Monte Carlo experiment.

    ``plan`` is either a sequence of cells (measured one after another) or a
    :class:`Context` (measured simultaneously with its ordering).
    """

    state: str | QuantumState
    plan: tuple[Cell, ...] | Context
    n_runs: int = 100_000
    seed: int = 42
    tolerance: float = 0.02
    out: str | None = None

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if not 0.0 < self.tolerance < 1.0:
            raise ValueError("tolerance must lie in (0, 1)")
        if not isinstance(self.plan, Context):
            if not self.plan:
                raise ValueError("sequential plan is empty")
            object.__setattr__(self, "plan", tuple(tuple(c) for c in self.plan))

    @property
    def mode(self) -> str:
        return "simultaneous" if isinstance(self.plan, Context) else "sequential"

    @property
    def cells(self) -> tuple[Cell, ...]:
        return self.plan.ordering if isinstance(self.plan, Context) else self.plan

    def resolve_state(self) -> QuantumState:
        return self.state if isinstance(self.state, QuantumState) else load_state(self.state)

    def to_json(self) -> dict:
        st = self.state if isinstance(self.state, str) else (self.state.name or "<matrix>")
        d = {"state": st, "mode": self.mode, "plan": format_cells(self.cells), "n_runs": self.n_runs,
             "seed": self.seed, "tolerance": self.tolerance}
        if isinstance(self.plan, Context):
            d["context"] = self.plan.name
        return d


@dataclass
class EmpiricalDistribution:
    counts: dict[Outcome, int]
    total: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts do not sum to total")
        if len({len(k) for k in self.counts}) > 1:
            raise ValueError("outcome tuples of mixed arity")
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("negative count")

    @property
    def arity(self) -> int | None:
        return len(next(iter(self.counts))) if self.counts else None

    def frequencies(self) -> dict[Outcome, float]:
        return {k: v / self.total for k, v in self.counts.items()}

    def merge(self, other: "EmpiricalDistribution") -> "EmpiricalDistribution":
        if self.counts and other.counts and self.arity != other.arity:
            raise ValueError("cannot merge distributions of different arity")
        c = Counter(self.counts)
        c.update(other.counts)
        return EmpiricalDistribution(dict(c), self.total + other.total)

    @classmethod
    def from_outcomes(cls, outcomes: np.ndarray) -> "EmpiricalDistribution":
        rows, counts = np.unique(np.asarray(outcomes), axis=0, return_counts=True)
        return cls({tuple(int(x) for x in r): int(c) for r, c in zip(rows, counts)}, int(counts.sum()))


def _key(t: Outcome) -> str:
    return ",".join(f"{x:+d}" for x in t)


def simulate(
    state: QuantumState,
    plan: Sequence[Cell] | Context,
    seed: int,
    start: int,
    count: int,
    cdf_hook: CdfHook | None = None,
) -> tuple[np.ndarray, Ensemble]:
    """Outcomes for runs ``start .. start+count-1`` and their final microstates."""
    ens = Ensemble.fresh(seed, count, start)
    if isinstance(plan, Context):
        ens = capital_phi_batch(state, ens, plan, cdf_hook)
        return ens.outcomes(), ens
    return run_sequential_batch(state, ens, list(plan), cdf_hook)


def monte_carlo(
    config: RunConfig,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
    cdf_hook: CdfHook | None = None,
) -> EmpiricalDistribution:
    """Tally outcome tuples over ``config.n_runs`` fresh microstates."""
    state = config.resolve_state()
    starts = range(0, config.n_runs, chunk_size)

    def chunk(a: int) -> EmpiricalDistribution:
        n = min(chunk_size, config.n_runs - a)
        try:
            out, _ = simulate(state, config.plan, config.seed, a, n, cdf_hook)
        except ZeroProbabilityHistory as exc:
            raise ZeroProbabilityHistory(
                f"run aborted: plan {format_cells(config.cells)} on state {state.name!r}, "
                f"runs {a}..{a + n - 1}: {exc}"
            ) from exc
        return EmpiricalDistribution.from_outcomes(out)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(a) for a in starts]
    dist = EmpiricalDistribution({}, 0)
    for p in parts:
        dist = dist.merge(p)
    return dist


def oracle_distribution(state: QuantumState, cells: Sequence[Cell]) -> dict[Outcome, float]:
    return {s: joint_prob(state, list(zip(cells, s))) for s in product((-1, 1), repeat=len(cells))}


def tv_distance(
    emp: EmpiricalDistribution | Mapping[Outcome, float], oracle: Mapping[Outcome, float]
) -> float:
    """Half the L1 distance between two distributions on outcome tuples."""
    p = emp.frequencies() if isinstance(emp, EmpiricalDistribution) else dict(emp)
    arities = {len(k) for k in p} | {len(k) for k in oracle}
    if len(arities) > 1:
        raise ValueError(f"outcome tuples of different arity: {sorted(arities)}")
    keys = set(p) | set(oracle)
    return 0.5 * sum(abs(p.get(k, 0.0) - oracle.get(k, 0.0)) for k in keys)


def run_experiment(config: RunConfig, workers: int = 1) -> dict[str, Any]:
    """Monte Carlo plus oracle comparison, as the ``run`` command reports it."""
    state = config.resolve_state()
    emp = monte_carlo(config, workers=workers)
    oracle = oracle_distribution(state, config.cells)
    tv = tv_distance(emp, oracle)
    return {
        "config": config.to_json(),
        "counts": {_key(k): v for k, v in sorted(emp.counts.items())},
        "frequencies": {_key(k): v for k, v in sorted(emp.frequencies().items())},
        "oracle": {_key(k): v for k, v in sorted(oracle.items())},
        "tv_distance": tv,
        "pass": tv <= config.tolerance,
    }


def write_trajectories_csv(path: str | Path, config: RunConfig, limit: int | None = None) -> int:
    """Per-run trajectories with columns run_index, step, i, j, outcome, code."""
    n = config.n_runs if limit is None else min(limit, config.n_runs)
    out, ens = simulate(config.resolve_state(), config.plan, config.seed, 0, n)
    K0 = ens.K - out.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run_index", "step", "i", "j", "outcome", "code"])
        for r in range(n):
            for k, (i, j) in enumerate(config.cells):
                w.writerow([r, k + 1, i, j, int(out[r, k]), int(ens.codes[r, K0 + k])])
    return n


# --- verification reports ------------------------------------------------------------


@dataclass
class VerificationReport:
    name: str
    entries: list[dict[str, Any]] = field(default_factory=list)
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def checked(self) -> list[dict[str, Any]]:
        return [e for e in self.entries if not e.get("exempt")]

    @property
    def failures(self) -> list[dict[str, Any]]:
        return [e for e in self.checked if not e["pass"]]

    @property
    def passed(self) -> bool:
        return bool(self.checked) and not self.failures

    def summary(self) -> str:
        n = len(self.checked)
        return f"{self.name}: {n - len(self.failures)}/{n} checks passed"

    def to_json(self) -> dict:
        return {"name": self.name, "params": self.params, "pass": self.passed,
                "n_checked": len(self.checked), "failures": self.failures, "entries": self.entries}


def default_states(seed: int = 42, n_random: int = 3) -> list[QuantumState]:
    """Singlet, maximally mixed and ``n_random`` seeded random pure states."""
    rand = [random_pure_state(_streams.derive_seed(seed, 1000 + k) % (1 << 32)) for k in range(n_random)]
    return [named_state("singlet"), named_state("mixed"), *rand]


def stratified_sequences(length: int, k: int, seed: int) -> list[tuple[Cell, ...]]:
    """``k`` distinct sequences, spread evenly over the first cell."""
    rng = np.random.default_rng(seed)
    tails = list(product(CELLS, repeat=length - 1))
    quota = [k // 9] * 9
    for s in rng.choice(9, size=k % 9, replace=False):
        quota[s] += 1
    out = []
    for first, q in zip(CELLS, quota):
        for t in rng.choice(len(tails), size=q, replace=False):
            out.append((first, *tails[t]))
    return out


def theorem1_sequences(max_len: int = 3, n_sampled: int = 100, seed: int = 42) -> list[tuple[Cell, ...]]:
    """Every sequence of length <= 2 plus a stratified sample of longer ones."""
    seqs: list[tuple[Cell, ...]] = []
    for L in range(1, max_len + 1):
        if L <= 2:
            seqs.extend(product(CELLS, repeat=L))
        else:
            seqs.extend(stratified_sequences(L, n_sampled, _streams.derive_seed(seed, L)))
    return seqs


def verify_theorem1(
    states: Sequence[QuantumState] | None = None,
    max_len: int = 3,
    n_runs: int = 100_000,
    seed: int = 42,
    tol: float = 0.02,
    n_sampled: int = 100,
    cdf_hook: CdfHook | None = None,
) -> VerificationReport:
    """Compare simulated sequence statistics against the oracle, one TV per sequence."""
    states = list(states) if states is not None else default_states(seed)
    seqs = theorem1_sequences(max_len, n_sampled, seed)
    rep = VerificationReport("theorem1", params={"n_runs": n_runs, "seed": seed, "tol": tol,
                                                 "max_len": max_len, "n_sequences": len(seqs)})
    for si, state in enumerate(states):
        for qi, seq in enumerate(seqs):
            entry: dict[str, Any] = {"state": state.name, "sequence": format_cells(seq)}
            cfg = RunConfig(state, seq, n_runs, _streams.derive_seed(seed, si, qi), tol)
            try:
                emp = monte_carlo(cfg, cdf_hook=cdf_hook)
                entry["tv"] = tv_distance(emp, oracle_distribution(state, seq))
                entry["pass"] = entry["tv"] <= tol
            except ZeroProbabilityHistory as exc:
                entry["error"] = str(exc)
                entry["pass"] = False
            rep.entries.append(entry)
        log.info("theorem1: state %s done", state.name)
    return rep


def persistence_checks(seq: Sequence[Cell]) -> list[tuple[int, int]]:
    """Index pairs ``(k, n)`` where persistence of outcome must hold.

    ``seq[n]`` repeats ``seq[k]`` and every observable measured in between
    commutes with it.
    """
    pairs = []
    for n in range(len(seq)):
        for k in range(n):
            if seq[k] == seq[n] and all(cells_commute(seq[k], seq[m]) for m in range(k + 1, n)):
                pairs.append((k, n))
    return pairs


def corollary_patterns(ctx: Context) -> list[tuple[Cell, ...]]:
    cells = ctx.cells
    pats = [(a, b, a) for a, b in permutations(cells, 2)]
    pats += [(a, b, c, a) for a, b, c in permutations(cells, 3)]
    return pats


INCOMPATIBLE_PATTERNS = (((1, 1), (2, 2), (1, 1)), ((3, 3), (1, 1), (3, 3)))


def verify_corollary(
    n_runs: int = 10_000,
    seed: int = 42,
    states: Sequence[QuantumState] | None = None,
) -> VerificationReport:
    """Repeat measurements with only compatible observables in between."""
    states = list(states) if states is not None else default_states(seed)
    rep = VerificationReport("corollary", params={"n_runs": n_runs, "seed": seed})
    for si, state in enumerate(states):
        for n in range(1, 7):
            ctx = Context.paper(n)
            for pi, pat in enumerate(corollary_patterns(ctx)):
                out, _ = simulate(state, pat, _streams.derive_seed(seed, si, n, pi), 0, n_runs)
                pairs = persistence_checks(pat)
                same = np.all([out[:, k] == out[:, m] for k, m in pairs], axis=0)
                rep.entries.append({"state": state.name, "context": ctx.name, "pattern": format_cells(pat),
                                    "fraction_repeated": float(same.mean()), "pass": bool(same.all())})
        for pat in INCOMPATIBLE_PATTERNS:
            rep.entries.append({"state": state.name, "pattern": format_cells(pat), "exempt": True,
                                "reason": "intervening incompatible observable", "pass": None})
    return rep


def verify_cup(
    n_runs: int = 10_000,
    seed: int = 42,
    states: Sequence[QuantumState] | None = None,
    all_orderings: bool = True,
) -> VerificationReport:
    """After measuring context ``n`` the value table satisfies constraint ``n``."""
    states = list(states) if states is not None else default_states(seed)
    rep = VerificationReport("cup", params={"n_runs": n_runs, "seed": seed, "all_orderings": all_orderings})
    for si, state in enumerate(states):
        for n in range(1, 7):
            base = Context.paper(n)
            orders = permutations(base.cells) if all_orderings else [base.ordering]
            for oi, order in enumerate(orders):
                ctx = Context(n, order)
                ens = capital_phi_batch(state, Ensemble.fresh(_streams.derive_seed(seed, si, n, oi), n_runs), ctx)
                ok = membership_batch(value_table_batch(state, ens))[:, n - 1]
                rep.entries.append({"state": state.name, "context": ctx.name, "ordering": format_cells(order),
                                    "fraction_satisfied": float(ok.mean()), "pass": bool(ok.all())})
    return rep


def _contexts_of(cell: Cell) -> tuple[Context, Context]:
    return Context.paper(cell[0]), Context.paper(3 + cell[1])


def verify_marginals(
    n_runs: int = 100_000,
    seed: int = 42,
    states: Sequence[QuantumState] | None = None,
    tol: float = 0.01,
    cells: Iterable[Cell] = CELLS,
) -> VerificationReport:
    """``P[G_ij = +1]`` after the row context versus after the column context."""
    states = list(states) if states is not None else default_states(seed)
    rep = VerificationReport("marginals", params={"n_runs": n_runs, "seed": seed, "tol": tol})
    for si, state in enumerate(states):
        ens0 = Ensemble.fresh(_streams.derive_seed(seed, si), n_runs)
        for cell in cells:
            row, col = _contexts_of(cell)
            p_row = float((capital_g_batch(state, capital_phi_batch(state, ens0, row), cell) == 1).mean())
            p_col = float((capital_g_batch(state, capital_phi_batch(state, ens0, col), cell) == 1).mean())
            rep.entries.append({"state": state.name, "cell": f"{cell[0]}{cell[1]}", "row_context": row.name,
                                "col_context": col.name, "p_row": p_row, "p_col": p_col,
                                "oracle": born_prob(state, cell, 1), "difference": abs(p_row - p_col),
                                "pass": abs(p_row - p_col) <= tol})
    return rep
