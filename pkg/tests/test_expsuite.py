from __future__ import annotations

import numpy as np
import pytest

from magicsq.expsuite import (
    EXPERIMENTS,
    HUANG_LABELS,
    RELABEL,
    analyze_cabello,
    analyze_hasegawa,
    analyze_huang,
    cabello_relations,
    huang_operator,
    huang_relabel_sign,
    relabel_state,
    replay_experiment,
)
from magicsq.contexts import all_tables
from magicsq.hvmodel import Microstate
from magicsq.qcore import CELLS, joint_prob, magic_square_operator, named_state, random_pure_state


@pytest.mark.parametrize("exp", ["1", "2", "3", "3c", "4"])
def test_replays_pass(exp):
    rep = replay_experiment(exp)
    assert rep.passed, rep.first_divergence
    assert rep.oracle_probability > 0


def test_replay_values():
    assert replay_experiment("1").observed["codes"] == [8, 25, 6]
    assert replay_experiment("3c").observed["unobserved_row3"] == [1, 1, -1]
    assert replay_experiment("4").observed["outcomes"] == [1, -1, -1]


def test_replay_reports_divergence():
    rep = replay_experiment("1", Microstate(free=(0.76, 0.3, 0.02, 0.82)))
    assert not rep.passed
    assert rep.first_divergence.startswith("codes[1]")


def test_replay_does_not_mutate_spec():
    before = dict(EXPERIMENTS["Exp3"].expected)
    replay_experiment("3")
    assert EXPERIMENTS["Exp3"].expected == before


def test_membership_note_on_column_replay():
    notes = replay_experiment("3c").notes
    assert notes and "neither" in notes[0]


def test_unknown_experiment():
    with pytest.raises(KeyError):
        replay_experiment("9")


def test_huang_labels_swap_y_and_z():
    assert HUANG_LABELS[2] == ("XZ", "ZX", "YY")


@pytest.mark.parametrize("cell", CELLS)
def test_huang_relabel(cell):
    W = RELABEL
    V = magic_square_operator(*cell).matrix
    assert np.allclose(W @ huang_operator(*cell) @ W.conj().T, huang_relabel_sign(*cell) * V)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_relabel_preserves_oracle(seed):
    s = random_pure_state(seed)
    r = relabel_state(s)
    for c in CELLS:
        for x in (-1, 1):
            assert joint_prob(s, [(huang_operator(*c), x)]) == pytest.approx(
                joint_prob(r, [(c, x * huang_relabel_sign(*c))]), abs=1e-12)


def test_huang_ideal_and_control():
    res = analyze_huang(20_000, 1)
    assert res.passed and res.aggregates["fraction_equal"] == 0.0
    mixed = analyze_huang(20_000, 1, state=named_state("mixed"), tol=0.02)
    assert mixed.passed and abs(mixed.aggregates["fraction_equal"] - 0.5) < 0.02


def test_hasegawa_ideal():
    res = analyze_hasegawa(5000, 3)
    assert res.aggregates["C_prime"] == 4.0
    assert res.aggregates["cnc_c3_all_equal_4"]
    assert res.passed


def test_hasegawa_rows_variant_matches_quantum():
    res = analyze_hasegawa(5000, 3, via="rows")
    assert res.aggregates["C_prime"] == 4.0


def test_hasegawa_rejects_bad_via():
    with pytest.raises(ValueError):
        analyze_hasegawa(10, 0, via="diag")


def test_cabello_ideal():
    res = analyze_cabello(2000, 5)
    assert res.passed
    assert res.aggregates["tables_satisfying_all_five"] == 0


def test_cabello_order_validation():
    with pytest.raises(ValueError):
        analyze_cabello(10, 0, orders=[((1, 1),)] * 5)


def test_cabello_relations_never_jointly_satisfied():
    assert cabello_relations(all_tables()).sum(axis=1).max() == 4


@pytest.mark.parametrize("fn, n", [(analyze_huang, 500), (analyze_hasegawa, 300), (analyze_cabello, 300)])
def test_aggregates_recompute_from_per_run(fn, n):
    res = fn(n, 11)
    assert res.recompute() == res.aggregates
    js = res.to_json(max_runs=3)
    assert set(js) >= {"experiment", "per_run", "aggregates", "oracle_prediction", "paper_reference_values", "pass"}
