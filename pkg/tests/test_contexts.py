from __future__ import annotations


import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magicsq.contexts import (
    IDENTITIES,
    Context,
    ValueTable,
    all_tables,
    capital_phi,
    capital_phi_batch,
    check_decomposition,
    ks_exhaustive_check,
    membership_batch,
    microstate_membership,
    parse_ordering,
    set_membership,
    value_table,
    value_table_batch,
)
from magicsq.hvmodel import Ensemble, Microstate
from magicsq.qcore import named_state, random_pure_state


def test_paper_ordering_is_reversed():
    assert Context.paper(3).ordering == ((3, 3), (3, 2), (3, 1))
    assert Context.paper(6).ordering == ((3, 3), (2, 3), (1, 3))


def test_context_parse():
    assert Context.parse("row3", "31,32,33").ordering == ((3, 1), (3, 2), (3, 3))
    assert Context.parse("COL1") == Context.paper(4)


@pytest.mark.parametrize("order", ["31,32", "31,32,23", "31,31,32"])
def test_bad_orderings(order):
    with pytest.raises(ValueError):
        Context.parse("row3", order)


def test_parse_ordering_rejects_garbage():
    with pytest.raises(ValueError):
        parse_ordering("3-3")


def test_ks_exhaustive():
    r = ks_exhaustive_check()
    assert r.count_all_six == 0
    assert r.max_satisfiable == 5
    assert r.per_constraint == (256,) * 6
    assert r.histogram == {1: 96, 3: 320, 5: 96}


def test_value_table_validation():
    with pytest.raises(ValueError):
        ValueTable(np.zeros((3, 3)))
    t = ValueTable.from_bits(0)
    assert t[(2, 2)] == 1 and set_membership(t).count() == 5


def test_column3_context_lands_in_c3():
    s = named_state("singlet")
    v = capital_phi(s, Microstate(free=(0.76, 0.51, 0.02, 0.82)), Context.paper(6))
    m = set_membership(value_table(s, v))
    assert m.C3 and not m.R3


def test_membership_modes():
    s = named_state("singlet")
    u = Microstate(free=(0.76, 0.51, 0.02, 0.82))
    assert microstate_membership(s, u, "recorded").count() == 0
    with pytest.raises(ValueError):
        microstate_membership(s, u, "bogus")


@pytest.mark.parametrize("bits", range(512))
def test_decomposition_identities_on_every_table(bits):
    rep = check_decomposition(ValueTable.from_bits(bits))
    assert rep.consistent
    assert rep.full_decomposition == (rep.membership.count() == 5)


def test_identity_count_and_availability():
    assert len(IDENTITIES) == 12
    t = ValueTable.from_bits(0)  # all +1: every set but C3
    rep = check_decomposition(t)
    assert "not C3: V33 = X1 Y2 X2 Y1" in rep.available


@given(st.integers(0, 2**32), st.integers(1, 6), st.permutations(range(3)))
def test_cup_holds_for_any_ordering(seed, n, perm):
    state = random_pure_state(seed % 101)
    ctx = Context(n, tuple(Context.paper(n).cells[k] for k in perm))
    ens = capital_phi_batch(state, Ensemble.fresh(seed, 200), ctx)
    assert membership_batch(value_table_batch(state, ens))[:, n - 1].all()


def test_batch_value_table_matches_scalar():
    s = named_state("singlet")
    ens = capital_phi_batch(s, Ensemble.fresh(9, 5), Context.paper(2))
    tabs = value_table_batch(s, ens)
    for r in range(5):
        assert np.array_equal(tabs[r], value_table(s, ens.microstate(r)).values)


def test_all_tables_distinct():
    t = all_tables()
    assert len({x.tobytes() for x in t}) == 512
