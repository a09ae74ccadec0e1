from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from magicsq.hvmodel import (
    DigitCode,
    Ensemble,
    Microstate,
    chi,
    decode,
    macrostate_g,
    nu,
    phi,
    phi_batch,
    run_sequential,
    run_sequential_batch,
)
from magicsq.qcore import CELLS, ZeroProbabilityHistory, named_state, random_pure_state

cells = st.sampled_from(CELLS)
signs = st.sampled_from((-1, 1))


@pytest.mark.parametrize("cell, x, code", [((3, 3), -1, 8), ((3, 2), 1, 25), ((1, 1), -1, 0), ((1, 1), 1, 18)])
def test_nu_examples(cell, x, code):
    assert nu(*cell, x) == code


@given(cells, signs)
def test_nu_decode_round_trip(cell, x):
    assert decode(nu(*cell, x)) == (*cell, x)


@pytest.mark.parametrize("bad", [9, 13, 17, -1, 27])
def test_unreachable_codes_rejected(bad):
    with pytest.raises(ValueError):
        DigitCode(bad)


@pytest.mark.parametrize("bad", [True, 1.0, "3"])
def test_code_type_checked(bad):
    with pytest.raises(TypeError):
        DigitCode(bad)


def test_code_value_is_exact():
    assert DigitCode(25).value == Fraction(25, 27)


@pytest.mark.parametrize("free", [(0.0,), (1.0,), (1 / 27,), (2 / 27,)])
def test_free_coordinates_validated(free):
    with pytest.raises(ValueError):
        Microstate(free=free)


def test_macrostate_of_fresh_microstate_is_zero():
    assert macrostate_g(Microstate()) == 0


def test_chi_threshold_is_strict():
    # mixed state: F(-1) = 1/2 exactly for every first measurement
    m = named_state("mixed")
    assert chi(m, Microstate(free=(0.5,)), 1, 1) == 1
    assert chi(m, Microstate(free=(0.4999,)), 1, 1) == -1


def test_phi_overwrites_next_coordinate():
    u = Microstate(free=(0.76, 0.51, 0.02, 0.82))
    v = phi(named_state("singlet"), u, 3, 3)
    assert v.measured == (8,)
    assert v.coordinate(1) == Fraction(8, 27)
    assert v.coordinate(2) == 0.51


def test_microstate_json_round_trip():
    u = Microstate((8, 25), (0.3,), tail_seed=7, stream=11)
    assert Microstate.from_json(u.to_json()) == u


def test_lazy_tail_is_deterministic():
    u = Microstate(tail_seed=5, stream=3)
    assert u.coordinate(4) == Microstate(tail_seed=5, stream=3).coordinate(4)
    assert 0 < u.coordinate(4) < 1


def test_empty_sequence_rejected():
    with pytest.raises(ValueError):
        run_sequential(named_state("singlet"), Microstate(), [])


def test_zero_probability_history_surfaces():
    # a record the singlet can never produce
    u = Microstate(measured=(nu(3, 3, 1),), free=(0.5,))
    with pytest.raises(ZeroProbabilityHistory):
        phi(named_state("singlet"), u, 1, 1)


@given(st.integers(0, 2**32), st.integers(0, 1000), st.lists(cells, min_size=1, max_size=4))
def test_batch_matches_scalar_bit_for_bit(seed, start, seq):
    state = random_pure_state(seed % 97)
    ens = Ensemble.fresh(seed, 6, start)
    out, final = run_sequential_batch(state, ens, seq)
    for r in range(ens.n):
        traj, v = run_sequential(state, ens.microstate(r), seq)
        assert traj.outcomes == list(out[r])
        assert [int(c) for c in v.measured] == list(final.codes[r])


def test_cdf_hook_changes_outcomes():
    s = named_state("mixed")
    ens = Ensemble.fresh(1, 1000)
    a = phi_batch(s, ens, (1, 1)).outcomes()
    b = phi_batch(s, ens, (1, 1), cdf_hook=lambda F: np.minimum(F + 0.3, 1.0)).outcomes()
    assert (b == -1).mean() > (a == -1).mean() + 0.2
