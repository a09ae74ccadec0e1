"""Ideal runs of three laboratory contextuality experiments."""

from __future__ import annotations

from magicsq.expsuite import analyze_cabello, analyze_hasegawa, analyze_huang
from magicsq.qcore import named_state

# %% Joint Z1X2 and X1Z2 on a Bell state: outcomes always differ.
h = analyze_huang(100_000, seed=1)
print("equal-outcome fraction:", h.aggregates["fraction_equal"])
print("maximally mixed control:", analyze_huang(100_000, 1, state=named_state("mixed")).aggregates["fraction_equal"])

# %% Neutron path/spin: C' reaches 4, above the noncontextual bound of 2.
g = analyze_hasegawa(50_000, seed=1)
print("C' =", g.aggregates["C_prime"], " per-run values:", g.aggregates["cnc_c3_values"])

# %% Five sub-experiments whose products no single table can reproduce.
c = analyze_cabello(10_000, seed=1)
print("products:", c.aggregates["averages"])
print("tables meeting all five relations:", c.aggregates["tables_satisfying_all_five"])
