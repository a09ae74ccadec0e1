"""Sample many microstates and compare with the quantum prediction."""

from __future__ import annotations

from magicsq.contexts import Context
from magicsq.harness import RunConfig, monte_carlo, oracle_distribution, tv_distance
from magicsq.qcore import random_pure_state

state = random_pure_state(7)
seq = ((1, 1), (2, 2), (1, 1))  # incompatible in the middle, so the repeat can flip

# %% Empirical frequencies against the Lueders joint probabilities.
dist = monte_carlo(RunConfig(state, seq, 100_000, seed=1))
oracle = oracle_distribution(state, seq)
for k in sorted(oracle):
    print(k, f"{dist.frequencies().get(k, 0.0):.4f}", f"{oracle[k]:.4f}")
print("total variation:", round(tv_distance(dist, oracle), 4))

# %% A whole row at once, in a non-default order.
ctx = Context.parse("row2", "21,23,22")
dist = monte_carlo(RunConfig(state, ctx, 100_000, seed=2), workers=4)
print(ctx.name, ctx.ordering, "TV =", round(tv_distance(dist, oracle_distribution(state, ctx.ordering)), 4))
