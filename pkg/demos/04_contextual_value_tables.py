"""Where measured microstates land among the six constraint sets."""

from __future__ import annotations

from magicsq.contexts import SET_NAMES, Context, capital_phi_batch, membership_batch, value_table_batch
from magicsq.hvmodel import Ensemble
from magicsq.qcore import named_state

state = named_state("singlet")
ens0 = Ensemble.fresh(seed=3, n=20_000)

# %% After measuring a context the counterfactual table obeys that context's
# constraint every time, and obeys at most five of six.
for n in range(1, 7):
    ctx = Context.paper(n)
    m = membership_batch(value_table_batch(state, capital_phi_batch(state, ens0, ctx)))
    frac = {k: round(float(v), 3) for k, v in zip(SET_NAMES, m.mean(axis=0))}
    print(f"{ctx.name}: {frac}  max sets = {m.sum(axis=1).max()}")
