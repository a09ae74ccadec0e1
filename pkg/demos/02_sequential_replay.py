"""Step through a measurement sequence coordinate by coordinate."""

from __future__ import annotations

from magicsq.expsuite import PAPER_MICROSTATE, replay_experiment
from magicsq.hvmodel import phi
from magicsq.qcore import named_state

# %% A microstate is a point of the unit hypercube.  Measuring overwrites the
# next free coordinate with a multiple of 1/27 recording what was seen.
u = PAPER_MICROSTATE
singlet = named_state("singlet")
print("u =", u.prefix(4))

for cell in [(3, 3), (3, 2), (3, 1)]:
    u = phi(singlet, u, *cell)
    print(f"after V{cell[0]}{cell[1]}: codes {list(map(int, u.measured))}, coords {[str(x) for x in u.prefix(4)]}")

# %% The same runs, packaged with their reference values.
for exp in ("1", "2", "3", "3c", "4"):
    rep = replay_experiment(exp)
    print(f"{rep.experiment:>10}: {'match' if rep.passed else rep.first_divergence}  {rep.observed}")
    for note in rep.notes:
        print("            ", note)
