"""The square, its algebra, and why no fixed table of values exists."""

from __future__ import annotations

import numpy as np

from magicsq.contexts import ks_exhaustive_check
from magicsq.qcore import SQUARE_LABELS, magic_square_operator, verify_square_algebra

# %% Nine two-qubit Pauli products, arranged so every row and column commutes.
for row in SQUARE_LABELS:
    print("  ".join(row))

# %% Rows multiply to +1; columns 1 and 2 as well; column 3 gives -1.
col3 = np.linalg.multi_dot([magic_square_operator(i, 3).matrix for i in (1, 2, 3)])
print("V13 V23 V33 =", np.real(np.diag(col3)))

rep = verify_square_algebra()
print(f"{len(rep.checks)} relations checked, all hold: {rep.passed}")

# %% Try all 2^9 +/-1 tables against the six product constraints.
ks = ks_exhaustive_check()
print("tables meeting all six:", ks.count_all_six)
print("best any table can do:", ks.max_satisfiable, "of 6")
print("histogram of constraints met:", ks.histogram)
