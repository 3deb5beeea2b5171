"""Eigenvalue portraits before and after preconditioning.

On a mesh small enough for dense eigensolves, this script compares the
spectrum of the Helmholtz system matrix with that of its preconditioned
counterpart.  The raw spectrum spreads over several orders of magnitude;
the preconditioned one clusters, which is what makes GMRES fast.
"""

import numpy as np

from rdahelm.experiments import spectrum_report

for eps_mode, label in (("ksq", "absorbing (eps = k^2)"),
                        ("zero", "pure (eps = 0)")):
    print(f"--- {label} ---")
    print(f"{'n':>4} {'matrix':>16} {'min |eig|':>11} {'max |eig|':>11} "
          f"{'spread':>9}")
    for n in (4, 8):
        t = spectrum_report(n, 3, 10.0, eps_mode=eps_mode)
        md = t.metadata
        for which in ("original", "preconditioned"):
            lo = md[f"min_abs_{which}"]
            hi = md[f"max_abs_{which}"]
            print(f"{n:>4} {which:>16} {lo:>11.3e} {hi:>11.3e} "
                  f"{hi / lo:>9.1f}")
    print()

print("With absorption the preconditioned eigenvalues stay bounded away")
print("from the origin under refinement; without it the smallest modulus")
print("keeps shrinking, and iteration counts grow accordingly.")
