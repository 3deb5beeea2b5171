"""Plane-wave accuracy study on the unit square.

Solves the interior-penalty Helmholtz discretization on the reconstructed
space for a k=5 plane wave and prints L2 and broken-energy errors with the
observed orders between consecutive meshes.  A degree-m reconstruction from
one value per element converges at order m+1 in L2, matching a much larger
conventional space.
"""

from rdahelm.experiments import ExperimentConfig, run_convergence

cfg = ExperimentConfig(k=5.0, m_list=(2, 3), n_list=(10, 20, 40), eta=1.0)
table = run_convergence(cfg)

print(f"{'m':>3} {'n':>4} {'dof':>6} {'L2 error':>12} "
      f"{'DG error':>12} {'L2 order':>9} {'DG order':>9}")
for row in table.rows:
    l2o = f"{row['l2_order']:.2f}" if row["l2_order"] else "-"
    dgo = f"{row['dg_order']:.2f}" if row["dg_order"] else "-"
    print(f"{row['m']:>3} {row['n']:>4} {row['dof']:>6} "
          f"{row['l2']:>12.3e} {row['dg']:>12.3e} {l2o:>9} {dgo:>9}")

print()
print("Observed orders approach m+1 (L2) and m (energy), one unknown per")
print("triangle throughout: the 3200-element mesh carries 3200 unknowns at")
print("every degree.")
