"""Helmholtz solver on a reconstructed discontinuous approximation space.

One degree of freedom per element; high-order bases come from patch-wise
constrained least squares, the scheme is an interior-penalty DG form, and
the linear systems are solved by GMRES preconditioned with the
piecewise-constant discretization via a geometric multigrid V-cycle.
"""

from .assembly import (DGSpace, ErrorReport, GlobalSystem, HelmholtzConfig,
                       ManufacturedSolution, RDASpace, assemble_dg_system,
                       assemble_p0_preconditioner, assemble_rda_system,
                       bessel_wave, compute_error_norms, count_nnz,
                       export_matrix_market, plane_wave)
from .linsolve import (MultigridHierarchy, SolverReport, SparseComplexMatrix,
                       build_hierarchy, dense_solve, dense_spectrum, gmres,
                       vcycle_apply)
from .mesh import (FaceRecord, TriMesh, build_face_topology, dump_mesh,
                   perturbed_square_mesh, refine_red, uniform_square_mesh)
from .polybasis import (PolySpec, QuadratureRule, dim_pm,
                        eval_scaled_monomials, segment_quadrature,
                        triangle_quadrature)
from .reconstruction import (ElementPatch, ReconstructionOperator,
                             build_patch, build_reconstruction_operator,
                             estimate_lambda, fit_constrained_ls,
                             patch_size_table, reconstruct_from_point_values)

__version__ = "0.1.0"
