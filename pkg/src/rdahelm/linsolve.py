"""Complex sparse kernels, preconditioned GMRES and the multigrid V-cycle.

The CSR container is a thin immutable wrapper over scipy arrays; the GMRES
and V-cycle loops are written out explicitly so the iteration counts and
residual histories reported by the experiments are fully under our control.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lu_factor, lu_solve


class SolverNumericalError(Exception):
    pass


@dataclass(frozen=True)
class SparseComplexMatrix:
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    shape: tuple

    @classmethod
    def from_scipy(cls, A):
        A = A.tocsr()
        A.sort_indices()
        return cls(indptr=A.indptr, indices=A.indices, data=A.data,
                   shape=A.shape)

    def to_scipy(self):
        return sp.csr_matrix((self.data, self.indices, self.indptr),
                             shape=self.shape)

    @property
    def nnz(self):
        return len(self.data)

    def matvec(self, x):
        x = np.asarray(x)
        if x.shape[0] != self.shape[1]:
            raise ValueError("dimension mismatch in matvec")
        return self.to_scipy() @ x

    def __matmul__(self, x):
        return self.matvec(x)


def matvec(A, x):
    return A.matvec(x)


@dataclass
class SolverReport:
    iterations: int = 0
    residuals: list = field(default_factory=list)
    converged: bool = False
    breakdown: bool = False
    wall_time: float = 0.0
    precond_applications: int = 0


def _as_operator(A):
    if A is None:
        return None
    if callable(A):
        return A
    return A.matvec


def gmres(A, b, precond=None, tol=1e-8, max_iter=2000, restart=None):
    """Left-preconditioned GMRES with modified Gram-Schmidt + one
    reorthogonalization pass.

    Minimizes the preconditioned residual norm; stops when the relative
    preconditioned residual drops below tol.  Returns (x, SolverReport).
    """
    t0 = time.perf_counter()
    apply_a = _as_operator(A)
    apply_m = _as_operator(precond)
    b = np.asarray(b, dtype=complex)
    n = len(b)
    report = SolverReport()

    def prec(v):
        if apply_m is None:
            return v
        report.precond_applications += 1
        return apply_m(v)

    x = np.zeros(n, dtype=complex)
    mb = prec(b)
    bnorm = np.linalg.norm(mb)
    if bnorm == 0.0:
        report.converged = True
        report.residuals = [0.0]
        report.wall_time = time.perf_counter() - t0
        return x, report

    space = restart if restart else max_iter
    while report.iterations < max_iter:
        r = prec(b - apply_a(x))
        beta = np.linalg.norm(r)
        if not np.isfinite(beta):
            raise SolverNumericalError("non-finite residual in GMRES")
        if not report.residuals:
            report.residuals.append(beta / bnorm)
        if beta / bnorm <= tol:
            report.converged = True
            break
        dim = min(space, max_iter - report.iterations)
        V = np.zeros((n, dim + 1), dtype=complex)
        H = np.zeros((dim + 1, dim), dtype=complex)
        cs = np.zeros(dim, dtype=complex)
        sn = np.zeros(dim, dtype=complex)
        g = np.zeros(dim + 1, dtype=complex)
        V[:, 0] = r / beta
        g[0] = beta
        j_used = 0
        for j in range(dim):
            w = prec(apply_a(V[:, j]))
            for _ in range(2):  # MGS with one reorthogonalization pass
                for i in range(j + 1):
                    hij = np.vdot(V[:, i], w)
                    H[i, j] += hij
                    w -= hij * V[:, i]
            H[j + 1, j] = np.linalg.norm(w)
            breakdown = abs(H[j + 1, j]) < 1e-14 * max(1.0, abs(H[0, 0]))
            if not breakdown:
                V[:, j + 1] = w / H[j + 1, j]
            # apply stored Givens rotations, then a new one
            for i in range(j):
                tmp = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -np.conj(sn[i]) * H[i, j] + \
                    np.conj(cs[i]) * H[i + 1, j]
                H[i, j] = tmp
            denom = np.hypot(abs(H[j, j]), abs(H[j + 1, j]))
            if denom == 0.0:
                cs[j], sn[j] = 1.0, 0.0
            else:
                cs[j] = np.conj(H[j, j]) / denom
                sn[j] = np.conj(H[j + 1, j]) / denom
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -np.conj(sn[j]) * g[j]
            g[j] = cs[j] * g[j]
            j_used = j + 1
            report.iterations += 1
            relres = abs(g[j + 1]) / bnorm
            report.residuals.append(relres)
            if relres <= tol or breakdown:
                report.breakdown = breakdown
                break
        y = np.linalg.solve(H[:j_used, :j_used], g[:j_used]) \
            if j_used else np.zeros(0, dtype=complex)
        x = x + V[:, :j_used] @ y
        if report.residuals[-1] <= tol:
            report.converged = True
            break
        if report.breakdown:
            break
        if restart is None:
            break  # full-memory GMRES: the inner loop exhausted max_iter

    report.wall_time = time.perf_counter() - t0
    return x, report


@dataclass(frozen=True)
class MultigridHierarchy:
    meshes: list            # coarse -> fine
    matrices: list          # real CSR per level
    prolongations: list     # level k -> k+1 injection, len = levels - 1
    inv_diags: list
    coarse_lu: tuple
    damping: float = 0.8
    pre_smooth: int = 2
    post_smooth: int = 2

    @property
    def levels(self):
        return len(self.meshes)


def build_hierarchy(meshes, cfg, assemble=None):
    """Rediscretized lowest-order preconditioner on each level.

    meshes must be ordered coarse to fine and nested by red refinement
    (each finer mesh carries a parent_map into the previous one).
    """
    from .assembly import assemble_p0_preconditioner
    if assemble is None:
        assemble = assemble_p0_preconditioner
    if not meshes:
        raise ValueError("need at least one mesh level")
    for lo, hi in zip(meshes, meshes[1:]):
        if hi.parent_map is None or len(hi.parent_map) != 4 * lo.n_elements \
                or hi.parent_map.max() >= lo.n_elements:
            raise ValueError("mesh levels are not nested by red refinement")
    mats = []
    prolong = []
    inv_diags = []
    for lvl, mesh in enumerate(meshes):
        P = assemble(mesh, cfg).matrix.to_scipy().real.tocsr()
        mats.append(P)
        inv_diags.append(1.0 / P.diagonal())
        if lvl > 0:
            fine = meshes[lvl]
            ne = fine.n_elements
            I = sp.csr_matrix(
                (np.ones(ne), (np.arange(ne), fine.parent_map)),
                shape=(ne, meshes[lvl - 1].n_elements))
            prolong.append(I)
    coarse_lu = lu_factor(mats[0].toarray())
    return MultigridHierarchy(meshes=list(meshes), matrices=mats,
                              prolongations=prolong, inv_diags=inv_diags,
                              coarse_lu=coarse_lu)


def _vcycle_level(h, lvl, r):
    if lvl == 0:
        return lu_solve(h.coarse_lu, r)
    P = h.matrices[lvl]
    dinv = h.inv_diags[lvl]
    x = np.zeros_like(r)
    for _ in range(h.pre_smooth):
        x = x + h.damping * dinv * (r - P @ x)
    coarse_r = h.prolongations[lvl - 1].T @ (r - P @ x)
    x = x + h.prolongations[lvl - 1] @ _vcycle_level(h, lvl - 1, coarse_r)
    for _ in range(h.post_smooth):
        x = x + h.damping * dinv * (r - P @ x)
    return x


def vcycle_apply(h, r):
    """One V-cycle approximating the preconditioner inverse on r."""
    r = np.asarray(r)
    if np.iscomplexobj(r):
        return (_vcycle_level(h, h.levels - 1, r.real)
                + 1j * _vcycle_level(h, h.levels - 1, r.imag))
    return _vcycle_level(h, h.levels - 1, r)


def dense_solve(A, b):
    """LU solve with partial pivoting for small validation systems."""
    A = np.asarray(A)
    lu, piv = lu_factor(A)
    if np.any(np.abs(np.diag(lu)) < np.finfo(float).eps * np.abs(lu).max()):
        raise np.linalg.LinAlgError("matrix is singular to machine precision")
    return lu_solve((lu, piv), np.asarray(b))


def dense_spectrum(A, size_cap=600):
    """Full eigenvalue list of a dense complex matrix (validation path)."""
    A = np.asarray(A)
    if A.shape[0] > size_cap:
        raise ValueError(f"dense spectrum limited to size {size_cap}")
    return np.linalg.eigvals(A)
