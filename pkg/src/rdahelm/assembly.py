"""Interior-penalty DG assembly on reconstructed and broken polynomial spaces.

Both the one-DOF-per-element reconstructed space and the conventional
broken modal space are assembled through the same element/face loops; a
space object supplies, per element, the global DOF indices and the matrix
taking those DOFs to local scaled-monomial coefficients.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.io import mmwrite

from .polybasis import (PolySpec, dim_pm, eval_scaled_monomials,
                        map_to_segment, map_to_triangle, segment_quadrature,
                        triangle_quadrature)
from .linsolve import SparseComplexMatrix


@dataclass(frozen=True)
class HelmholtzConfig:
    k: float
    eps: float = 0.0
    m: int = 2
    eta: float = None
    penalty_imag: bool = True
    quad_exactness: int = None

    def __post_init__(self):
        if self.k <= 0 or self.eps < 0:
            raise ValueError("need k > 0 and eps >= 0")
        if self.eta is None:
            object.__setattr__(self, "eta", 10.0 * (self.m + 1) ** 2)
        if self.eta <= 0:
            raise ValueError("need eta > 0")
        if self.quad_exactness is None:
            object.__setattr__(self, "quad_exactness", 2 * self.m + 2)


@dataclass(frozen=True)
class ManufacturedSolution:
    u: callable          # (npts,2) -> complex (npts,)
    grad: callable       # (npts,2) -> complex (npts,2)
    f: callable          # source, includes the absorption term
    g: callable          # (points, outward normal) -> impedance data


def plane_wave(k, eps=0.0, angle=np.pi / 5):
    """Plane wave exp(ik(x cos a + y sin a)) with matching data."""
    d = np.array([np.cos(angle), np.sin(angle)])

    def u(pts):
        return np.exp(1j * k * (np.atleast_2d(pts) @ d))

    def grad(pts):
        return 1j * k * np.outer(u(pts), d)

    def f(pts):
        # -Delta u - (k^2 - i eps) u = i eps u
        return 1j * eps * u(pts)

    def g(pts, normal):
        return 1j * k * (float(normal @ d) + 1.0) * u(pts)

    return ManufacturedSolution(u=u, grad=grad, f=f, g=g)


def bessel_wave(k, eps=0.0):
    """Radial solution cos(kr)/k minus a Bessel correction (large-k test)."""
    from scipy.special import j0, j1

    c = (np.cos(k) + 1j * np.sin(k)) / (k * (j0(k) + 1j * j1(k)))

    def _r(pts):
        pts = np.atleast_2d(pts)
        return np.hypot(pts[:, 0] - 0.5, pts[:, 1] - 0.5)

    def u(pts):
        r = _r(pts)
        return np.cos(k * r) / k - c * j0(k * r)

    def grad(pts):
        pts = np.atleast_2d(pts)
        r = _r(pts)
        rs = np.where(r == 0.0, 1.0, r)
        rhat = (pts - 0.5) / rs[:, None]
        dr = -np.sin(k * r) + c * k * j1(k * r)
        return dr[:, None] * rhat

    def f(pts):
        # -Delta(cos(kr)/k) - k^2 cos(kr)/k = sin(kr)/r; J0 part solves
        # the pure Helmholtz equation exactly
        r = _r(pts)
        base = k * np.sinc(k * r / np.pi)
        return base + 1j * eps * u(pts)

    def g(pts, normal):
        pts = np.atleast_2d(pts)
        return (grad(pts) @ normal) + 1j * k * u(pts)

    return ManufacturedSolution(u=u, grad=grad, f=f, g=g)


@dataclass(frozen=True)
class GlobalSystem:
    matrix: SparseComplexMatrix
    rhs: np.ndarray
    ndof: int

    @property
    def nnz(self):
        return self.matrix.nnz


def count_nnz(system):
    """Structural nonzeros after dropping entries below 1e-14 * max."""
    A = system.matrix.to_scipy().copy() if hasattr(system, "matrix") \
        else system.to_scipy().copy()
    if A.nnz == 0:
        return 0
    cutoff = 1e-14 * np.abs(A.data).max()
    A.data[np.abs(A.data) < cutoff] = 0.0
    A.eliminate_zeros()
    return int(A.nnz)


class RDASpace:
    """Reconstructed space: one DOF per element, patch-coupled basis."""

    def __init__(self, recon):
        self.recon = recon
        self.mesh = recon.mesh
        self.m = recon.degree
        self.ndof = recon.mesh.n_elements

    def element_dofs(self, k):
        return np.fromiter(self.recon.patches[k].members, dtype=np.int64)

    def element_map(self, k):
        return self.recon.coeff_maps[k]

    def spec(self, k):
        return self.recon.specs[k]

    def coefficients(self, x):
        """Per-element monomial coefficients of the discrete function."""
        from .reconstruction import reconstruct_from_point_values
        return reconstruct_from_point_values(self.recon, np.asarray(x))


class DGSpace:
    """Conventional broken space with modal scaled-monomial DOFs."""

    def __init__(self, mesh, m):
        self.mesh = mesh
        self.m = m
        self.nloc = dim_pm(m)
        self.ndof = mesh.n_elements * self.nloc
        self._specs = [PolySpec(m, mesh.barycenter[k], mesh.h_K[k])
                       for k in range(mesh.n_elements)]
        self._eye = np.eye(self.nloc)

    def element_dofs(self, k):
        return np.arange(k * self.nloc, (k + 1) * self.nloc, dtype=np.int64)

    def element_map(self, k):
        return self._eye

    def spec(self, k):
        return self._specs[k]

    def coefficients(self, x):
        return np.asarray(x).reshape(self.mesh.n_elements, self.nloc)


def _face_traces(space, face, mesh, qrule):
    """Quadrature points on a face plus basis values / normal derivatives
    from each adjacent side."""
    a = mesh.vertices[face.vertices[0]]
    b = mesh.vertices[face.vertices[1]]
    pts, w = map_to_segment(qrule, a, b)
    sides = []
    for k in (face.elem_plus, face.elem_minus):
        if k < 0:
            sides.append(None)
            continue
        vals, grads = eval_scaled_monomials(pts, space.spec(k))
        dn = grads @ face.normal
        sides.append((k, vals, dn))
    return pts, w, sides


def _assemble(space, cfg, sol=None, rhs_exactness=None):
    """Shared element/face assembly for either space.

    Returns (triplets, rhs) where triplets is (rows, cols, vals).
    """
    mesh = space.mesh
    vol_rule = triangle_quadrature(cfg.quad_exactness)
    face_rule = segment_quadrature(cfg.quad_exactness)
    rhs_rule_v = triangle_quadrature(rhs_exactness or cfg.quad_exactness)
    rhs_rule_f = segment_quadrature(rhs_exactness or cfg.quad_exactness)
    kk = cfg.k ** 2 - 1j * cfg.eps
    pen_unit = 1j if cfg.penalty_imag else 1.0

    rows, cols, vals = [], [], []
    b = np.zeros(space.ndof, dtype=complex)

    def scatter(test_dofs, trial_dofs, local):
        r, c = np.meshgrid(test_dofs, trial_dofs, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(local.ravel())

    # volume terms
    for k in range(mesh.n_elements):
        p0, p1, p2 = mesh.vertices[mesh.elements[k]]
        pts, w = map_to_triangle(vol_rule, p0, p1, p2)
        V, G = eval_scaled_monomials(pts, space.spec(k))
        stiff = np.einsum("q,qid,qjd->ij", w, G, G)
        mass = (V * w[:, None]).T @ V
        T = space.element_map(k)
        local = T.T @ (stiff - kk * mass) @ T
        dofs = space.element_dofs(k)
        scatter(dofs, dofs, local)
        if sol is not None:
            ptsr, wr = map_to_triangle(rhs_rule_v, p0, p1, p2)
            Vr, _ = eval_scaled_monomials(ptsr, space.spec(k))
            b[dofs] += T.T @ (Vr.T @ (wr * sol.f(ptsr)))

    # face terms
    for face in mesh.faces:
        pts, w, sides = _face_traces(space, face, mesh, face_rule)
        if face.boundary:
            k, V, _ = sides[0]
            T = space.element_map(k)
            dofs = space.element_dofs(k)
            local = 1j * cfg.k * (T.T @ ((V * w[:, None]).T @ V) @ T)
            scatter(dofs, dofs, local)
            if sol is not None:
                a = mesh.vertices[face.vertices[0]]
                bb = mesh.vertices[face.vertices[1]]
                ptsr, wr = map_to_segment(rhs_rule_f, a, bb)
                Vr, _ = eval_scaled_monomials(ptsr, space.spec(k))
                b[dofs] += T.T @ (Vr.T @ (wr * sol.g(ptsr, face.normal)))
            continue
        (kp, Vp, Dp), (km, Vm, Dm) = sides
        mu = cfg.eta / face.h_e
        jmp = np.hstack([Vp, -Vm])
        avg = 0.5 * np.hstack([Dp, Dm])
        W = w[:, None]
        local = (-(avg * W).T @ jmp - (jmp * W).T @ avg
                 + pen_unit * mu * (jmp * W).T @ jmp)
        Tp, Tm = space.element_map(kp), space.element_map(km)
        n = Tp.shape[0]
        dp, dm = space.element_dofs(kp), space.element_dofs(km)
        # lift the 2N x 2N face block through both coefficient maps
        blocks = [(dp, Tp, slice(0, n)), (dm, Tm, slice(n, 2 * n))]
        for dofs_i, Ti, si in blocks:
            for dofs_j, Tj, sj in blocks:
                scatter(dofs_i, dofs_j, Ti.T @ local[si, sj] @ Tj)

    return (np.concatenate(rows), np.concatenate(cols),
            np.concatenate(vals)), b


def _to_system(triplets, b, ndof):
    rows, cols, vals = triplets
    A = sp.coo_matrix((vals, (rows, cols)), shape=(ndof, ndof)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return GlobalSystem(matrix=SparseComplexMatrix.from_scipy(A), rhs=b,
                        ndof=ndof)


def assemble_rda_system(mesh, recon, cfg, sol=None, rhs_exactness=None):
    if recon.mesh is not mesh or recon.degree != cfg.m:
        raise ValueError("reconstruction operator does not match mesh/config")
    space = RDASpace(recon)
    trip, b = _assemble(space, cfg, sol, rhs_exactness)
    return _to_system(trip, b, space.ndof)


def assemble_dg_system(mesh, m, cfg, sol=None, rhs_exactness=None):
    if m != cfg.m:
        raise ValueError("degree does not match config")
    space = DGSpace(mesh, m)
    trip, b = _assemble(space, cfg, sol, rhs_exactness)
    return _to_system(trip, b, space.ndof)


def assemble_p0_preconditioner(mesh, cfg):
    """Lowest-order form: face jump penalty + k^2 mass + boundary k mass.

    Real symmetric positive definite, one row per element.
    """
    ne = mesh.n_elements
    rows, cols, vals = [], [], []
    diag = cfg.k ** 2 * mesh.area.copy()
    for face in mesh.faces:
        if face.boundary:
            diag[face.elem_plus] += cfg.k * face.h_e
        else:
            c = cfg.eta / face.h_e * face.h_e  # eta * |e| / h_e
            p, q = face.elem_plus, face.elem_minus
            diag[p] += c
            diag[q] += c
            rows += [p, q]
            cols += [q, p]
            vals += [-c, -c]
    rows += list(range(ne))
    cols += list(range(ne))
    vals += list(diag)
    A = sp.coo_matrix((vals, (rows, cols)), shape=(ne, ne)).tocsr()
    A.sort_indices()
    return GlobalSystem(matrix=SparseComplexMatrix.from_scipy(A),
                        rhs=np.zeros(ne, dtype=complex), ndof=ne)


@dataclass(frozen=True)
class ErrorReport:
    l2: float
    dg: float
    energy: float
    terms: dict = field(default_factory=dict)


def compute_error_norms(space, x, sol, cfg):
    """L2 / DG / energy norms of u - u_h by quadrature."""
    mesh = space.mesh
    vol_rule = triangle_quadrature(cfg.quad_exactness)
    face_rule = segment_quadrature(cfg.quad_exactness)
    coeffs = space.coefficients(x)
    h = mesh.h

    l2 = 0.0
    grad_term = 0.0
    for k in range(mesh.n_elements):
        p0, p1, p2 = mesh.vertices[mesh.elements[k]]
        pts, w = map_to_triangle(vol_rule, p0, p1, p2)
        V, G = eval_scaled_monomials(pts, space.spec(k))
        err = V @ coeffs[k] - sol.u(pts)
        gerr = np.einsum("qjd,j->qd", G, coeffs[k]) - sol.grad(pts)
        l2 += float(w @ np.abs(err) ** 2)
        grad_term += float(w @ np.sum(np.abs(gerr) ** 2, axis=1))

    jump_term = 0.0
    bdry_term = 0.0
    avg_term = 0.0
    for face in mesh.faces:
        pts, w, sides = _face_traces(space, face, mesh, face_rule)
        if face.boundary:
            k, V, _ = sides[0]
            err = V @ coeffs[k] - sol.u(pts)
            bdry_term += cfg.k * float(w @ np.abs(err) ** 2)
            continue
        (kp, Vp, Dp), (km, Vm, Dm) = sides
        jump = Vp @ coeffs[kp] - Vm @ coeffs[km]   # exact u is continuous
        jump_term += float(w @ np.abs(jump) ** 2) / face.h_e
        gavg = 0.5 * (Dp @ coeffs[kp] + Dm @ coeffs[km]) \
            - (sol.grad(pts) @ face.normal)
        avg_term += h * float(w @ np.abs(gavg) ** 2)

    dg = np.sqrt(grad_term + jump_term + bdry_term)
    energy = np.sqrt(dg ** 2 + avg_term)
    return ErrorReport(l2=np.sqrt(l2), dg=dg, energy=energy,
                       terms={"grad": grad_term, "jump": jump_term,
                              "boundary": bdry_term, "face_avg": avg_term})


def apply_form_to_exact(space, cfg, sol, exactness=None):
    """a_h(u, basis_i) for the exact solution u, by quadrature.

    Since u is continuous its jumps vanish; the surviving terms are the
    volume terms, the face term pairing the test jump with the gradient of
    u, and the boundary impedance mass.
    """
    mesh = space.mesh
    ex = exactness or cfg.quad_exactness
    vol_rule = triangle_quadrature(ex)
    face_rule = segment_quadrature(ex)
    kk = cfg.k ** 2 - 1j * cfg.eps
    out = np.zeros(space.ndof, dtype=complex)

    for k in range(mesh.n_elements):
        p0, p1, p2 = mesh.vertices[mesh.elements[k]]
        pts, w = map_to_triangle(vol_rule, p0, p1, p2)
        V, G = eval_scaled_monomials(pts, space.spec(k))
        gu = sol.grad(pts)
        T = space.element_map(k)
        dofs = space.element_dofs(k)
        term = np.einsum("q,qd,qjd->j", w, gu, G) \
            - kk * (V.T @ (w * sol.u(pts)))
        out[dofs] += T.T @ term

    for face in mesh.faces:
        pts, w, sides = _face_traces(space, face, mesh, face_rule)
        if face.boundary:
            k, V, _ = sides[0]
            T = space.element_map(k)
            out[space.element_dofs(k)] += 1j * cfg.k * (
                T.T @ (V.T @ (w * sol.u(pts))))
            continue
        (kp, Vp, _), (km, Vm, _) = sides
        dnu = sol.grad(pts) @ face.normal
        # - int [v] {grad u . n}; test jump is conjugated, basis is real
        for k, V, sign in ((kp, Vp, 1.0), (km, Vm, -1.0)):
            T = space.element_map(k)
            out[space.element_dofs(k)] += -sign * (T.T @ (V.T @ (w * dnu)))
    return out


def export_matrix_market(system, path):
    mmwrite(path, system.matrix.to_scipy())
