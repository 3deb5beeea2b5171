"""Quantitative studies: 1D efficiency ratios, 2D convergence, DG
comparison, preconditioner iteration counts and spectrum portraits.

Every study returns a ResultTable whose CSV/JSON serialization is
byte-reproducible for a fixed configuration.
"""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla
from numpy.polynomial.legendre import leggauss

from .assembly import (DGSpace, HelmholtzConfig, RDASpace,
                       assemble_dg_system, assemble_p0_preconditioner,
                       assemble_rda_system, bessel_wave, compute_error_norms,
                       count_nnz, plane_wave)
from .linsolve import build_hierarchy, dense_spectrum, gmres, vcycle_apply
from .mesh import refine_red, uniform_square_mesh
from .polybasis import dim_pm
from .reconstruction import build_reconstruction_operator

DIRECT_SOLVE_LIMIT = 60_000
ERROR_FLOOR = 100 * np.finfo(float).eps
VERSION = "0.1.0"


@dataclass
class ExperimentConfig:
    name: str = ""
    k: float = 5.0
    eps_mode: str = "zero"            # "zero" | "ksq"
    m_list: tuple = (2, 3)
    n_list: tuple = (10, 20, 40)
    eta: float = None                 # None -> per-study default
    penalty_imag: bool = True
    solution: str = "plane"           # "plane" | "bessel"
    tol: float = 1e-8
    max_iter: int = 2000
    out: str = None
    fmt: str = "csv"

    def __post_init__(self):
        if list(self.n_list) != sorted(set(self.n_list)):
            raise ValueError("mesh list must be strictly increasing")
        for m in self.m_list:
            if not 2 <= m <= 6:
                raise ValueError("reconstruction degree must be in 2..6")

    @property
    def eps(self):
        return self.k ** 2 if self.eps_mode == "ksq" else 0.0

    def manufactured(self):
        maker = bessel_wave if self.solution == "bessel" else plane_wave
        return maker(self.k, eps=self.eps)


def _fmt_value(v):
    if isinstance(v, (complex, np.complexfloating)) \
            and not isinstance(v, (float, np.floating)):
        sign = "+" if v.imag >= 0 else "-"
        return f"{float(v.real)!r}{sign}{abs(float(v.imag))!r}i"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class ResultTable:
    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add_row(self, **kw):
        self.rows.append({c: kw.get(c) for c in self.columns})

    def to_csv(self):
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt_value(row[c]) for c in self.columns))
        return "\n".join(lines) + "\n"

    def to_json(self):
        payload = {"columns": self.columns,
                   "rows": [{c: (_fmt_value(v) if isinstance(v, complex)
                                 else v) for c, v in row.items()}
                            for row in self.rows],
                   "metadata": self.metadata}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, path, fmt="csv"):
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", newline="") as fh:
            fh.write(text)

    @property
    def failed_rows(self):
        return [r for r in self.rows
                if r.get("status") not in (None, "ok", "exact")]


# ---------------------------------------------------------------------------
# 1D efficiency ratios

def _omega_squared_integral(roots, a, b):
    """Exact integral of prod (x - r)^2 over [a, b] by Gauss quadrature."""
    deg = 2 * len(roots)
    xg, wg = leggauss(deg // 2 + 1)
    x = 0.5 * (b - a) * xg + 0.5 * (a + b)
    p = np.ones_like(x)
    for r in roots:
        p = p * (x - r)
    return 0.5 * (b - a) * float(wg @ (p * p))


def cm_theoretical(m):
    """Predicted one-cell/whole-stencil L2 error ratio of the two
    interpolants sharing m+1 equispaced midpoint nodes."""
    if not 2 <= m <= 6:
        raise ValueError("m must be in 2..6")
    roots = [i + 0.5 for i in range(m + 1)]
    central = _omega_squared_integral(roots, m // 2, m // 2 + 1)
    whole = _omega_squared_integral(roots, 0.0, m + 1)
    return float(np.sqrt((m + 1) * central / whole))


def _lagrange_eval(nodes, vals, x):
    p = np.zeros_like(x)
    for i, (xi, vi) in enumerate(zip(nodes, vals)):
        li = np.ones_like(x)
        for t, xt in enumerate(nodes):
            if t != i:
                li = li * (x - xt) / (xi - xt)
        p += vi * li
    return p


def cm_empirical_1d(m, n_cells=320, g=None):
    """Measured L2-error ratio of the midpoint-patch interpolant on cells
    of width h/(m+1) against degree-m interpolation on cells of width h.

    Returns (ratio, status); status is "exact" when both errors vanish
    (data from a polynomial the stencils reproduce).
    """
    if not 2 <= m <= 6:
        raise ValueError("m must be in 2..6")
    if g is None:
        def g(x):
            return np.sin(20 * np.pi * x)
        if n_cells < 32:
            raise ValueError("need >= 10 cells per wavelength of sin(20 pi x)")
    N = n_cells * (m + 1)
    hf = 1.0 / N
    mids = (np.arange(N) + 0.5) * hf
    gm = g(mids)
    xg, wg = leggauss(max(m + 3, 8))

    def cell(a, b):
        return 0.5 * (b - a) * xg + 0.5 * (a + b), 0.5 * (b - a) * wg

    err_fine = 0.0
    for j in range(N):
        s = min(max(j - m // 2, 0), N - m - 1)
        x, w = cell(j * hf, (j + 1) * hf)
        p = _lagrange_eval(mids[s:s + m + 1], gm[s:s + m + 1], x)
        err_fine += float(w @ (g(x) - p) ** 2)
    err_coarse = 0.0
    for J in range(n_cells):
        s = J * (m + 1)
        x, w = cell(J / n_cells, (J + 1) / n_cells)
        p = _lagrange_eval(mids[s:s + m + 1], gm[s:s + m + 1], x)
        err_coarse += float(w @ (g(x) - p) ** 2)
    err_fine, err_coarse = np.sqrt(err_fine), np.sqrt(err_coarse)
    if err_fine <= 1e-12 and err_coarse <= 1e-12:
        return 0.0, "exact"
    return float(err_fine / err_coarse), "ok"


def cm_table(m_list=(2, 3, 4, 5, 6), n_cells=320):
    table = ResultTable(columns=["m", "theoretical", "empirical", "status"],
                        metadata={"experiment": "cm-table",
                                  "n_cells": n_cells, "version": VERSION})
    for m in m_list:
        ratio, status = cm_empirical_1d(m, n_cells)
        table.add_row(m=m, theoretical=cm_theoretical(m), empirical=ratio,
                      status=status)
    return table


# ---------------------------------------------------------------------------
# 2D studies

def nested_meshes(n, coarsest=5):
    """Red-refinement chain ending at resolution n (needs n = c * 2^j)."""
    n0 = n
    while n0 % 2 == 0 and n0 // 2 >= coarsest:
        n0 //= 2
    meshes = [uniform_square_mesh(n0)]
    while meshes[-1].n_elements < 2 * n * n:
        meshes.append(refine_red(meshes[-1]))
    return meshes


def _solve_system(system, hierarchy=None, tol=1e-8, max_iter=2000):
    """Direct solve for small systems, PGMRES otherwise."""
    if hierarchy is None and system.ndof <= DIRECT_SOLVE_LIMIT:
        x = spla.spsolve(system.matrix.to_scipy().tocsc(), system.rhs)
        return x, None
    precond = (lambda v: vcycle_apply(hierarchy, v)) if hierarchy else None
    return gmres(system.matrix, system.rhs, precond=precond,
                 tol=tol, max_iter=max_iter)


def run_convergence(cfg):
    """Plane-wave accuracy study with observed orders per mesh pair."""
    eta = cfg.eta if cfg.eta is not None else 1.0
    sol = cfg.manufactured()
    table = ResultTable(
        columns=["m", "n", "dof", "l2", "dg", "energy",
                 "l2_order", "dg_order", "status"],
        metadata={"experiment": "convergence", "k": cfg.k, "eps": cfg.eps,
                  "eta": eta, "penalty_imag": cfg.penalty_imag,
                  "solution": cfg.solution, "version": VERSION})
    for m in cfg.m_list:
        prev = None
        for n in cfg.n_list:
            mesh = uniform_square_mesh(n)
            hcfg = HelmholtzConfig(k=cfg.k, eps=cfg.eps, m=m, eta=eta,
                                   penalty_imag=cfg.penalty_imag)
            recon = build_reconstruction_operator(mesh, m)
            system = assemble_rda_system(mesh, recon, hcfg, sol)
            x, rep = _solve_system(system, tol=cfg.tol,
                                   max_iter=cfg.max_iter)
            status = "ok" if rep is None or rep.converged else "no-convergence"
            err = compute_error_norms(RDASpace(recon), x, sol, hcfg)
            l2o = dgo = None
            if prev is not None and min(err.l2, prev[1]) > ERROR_FLOOR:
                l2o = float(np.log(prev[1] / err.l2) / np.log(n / prev[0]))
                dgo = float(np.log(prev[2] / err.dg) / np.log(n / prev[0]))
            table.add_row(m=m, n=n, dof=system.ndof, l2=err.l2, dg=err.dg,
                          energy=err.energy, l2_order=l2o, dg_order=dgo,
                          status=status)
            prev = (n, err.l2, err.dg)
    return table


def _error_curve_rda(m, n_list, cfg, eta, sol):
    pts = []
    for n in n_list:
        mesh = uniform_square_mesh(n)
        hcfg = HelmholtzConfig(k=cfg.k, eps=cfg.eps, m=m, eta=eta,
                               penalty_imag=cfg.penalty_imag)
        recon = build_reconstruction_operator(mesh, m)
        system = assemble_rda_system(mesh, recon, hcfg, sol)
        x, _ = _solve_system(system, tol=cfg.tol, max_iter=cfg.max_iter)
        err = compute_error_norms(RDASpace(recon), x, sol, hcfg)
        pts.append((system.ndof, err.l2, count_nnz(system)))
    return pts


def _error_curve_dg(m, n_list, cfg, eta, sol):
    pts = []
    for n in n_list:
        mesh = uniform_square_mesh(n)
        hcfg = HelmholtzConfig(k=cfg.k, eps=cfg.eps, m=m, eta=eta,
                               penalty_imag=cfg.penalty_imag)
        system = assemble_dg_system(mesh, m, hcfg, sol)
        x, _ = _solve_system(system, tol=cfg.tol, max_iter=cfg.max_iter)
        err = compute_error_norms(DGSpace(mesh, m), x, sol, hcfg)
        pts.append((system.ndof, err.l2, count_nnz(system)))
    return pts


def _loglog_interp(xs, ys, x):
    return float(np.exp(np.interp(np.log(x), np.log(xs), np.log(ys))))


def run_dg_comparison(cfg):
    """Error ratio at matched DOF count, and DOF/nnz ratios at matched
    accuracy, by log-log interpolation between mesh levels."""
    eta = cfg.eta if cfg.eta is not None else 1.0
    sol = cfg.manufactured()
    table = ResultTable(
        columns=["m", "error_ratio", "dof_ratio", "nnz_ratio", "status"],
        metadata={"experiment": "compare-dg", "k": cfg.k, "eps": cfg.eps,
                  "eta": eta, "rda_n": list(cfg.n_list),
                  "matching": "log-log interpolation over the shared range",
                  "version": VERSION})
    for m in cfg.m_list:
        # DG meshes sized so both DOF ranges overlap
        scale = np.sqrt(dim_pm(m))
        dg_n = sorted({max(2, int(round(n / scale))) for n in cfg.n_list})
        rda = _error_curve_rda(m, cfg.n_list, cfg, eta, sol)
        dg = _error_curve_dg(m, dg_n, cfg, eta, sol)
        rd, re_, rz = (np.array(v, dtype=float) for v in zip(*rda))
        dd, de, dz = (np.array(v, dtype=float) for v in zip(*dg))
        lo = max(rd.min(), dd.min())
        hi = min(rd.max(), dd.max())
        if lo >= hi:
            table.add_row(m=m, error_ratio=None, dof_ratio=None,
                          nnz_ratio=None, status="no-overlap")
            continue
        # matched-#DOF error ratio, geometric mean over the overlap
        samples = np.geomspace(lo, hi, 9)
        ratios = [_loglog_interp(rd, re_, s) / _loglog_interp(dd, de, s)
                  for s in samples]
        error_ratio = float(np.exp(np.mean(np.log(ratios))))
        # matched-accuracy cost ratios over the shared error range
        elo = max(re_.min(), de.min())
        ehi = min(re_.max(), de.max())
        if elo < ehi:
            esam = np.geomspace(elo, ehi, 9)
            dofr = [_loglog_interp(re_[::-1], rd[::-1], e)
                    / _loglog_interp(de[::-1], dd[::-1], e) for e in esam]
            nnzr = [_loglog_interp(re_[::-1], rz[::-1], e)
                    / _loglog_interp(de[::-1], dz[::-1], e) for e in esam]
            dof_ratio = float(np.exp(np.mean(np.log(dofr))))
            nnz_ratio = float(np.exp(np.mean(np.log(nnzr))))
        else:
            dof_ratio = nnz_ratio = None
        table.add_row(m=m, error_ratio=error_ratio, dof_ratio=dof_ratio,
                      nnz_ratio=nnz_ratio, status="ok")
    return table


def run_precond_study(cfg):
    """PGMRES iteration counts with the V-cycle preconditioner, for both
    the pure and the absorbing problem."""
    eta = cfg.eta if cfg.eta is not None else 10.0
    table = ResultTable(
        columns=["m", "n", "iters_eps0", "iters_epsk2", "status"],
        metadata={"experiment": "precond-study", "k": cfg.k, "eta": eta,
                  "tol": cfg.tol, "smoother": "jacobi(0.8) V(2,2)",
                  "version": VERSION})
    for m in cfg.m_list:
        for n in cfg.n_list:
            meshes = nested_meshes(n)
            mesh = meshes[-1]
            recon = build_reconstruction_operator(mesh, m)
            counts = {}
            ok = True
            for label, eps in (("iters_eps0", 0.0),
                               ("iters_epsk2", cfg.k ** 2)):
                hcfg = HelmholtzConfig(k=cfg.k, eps=eps, m=m, eta=eta,
                                       penalty_imag=cfg.penalty_imag)
                sol = plane_wave(cfg.k, eps=eps)
                system = assemble_rda_system(mesh, recon, hcfg, sol)
                hier = build_hierarchy(meshes, hcfg)
                _, rep = gmres(system.matrix, system.rhs,
                               precond=lambda v: vcycle_apply(hier, v),
                               tol=cfg.tol, max_iter=cfg.max_iter)
                counts[label] = rep.iterations
                ok = ok and rep.converged
            table.add_row(m=m, n=n, status="ok" if ok else "no-convergence",
                          **counts)
    return table


def spectrum_report(n, m, k, eps_mode="ksq", eta=None, size_cap=600):
    """Eigenvalue clouds of the system matrix and its preconditioned
    counterpart on a small mesh (dense path)."""
    eps = k ** 2 if eps_mode == "ksq" else 0.0
    mesh = uniform_square_mesh(n)
    if mesh.n_elements > size_cap:
        raise ValueError(f"spectrum limited to {size_cap} DOFs")
    hcfg = HelmholtzConfig(k=k, eps=eps, m=m, eta=eta)
    recon = build_reconstruction_operator(mesh, m)
    system = assemble_rda_system(mesh, recon, hcfg, plane_wave(k, eps=eps))
    A = system.matrix.to_scipy().toarray()
    P = assemble_p0_preconditioner(mesh, hcfg).matrix.to_scipy().toarray().real
    ev_a = np.sort_complex(dense_spectrum(A))
    ev_pa = np.sort_complex(dense_spectrum(np.linalg.solve(P, A)))
    table = ResultTable(
        columns=["matrix", "re", "im"],
        metadata={"experiment": "spectrum", "k": k, "m": m, "n": n,
                  "eps": eps, "version": VERSION,
                  "min_abs_original": float(np.abs(ev_a).min()),
                  "max_abs_original": float(np.abs(ev_a).max()),
                  "min_abs_preconditioned": float(np.abs(ev_pa).min()),
                  "max_abs_preconditioned": float(np.abs(ev_pa).max())})
    for ev in ev_a:
        table.add_row(matrix="original", re=float(ev.real),
                      im=float(ev.imag))
    for ev in ev_pa:
        table.add_row(matrix="preconditioned", re=float(ev.real),
                      im=float(ev.imag))
    return table
