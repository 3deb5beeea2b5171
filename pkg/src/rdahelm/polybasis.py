"""Scaled monomial bases and quadrature on triangles and segments.

Monomials ((x - c)/L)^alpha are enumerated in graded lexicographic order,
so the constant comes first and the degree-1 terms are x then y.  Scaling
by the patch diameter keeps the least-squares Vandermonde matrices well
conditioned at high degree.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


class UnsupportedOrderError(Exception):
    pass


MAX_EXACTNESS = 40


def dim_pm(m):
    """Dimension of the 2D polynomial space of total degree <= m."""
    if m < 0:
        raise ValueError("degree must be >= 0")
    return (m + 1) * (m + 2) // 2


def monomial_exponents(m):
    """Graded lex exponent pairs (ax, ay) for |alpha| <= m."""
    return [(d - ay, ay) for d in range(m + 1) for ay in range(d + 1)]


@dataclass(frozen=True)
class PolySpec:
    degree: int
    center: np.ndarray
    length: float

    def __post_init__(self):
        if self.degree < 0 or self.length <= 0.0:
            raise ValueError("invalid PolySpec")

    @property
    def dim(self):
        return dim_pm(self.degree)


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (npts, d) reference coordinates
    weights: np.ndarray  # positive, sum to the reference measure
    exactness: int


def eval_scaled_monomials(x, spec):
    """Values and gradients of the scaled monomial basis at points x.

    x may be a single 2-vector or an (npts, 2) array.  Returns
    (values, gradients) with shapes (npts, N) and (npts, N, 2); the leading
    axis is dropped for a single point.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    t = (pts - spec.center) / spec.length
    m = spec.degree
    # powers up to m, with t^0 = 1
    px = np.ones((len(pts), m + 1))
    py = np.ones((len(pts), m + 1))
    for d in range(1, m + 1):
        px[:, d] = px[:, d - 1] * t[:, 0]
        py[:, d] = py[:, d - 1] * t[:, 1]
    exps = monomial_exponents(m)
    vals = np.empty((len(pts), len(exps)))
    grads = np.empty((len(pts), len(exps), 2))
    for j, (ax, ay) in enumerate(exps):
        vals[:, j] = px[:, ax] * py[:, ay]
        gx = ax * px[:, ax - 1] * py[:, ay] if ax > 0 else 0.0
        gy = ay * px[:, ax] * py[:, ay - 1] if ay > 0 else 0.0
        grads[:, j, 0] = gx / spec.length
        grads[:, j, 1] = gy / spec.length
    if np.asarray(x).ndim == 1:
        return vals[0], grads[0]
    return vals, grads


def segment_quadrature(exactness):
    """Gauss-Legendre rule on [0, 1] exact for the requested degree."""
    if exactness < 0 or exactness > MAX_EXACTNESS:
        raise UnsupportedOrderError(f"segment exactness {exactness}")
    npts = exactness // 2 + 1
    x, w = roots_legendre(npts)
    pts = 0.5 * (x + 1.0)
    return QuadratureRule(points=pts.reshape(-1, 1), weights=0.5 * w,
                          exactness=2 * npts - 1)


def triangle_quadrature(exactness):
    """Conical-product rule on the reference triangle {x,y>=0, x+y<=1}.

    Gauss-Jacobi(1,0) in one direction absorbs the Duffy Jacobian, so all
    weights are positive and any polynomial exactness degree is available.
    """
    if exactness < 0 or exactness > MAX_EXACTNESS:
        raise UnsupportedOrderError(f"triangle exactness {exactness}")
    npts = exactness // 2 + 1
    xg, wg = roots_legendre(npts)
    xj, wj = roots_jacobi(npts, 1.0, 0.0)
    # map to [0, 1]; the Jacobi weight (1-s) is part of wj after mapping
    s = 0.5 * (xj + 1.0)
    ws = 0.25 * wj          # includes the (1 - s) factor
    t = 0.5 * (xg + 1.0)
    wt = 0.5 * wg
    pts = []
    wts = []
    for a, wa in zip(s, ws):
        for b, wb in zip(t, wt):
            pts.append((a, (1.0 - a) * b))
            wts.append(wa * wb)
    return QuadratureRule(points=np.array(pts), weights=np.array(wts),
                          exactness=2 * npts - 1)


def map_to_triangle(rule, p0, p1, p2):
    """Push a reference-triangle rule to the physical triangle (p0,p1,p2).

    Returns (points, weights) with weights scaled by |det J| (the reference
    measure 1/2 times det gives the physical area).
    """
    p0 = np.asarray(p0, float)
    jac = np.column_stack([np.asarray(p1, float) - p0,
                           np.asarray(p2, float) - p0])
    det = abs(np.linalg.det(jac))
    pts = p0 + rule.points @ jac.T
    return pts, rule.weights * det


def map_to_segment(rule, a, b):
    """Push a [0,1] rule to the segment from a to b."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    pts = a + rule.points * (b - a)
    length = np.linalg.norm(b - a)
    return pts, rule.weights * length
