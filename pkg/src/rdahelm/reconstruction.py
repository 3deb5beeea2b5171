"""Patch-based polynomial reconstruction from piecewise-constant data.

Each element K owns a patch S(K) grown by face-neighbor rounds, and a
constrained least-squares fit through the patch barycenters.  The fit is
stored as a matrix M_K mapping the patch's cell values to the scaled
monomial coefficients of the local degree-m polynomial, with the constraint
p(x_K) = g_K eliminated exactly.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq

from .polybasis import PolySpec, dim_pm, eval_scaled_monomials

# 2D patch-size thresholds per reconstruction degree
_PATCH_SIZE_2D = {2: 9, 3: 16, 4: 21, 5: 29, 6: 38}


class PatchGrowthError(Exception):
    pass


class UnisolvenceError(Exception):
    pass


def patch_size_table(m, dim=2):
    if dim != 2:
        raise ValueError("only 2D patch sizes are tabulated")
    try:
        return _PATCH_SIZE_2D[m]
    except KeyError:
        raise ValueError(f"no tabulated patch size for degree {m}") from None


@dataclass(frozen=True)
class ElementPatch:
    owner: int
    members: tuple        # element indices, round-ordered then index-ordered
    points: np.ndarray    # (len(members), 2) member barycenters
    depth: int


def build_patch(mesh, owner, target):
    """Grow S(K) by face-neighbor closure until it holds >= target elements.

    Full rounds are kept: the last round is never truncated, so the patch
    can be larger than the target.
    """
    members = [owner]
    in_patch = {owner}
    depth = 0
    while len(members) < target:
        frontier = set()
        for k in members:
            for nb in mesh.face_neighbors(k):
                if nb not in in_patch:
                    frontier.add(nb)
        if not frontier:
            raise PatchGrowthError(
                f"patch of element {owner} cannot reach {target} members")
        round_members = sorted(frontier)
        members.extend(round_members)
        in_patch.update(round_members)
        depth += 1
    return ElementPatch(owner=owner, members=tuple(members),
                        points=mesh.barycenter[list(members)], depth=depth)


def fit_constrained_ls(patch, m, center, length):
    """Least-squares coefficient matrix M_K for one patch.

    Returns an (N_m, #S(K)) matrix: applied to the patch cell values it
    yields scaled monomial coefficients (basis centered at `center` with
    scaling `length`) of the polynomial minimizing the misfit over the
    collocation points subject to p(center) = value at the owner cell.
    """
    spec = PolySpec(m, np.asarray(center, float), length)
    vals, _ = eval_scaled_monomials(patch.points, spec)
    n = spec.dim
    ns = len(patch.members)
    # constraint elimination: p = g_K + sum_{|alpha|>=1} c_alpha phi_alpha,
    # every phi_alpha vanishes at the owner barycenter
    V = vals[:, 1:]                       # (ns, n-1)
    sol, _, rank, _ = lstsq(V, np.eye(ns), lapack_driver="gelsd")
    if rank < n - 1:
        raise UnisolvenceError(
            f"patch of element {patch.owner} is not unisolvent for "
            f"degree {m} (rank {rank} < {n - 1})")
    owner_pos = patch.members.index(patch.owner)
    M = np.zeros((n, ns))
    M[0, owner_pos] = 1.0
    # c = W (g - g_K 1)
    M[1:, :] = sol
    M[1:, owner_pos] -= sol.sum(axis=1)
    return M


@dataclass(frozen=True)
class ReconstructionOperator:
    degree: int
    mesh: object
    patches: list            # ElementPatch per element
    coeff_maps: list         # M_K per element, (N_m, #S(K))
    specs: list              # PolySpec per element (basis center/scaling)
    lambda_per_element: np.ndarray
    lambda_global: float     # max over K of 1 + Lambda(m,S(K)) sqrt(#S(K))

    @property
    def dim(self):
        return dim_pm(self.degree)


def build_reconstruction_operator(mesh, m, target=None, estimate_lambdas=False):
    """Per-element constrained LS fits for the whole mesh."""
    if target is None:
        target = patch_size_table(m)
    patches = []
    maps = []
    specs = []
    lambdas = np.full(mesh.n_elements, np.nan)
    for k in range(mesh.n_elements):
        patch = build_patch(mesh, k, target)
        # scale by the patch spread for conditioning at high degree
        spread = np.linalg.norm(
            patch.points - mesh.barycenter[k], axis=1).max()
        spec = PolySpec(m, mesh.barycenter[k], max(spread, mesh.h_K[k]))
        maps.append(fit_constrained_ls(patch, m, spec.center, spec.length))
        patches.append(patch)
        specs.append(spec)
        if estimate_lambdas:
            lambdas[k], _ = estimate_lambda(mesh, patch, m)
    if estimate_lambdas:
        glob = float(np.max(1.0 + lambdas * np.sqrt(
            [len(p.members) for p in patches])))
    else:
        glob = np.nan
    return ReconstructionOperator(degree=m, mesh=mesh, patches=patches,
                                  coeff_maps=maps, specs=specs,
                                  lambda_per_element=lambdas,
                                  lambda_global=glob)


def reconstruct_from_point_values(op, values):
    """Apply the reconstruction to per-element data.

    Returns an (#elements, N_m) array of scaled monomial coefficients; the
    element's basis is defined by op.specs[K].
    """
    values = np.asarray(values)
    if values.shape[0] != op.mesh.n_elements:
        raise ValueError("value vector length does not match the mesh")
    n = op.dim
    coeffs = np.zeros((op.mesh.n_elements, n), dtype=values.dtype)
    for k, (patch, M) in enumerate(zip(op.patches, op.coeff_maps)):
        coeffs[k] = M @ values[list(patch.members)]
    return coeffs


def _triangle_samples(mesh, k, per_element):
    """Quasi-uniform barycentric sample points inside element k.

    The stream is seeded per element only, so a larger per_element count
    extends the same point sequence (sample sets are nested).
    """
    rng = np.random.default_rng(k * 7919)
    r = rng.random((per_element, 2))
    flip = r.sum(axis=1) > 1.0
    r[flip] = 1.0 - r[flip]
    p0, p1, p2 = mesh.vertices[mesh.elements[k]]
    return p0 + np.outer(r[:, 0], p1 - p0) + np.outer(r[:, 1], p2 - p0)


def estimate_lambda(mesh, patch, m, samples=30, trials=64, iters=20):
    """Lower-bound estimate of the patch stability constant.

    Maximizes max_{S(K)} |p| / max_{I(K)} |p| over degree-m polynomials by
    random trials plus power-iteration refinement on the sampled operator
    pair (dense samples vs collocation points).  Returns the estimate
    together with the stability companion 1 + Lambda * sqrt(#S(K)).
    """
    center = mesh.barycenter[patch.owner]
    length = max(np.linalg.norm(patch.points - center, axis=1).max(),
                 mesh.h_K[patch.owner])
    spec = PolySpec(m, center, length)
    dense = np.vstack([_triangle_samples(mesh, k, samples)
                       for k in patch.members])
    A, _ = eval_scaled_monomials(dense, spec)     # dense sample values
    B, _ = eval_scaled_monomials(patch.points, spec)
    rng = np.random.default_rng(patch.owner + 12345)
    n = spec.dim

    def ratio(c):
        num = np.abs(A @ c).max()
        den = np.abs(B @ c).max()
        return num / den if den > 0 else np.inf

    best = 1.0   # p constant gives exactly 1
    for _ in range(trials):
        best = max(best, ratio(rng.standard_normal(n)))
    # 2-norm power iteration on (B^T B)^{-1} A^T A as a smooth surrogate,
    # feeding its iterates through the max-ratio objective
    G = B.T @ B
    H = A.T @ A
    c = rng.standard_normal(n)
    for _ in range(iters):
        c = np.linalg.solve(G, H @ c)
        nc = np.linalg.norm(c)
        if nc == 0:
            break
        c /= nc
        best = max(best, ratio(c))
    return best, 1.0 + best * np.sqrt(len(patch.members))
