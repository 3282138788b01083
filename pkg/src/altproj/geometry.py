"""
Euclidean vector primitives and exact distance-to-cone computation.

A :class:`Cone` is finitely generated::

    K = { G^T lam + L^T mu  |  lam >= 0, mu free }

with rows of ``generators`` (G) and ``lineality`` (L). The trivial cone
``{0}`` has no generators and no lineality. The empty cone is a separate
marker (``Cone.empty``), never an empty generator list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DomainError

DUAL_TOL = 1e-12
FACE_ENUM_MAX = 8


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Convert ``x`` to a finite float vector, optionally checking its length."""
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.size == 0:
        raise DomainError("point must have at least one coordinate")
    if not np.all(np.isfinite(p)):
        raise DomainError(f"point has non-finite coordinates: {p}")
    if dim is not None and p.size != dim:
        raise DomainError(f"dimension mismatch: expected {dim}, got {p.size}")
    return p


def unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise DomainError("cannot normalize the zero vector")
    return v / n


def orth_basis(rows: np.ndarray, dim: int, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis (as rows) of the span of ``rows``."""
    rows = np.asarray(rows, dtype=float).reshape(-1, dim)
    if rows.shape[0] == 0:
        return np.zeros((0, dim))
    u, s, vt = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((0, dim))
    rank = int(np.sum(s > rtol * s[0]))
    return vt[:rank]


def complement_basis(rows: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis (as rows) of the orthogonal complement of span(rows)."""
    rows = np.asarray(rows, dtype=float).reshape(-1, dim)
    if rows.shape[0] == 0:
        return np.eye(dim)
    _, s, vt = np.linalg.svd(rows, full_matrices=True)
    rank = int(np.sum(s > 1e-12 * s[0])) if s.size and s[0] > 0 else 0
    return vt[rank:]


def nnls(A: np.ndarray, b: np.ndarray, tol: float = DUAL_TOL, max_iter: int | None = None):
    """
    Lawson-Hanson active-set solver for ``min ||A x - b||`` with ``x >= 0``.

    Parameters
    ----------
    A : ndarray, shape (n, m)
    b : ndarray, shape (n,)
    tol : float
        Termination tolerance on the dual residual ``A^T (b - A x)``, scaled
        by ``||b|| * max column norm``.

    Returns
    -------
    x : ndarray, shape (m,)
    residual : ndarray, shape (n,)
        ``b - A x``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = A.shape
    x = np.zeros(m)
    if m == 0:
        return x, b.copy()
    if max_iter is None:
        max_iter = 3 * m + 10
    # relative to ||b||: the sets reach scales near 2^-40 where an absolute floor ignores valid faces
    scale = float(np.linalg.norm(b)) * float(np.max(np.linalg.norm(A, axis=0)))
    if scale == 0.0:
        return x, b.copy()
    dtol = tol * scale
    passive = np.zeros(m, dtype=bool)
    w = A.T @ (b - A @ x)

    for _ in range(max_iter):
        candidates = np.where(~passive & (w > dtol))[0]
        if candidates.size == 0:
            break
        j = candidates[np.argmax(w[candidates])]
        passive[j] = True
        while True:
            idx = np.where(passive)[0]
            z = np.zeros(m)
            z[idx] = np.linalg.lstsq(A[:, idx], b, rcond=None)[0]
            if np.all(z[idx] > 0):
                x = z
                break
            neg = idx[z[idx] <= 0]
            alpha = np.min(x[neg] / (x[neg] - z[neg]))
            x = x + alpha * (z - x)
            # indices driven to zero leave the passive set
            passive &= x > 1e-15 * max(1.0, float(np.max(np.abs(x))))
            x[~passive] = 0.0
            if not passive.any():
                break
        w = A.T @ (b - A @ x)
    return x, b - A @ x


@dataclass(frozen=True, eq=False)
class Cone:
    """
    Finitely generated convex cone in R^dim.

    ``generators`` and ``lineality`` are stored as rows. ``is_empty`` marks the
    empty cone; its generator arrays are ignored.
    """

    generators: np.ndarray
    lineality: np.ndarray
    dim: int
    is_empty: bool = False
    _lin_basis: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        g = np.asarray(self.generators, dtype=float).reshape(-1, self.dim)
        l = np.asarray(self.lineality, dtype=float).reshape(-1, self.dim)
        if g.size:
            # unit generators: a tiny but valid ray would otherwise sit below the NNLS dual tolerance
            n = np.linalg.norm(g, axis=1)
            g = g[n > 0] / n[n > 0, None]
        object.__setattr__(self, "generators", g)
        object.__setattr__(self, "lineality", l)
        object.__setattr__(self, "_lin_basis", orth_basis(l, self.dim))

    # constructors ---------------------------------------------------------

    @classmethod
    def trivial(cls, dim: int) -> "Cone":
        return cls(np.zeros((0, dim)), np.zeros((0, dim)), dim)

    @classmethod
    def empty(cls, dim: int) -> "Cone":
        return cls(np.zeros((0, dim)), np.zeros((0, dim)), dim, is_empty=True)

    @classmethod
    def whole(cls, dim: int) -> "Cone":
        return cls(np.zeros((0, dim)), np.eye(dim), dim)

    @classmethod
    def from_generators(cls, generators, lineality=None, dim: int | None = None) -> "Cone":
        g = np.atleast_2d(np.asarray(generators, dtype=float))
        if dim is None:
            dim = g.shape[1]
        if lineality is None:
            lineality = np.zeros((0, dim))
        return cls(g.reshape(-1, dim), np.asarray(lineality, dtype=float).reshape(-1, dim), dim)

    # queries --------------------------------------------------------------

    @property
    def is_trivial(self) -> bool:
        return (not self.is_empty) and self.generators.shape[0] == 0 and self._lin_basis.shape[0] == 0

    def _reduced_problem(self, v: np.ndarray):
        """Remove the lineality span from ``v`` and the generators."""
        Q = self._lin_basis
        if Q.shape[0] == 0:
            return self.generators, v
        G = self.generators - (self.generators @ Q.T) @ Q
        return G, v - Q.T @ (Q @ v)

    def project(self, v) -> np.ndarray:
        """Euclidean projection of ``v`` onto the cone (active-set NNLS)."""
        if self.is_empty:
            raise DomainError("cannot project onto the empty cone")
        v = np.asarray(v, dtype=float)
        G, vr = self._reduced_problem(v)
        if G.shape[0] == 0:
            return v - vr
        _, resid = nnls(G.T, vr)
        return v - resid

    def distance(self, v) -> float:
        return cone_distance(self, v)

    def project_many(self, W) -> np.ndarray:
        """
        Project each row of ``W`` onto the cone.

        Small cones use vectorized face enumeration: every generator subset is
        a candidate face, and the closest primal-feasible candidate is the
        projection. Larger cones fall back to one NNLS solve per row.
        """
        if self.is_empty:
            raise DomainError("cannot project onto the empty cone")
        W = np.asarray(W, dtype=float).reshape(-1, self.dim)
        Q = self._lin_basis
        lin_part = (W @ Q.T) @ Q if Q.shape[0] else np.zeros_like(W)
        Wr = W - lin_part
        G = self.generators
        if Q.shape[0] and G.shape[0]:
            G = G - (G @ Q.T) @ Q
        keep = np.linalg.norm(G, axis=1) > 1e-14 if G.shape[0] else np.zeros(0, dtype=bool)
        G = G[keep]
        m = G.shape[0]
        if m == 0:
            return lin_part
        if m > FACE_ENUM_MAX:
            out = np.empty_like(W)
            for i, w in enumerate(Wr):
                _, resid = nnls(G.T, w)
                out[i] = W[i] - resid
            return out
        best = np.zeros_like(Wr)
        best_r = np.einsum("ij,ij->i", Wr, Wr)
        for k in range(1, m + 1):
            for face in combinations(range(m), k):
                GF = G[list(face)]
                pinv = np.linalg.pinv(GF.T)
                lam = Wr @ pinv.T
                ok = np.all(lam >= -1e-13 * max(1.0, float(np.max(np.abs(lam), initial=0.0))), axis=1)
                if not ok.any():
                    continue
                P = np.clip(lam, 0.0, None) @ GF
                r = Wr - P
                rr = np.einsum("ij,ij->i", r, r)
                better = ok & (rr < best_r)
                best[better] = P[better]
                best_r[better] = rr[better]
        return best + lin_part

    def contains(self, v, tol: float = 1e-9) -> bool:
        return cone_distance(self, v) <= tol

    def key(self, decimals: int = 9) -> tuple:
        """Hashable identity used to group points sharing the same cone."""
        if self.is_empty:
            return ("empty", self.dim)
        g = self.generators
        if g.shape[0]:
            g = g / np.linalg.norm(g, axis=1, keepdims=True)
            Q = self._lin_basis
            if Q.shape[0]:
                g = g - (g @ Q.T) @ Q
                nz = np.linalg.norm(g, axis=1) > 1e-12
                g = g[nz]
                if g.shape[0]:
                    g = g / np.linalg.norm(g, axis=1, keepdims=True)
            g = np.round(g, decimals) + 0.0
            g = np.unique(g, axis=0) if g.shape[0] else g
        Q = self._lin_basis
        proj = np.round(Q.T @ Q, decimals) + 0.0 if Q.shape[0] else np.zeros((0,))
        return (self.dim, tuple(map(tuple, g)), tuple(proj.reshape(-1)))

    def reduced(self) -> "Cone":
        """Drop duplicate and redundant generators (those inside the cone of the rest)."""
        if self.is_empty or self.generators.shape[0] <= 1:
            return self
        g = self.generators / np.linalg.norm(self.generators, axis=1, keepdims=True)
        g = np.unique(np.round(g, 12), axis=0)
        keep = list(range(g.shape[0]))
        for i in range(g.shape[0]):
            others = [j for j in keep if j != i]
            if not others:
                continue
            sub = Cone(g[others], self.lineality, self.dim)
            if cone_distance(sub, g[i]) <= 1e-10:
                # generator i is redundant unless its negative makes it lineality
                keep.remove(i)
        return Cone(g[keep], self.lineality, self.dim)


def cone_distance(c: Cone, v) -> float:
    """
    Distance from ``v`` to the cone ``c``.

    Returns ``inf`` for the empty cone (the infimum over an empty set).
    """
    v = as_point(v, c.dim)
    if c.is_empty:
        return float("inf")
    G, vr = c._reduced_problem(v)
    if G.shape[0] == 0:
        return float(np.linalg.norm(vr))
    _, resid = nnls(G.T, vr)
    return float(np.linalg.norm(resid))


def _dedupe_dirs(dirs: list[np.ndarray], tol: float = 1e-9) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for d in dirs:
        if all(np.linalg.norm(d - e) > tol for e in out):
            out.append(d)
    return out


def unit_sphere_samples(c: Cone, k: int = 8, seed: int = 0) -> list[np.ndarray]:
    """
    Unit vectors of the cone: its extreme directions plus up to ``k`` normalized
    interior combinations.

    Extreme directions are the normalized generators and both signs of each
    lineality basis vector. The first interior combination (when at least two
    directions exist) is the normalized sum of the generators; the rest are
    seeded random combinations. Trivial and empty cones give ``[]``.
    """
    if c.is_empty or c.is_trivial:
        return []
    dim = c.dim
    gens = [unit(g) for g in c.reduced().generators]
    lin = [q for q in c._lin_basis]
    extreme = _dedupe_dirs(gens + lin + [-q for q in lin])
    n_dirs = len(gens) + len(lin)
    if n_dirs < 2:
        return extreme
    rng = np.random.default_rng(np.uint64(seed))
    combos: list[np.ndarray] = []
    if len(gens) >= 2:
        s = np.sum(gens, axis=0)
        if np.linalg.norm(s) > 1e-12:
            combos.append(unit(s))
    G = np.array(gens).reshape(-1, dim)
    L = np.array(lin).reshape(-1, dim)
    attempts = 0
    while len(combos) < k and attempts < 4 * k + 8:
        attempts += 1
        v = np.zeros(dim)
        if G.shape[0]:
            v += rng.exponential(size=G.shape[0]) @ G
        if L.shape[0]:
            v += rng.standard_normal(L.shape[0]) @ L
        nv = np.linalg.norm(v)
        if nv > 1e-12:
            combos.append(v / nv)
    return _dedupe_dirs(extreme + combos[:k])


def sup_unit_inner(c: Cone, W: np.ndarray, fallback_dirs: np.ndarray | None = None):
    """
    For each row ``w`` of ``W``, evaluate ``sup { <u, w> : u in c, ||u|| = 1 }``.

    When the projection ``P_c(w)`` is nonzero the supremum is attained at
    ``u* = P_c(w)/||P_c(w)||``; the value is ``<u*, w>`` (maximized together
    with the sampled unit directions). Otherwise only the sampled directions
    are used, giving a nonpositive value. Cones without unit vectors give
    ``-inf``.

    Returns
    -------
    values : ndarray, shape (N,)
    dist : ndarray, shape (N,)
        ``||w - P_c(w)||``.
    proj_norm : ndarray, shape (N,)
        ``||P_c(w)||``.
    """
    W = np.asarray(W, dtype=float).reshape(-1, c.dim)
    N = W.shape[0]
    if c.is_empty:
        return np.full(N, -np.inf), np.full(N, np.inf), np.zeros(N)
    if c.is_trivial:
        return np.full(N, -np.inf), np.linalg.norm(W, axis=1), np.zeros(N)
    P = c.project_many(W)
    pn = np.linalg.norm(P, axis=1)
    dist = np.linalg.norm(W - P, axis=1)
    vals = np.full(N, -np.inf)
    pos = pn > 1e-13
    vals[pos] = np.einsum("ij,ij->i", W[pos], P[pos]) / pn[pos]
    if fallback_dirs is None:
        fallback_dirs = np.array(unit_sphere_samples(c, k=4, seed=0)).reshape(-1, c.dim)
    if fallback_dirs.shape[0]:
        samp = np.max(W @ fallback_dirs.T, axis=1)
        vals = np.maximum(vals, samp)
    return vals, dist, pn


def projection_angle_gap(x, y) -> float:
    """
    ``||x - y||/||y|| - ||x/||x|| - z||`` where ``z`` is the projection of
    ``x/||x||`` onto the line spanned by ``y``. Never negative.
    """
    x = as_point(x)
    y = as_point(y, x.size)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        raise DomainError("projection_angle_gap requires nonzero vectors")
    ux, uy = x / nx, y / ny
    z = float(ux @ uy) * uy
    return float(np.linalg.norm(x - y) / ny - np.linalg.norm(ux - z))
