"""
Convex bodies presented through their support functions.

Every body evaluates, for a batch of directions W of shape (m, dim),
its support values h(W) of shape (m,) together with a maximizing boundary
point for each direction (the gradient of h wherever h is differentiable).
The dual solver only ever touches a body through this pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy.optimize import linprog, minimize, minimize_scalar
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .errors import (
    DimensionMismatch,
    OriginNotInterior,
    SymcapError,
    UnsupportedKind,
    UnsupportedSum,
)

_TINY = 1e-300


def _as_batch(W, dim: int) -> tuple[np.ndarray, bool]:
    W = np.asarray(W, dtype=float)
    single = W.ndim == 1
    W = np.atleast_2d(W)
    if W.shape[-1] != dim:
        raise DimensionMismatch(
            f"DimensionMismatch: vector of length {W.shape[-1]} for a body in R^{dim}"
        )
    return W, single


def sphere_directions(dim: int, count: int, seed: int = 42) -> np.ndarray:
    """Seeded, uniformly distributed unit vectors, shape (count, dim)."""
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(count, dim))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


class Body:
    """Base class; subclasses implement `_support` and optionally `_gauge`."""

    dim: int

    # -- evaluation -------------------------------------------------------
    def support(self, W) -> tuple[np.ndarray, np.ndarray]:
        W, single = _as_batch(W, self.dim)
        h, g = self._support(W)
        return (h[0], g[0]) if single else (h, g)

    def gauge(self, Z) -> np.ndarray:
        Z, single = _as_batch(Z, self.dim)
        j = self._gauge(Z)
        return j[0] if single else j

    def _support(self, W):
        raise NotImplementedError

    def _gauge(self, Z):
        return _gauge_by_search(self, Z)

    # -- structure --------------------------------------------------------
    @property
    def is_smooth(self) -> bool:
        """True when h is differentiable away from 0 (strictly convex body)."""
        return False

    @property
    def kind(self) -> str:
        return _KIND_NAMES[type(self)]

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Ball(Body):
    radius: float
    dim: int

    def __post_init__(self):
        if not self.radius > 0:
            raise OriginNotInterior("OriginNotInterior: ball radius must be positive")

    def _support(self, W):
        nrm = np.linalg.norm(W, axis=1)
        g = self.radius * W / np.maximum(nrm, _TINY)[:, None]
        return self.radius * nrm, g

    def _gauge(self, Z):
        return np.linalg.norm(Z, axis=1) / self.radius

    @property
    def is_smooth(self):
        return True

    def to_dict(self):
        return {"type": "ball", "r": self.radius, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Ellipsoid(Body):
    """{z : 1/2 <S z, z> <= 1}; the gauge squared is 1/2 <S z, z>."""

    S: np.ndarray = field(repr=False)

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DimensionMismatch("DimensionMismatch: S must be square")
        S = 0.5 * (S + S.T)
        if np.linalg.eigvalsh(S).min() <= 0:
            raise OriginNotInterior("OriginNotInterior: S must be positive definite")
        object.__setattr__(self, "S", S)

    @classmethod
    def from_radii(cls, radii) -> "Ellipsoid":
        """Symplectic ellipsoid sum_j (x_j^2 + y_j^2) / r_j^2 <= 1 in R^{2n}."""
        r = np.asarray(radii, dtype=float)
        d = 2.0 / r**2
        return cls(np.diag(np.r_[d, d]))

    @classmethod
    def from_semi_axes(cls, axes) -> "Ellipsoid":
        a = np.asarray(axes, dtype=float)
        return cls(np.diag(2.0 / a**2))

    @property
    def dim(self):
        return self.S.shape[0]

    @cached_property
    def _Sinv(self):
        Sinv = np.linalg.inv(self.S)
        return 0.5 * (Sinv + Sinv.T)

    @cached_property
    def semi_axes(self) -> np.ndarray:
        return np.sort(np.sqrt(2.0 / np.linalg.eigvalsh(self.S)))

    def _support(self, W):
        SW = 2.0 * W @ self._Sinv
        h = np.sqrt(np.maximum(np.einsum("ij,ij->i", W, SW), 0.0))
        return h, SW / np.maximum(h, _TINY)[:, None]

    def _gauge(self, Z):
        return np.sqrt(np.maximum(0.5 * np.einsum("ij,jk,ik->i", Z, self.S, Z), 0.0))

    @property
    def is_smooth(self):
        return True

    def to_dict(self):
        return {"type": "ellipsoid", "S": self.S.tolist()}


def _hull_equations(V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Facet normals A and offsets b of conv(V), so that conv(V) = {A x <= b}."""
    dim = V.shape[1]
    if dim == 1:
        lo, hi = V.min(), V.max()
        return np.array([[1.0], [-1.0]]), np.array([hi, -lo])
    hull = ConvexHull(V)
    eq = hull.equations
    A, b = eq[:, :-1], -eq[:, -1]
    # merge coplanar simplices produced by qhull on non-simplicial facets
    key = np.round(np.c_[A, b], 12)
    _, idx = np.unique(key, axis=0, return_index=True)
    idx = np.sort(idx)
    return A[idx], b[idx]


@dataclass(frozen=True, eq=False)
class PolytopeV(Body):
    """Convex hull of a vertex list; support ties resolve to the lowest index."""

    vertices: np.ndarray = field(repr=False)

    def __post_init__(self):
        V = np.atleast_2d(np.array(self.vertices, dtype=float))
        object.__setattr__(self, "vertices", V)
        A, b = _hull_equations(V)
        if np.any(b <= 1e-12):
            raise OriginNotInterior("OriginNotInterior: 0 is not interior to the polytope")
        object.__setattr__(self, "_A", A)
        object.__setattr__(self, "_b", b)

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        return self._A, self._b

    def _support(self, W):
        P = W @ self.vertices.T
        i = np.argmax(P, axis=1)
        return P[np.arange(len(W)), i], self.vertices[i]

    def _gauge(self, Z):
        return np.max(Z @ (self._A / self._b[:, None]).T, axis=1)

    def to_dict(self):
        return {"type": "polytope_v", "vertices": self.vertices.tolist()}


@dataclass(frozen=True, eq=False)
class PolytopeH(Body):
    """{z : A z <= b} with b > 0."""

    A: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.A, dtype=float))
        b = np.array(self.b, dtype=float).ravel()
        if len(b) != len(A):
            raise DimensionMismatch("DimensionMismatch: A and b disagree")
        if np.any(b <= 0):
            raise OriginNotInterior("OriginNotInterior: require b > 0")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_vrep", PolytopeV(_h_to_v(A, b)))

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def vertices(self) -> np.ndarray:
        return self._vrep.vertices

    def _support(self, W):
        return self._vrep._support(W)

    def _gauge(self, Z):
        return np.max(Z @ (self.A / self.b[:, None]).T, axis=1)

    def to_dict(self):
        return {"type": "polytope_h", "A": self.A.tolist(), "b": self.b.tolist()}


def _h_to_v(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    dim = A.shape[1]
    if dim == 1:
        a = A[:, 0]
        hi = np.min(b[a > 0] / a[a > 0])
        lo = np.max(b[a < 0] / a[a < 0])
        return np.array([[lo], [hi]])
    hs = HalfspaceIntersection(np.c_[A, -b], np.zeros(dim))
    pts = hs.intersections
    hull = ConvexHull(pts)
    V = pts[hull.vertices]
    # deduplicate near-identical intersection points
    _, idx = np.unique(np.round(V, 10), axis=0, return_index=True)
    return V[np.sort(idx)]


@dataclass(frozen=True, eq=False)
class PSum(Body):
    """Firey p-sum: support (sum_i h_i^p)^(1/p); p = 1 is the Minkowski sum."""

    p: float
    bodies: tuple

    def __post_init__(self):
        if not self.p >= 1:
            raise SymcapError("p-sum requires p >= 1")
        bodies = tuple(self.bodies)
        if len(bodies) < 1 or len({b.dim for b in bodies}) != 1:
            raise DimensionMismatch("DimensionMismatch: p-sum summands differ in dimension")
        object.__setattr__(self, "bodies", bodies)

    @property
    def dim(self):
        return self.bodies[0].dim

    def _support(self, W):
        p = self.p
        parts = [b._support(W) for b in self.bodies]
        if p == 1:
            return sum(h for h, _ in parts), sum(g for _, g in parts)
        hs = [np.maximum(h, 0.0) for h, _ in parts]
        h = sum(x**p for x in hs) ** (1.0 / p)
        g = sum((x ** (p - 1))[:, None] * gx for x, (_, gx) in zip(hs, parts))
        return h, (np.maximum(h, _TINY) ** (1.0 - p))[:, None] * g

    @property
    def is_smooth(self):
        return all(b.is_smooth for b in self.bodies)

    def to_dict(self):
        return {"type": "psum", "p": self.p, "bodies": [b.to_dict() for b in self.bodies]}


@dataclass(frozen=True, eq=False)
class LagrangianProduct(Body):
    """Delta x Lambda in R^n_q x R^n_p, coordinates z = (q, p)."""

    delta: Body
    lam: Body

    def __post_init__(self):
        if self.delta.dim != self.lam.dim:
            raise DimensionMismatch(
                f"DimensionMismatch: Delta in R^{self.delta.dim}, Lambda in R^{self.lam.dim}"
            )

    @property
    def dim(self):
        return 2 * self.delta.dim

    @property
    def n(self):
        return self.delta.dim

    def _support(self, W):
        n = self.n
        a, ga = self.delta._support(W[:, :n])
        b, gb = self.lam._support(W[:, n:])
        return a + b, np.hstack([ga, gb])

    def _gauge(self, Z):
        n = self.n
        return np.maximum(self.delta._gauge(Z[:, :n]), self.lam._gauge(Z[:, n:]))

    def to_dict(self):
        return {
            "type": "lagrangian_product",
            "delta": self.delta.to_dict(),
            "lambda": self.lam.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class SymplecticProduct(Body):
    """D_1 x ... x D_k with D_i in R^{2 n_i}, arranged as (x-blocks, y-blocks)."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if any(f.dim % 2 for f in factors):
            raise DimensionMismatch("DimensionMismatch: symplectic factors need even dimension")
        object.__setattr__(self, "factors", factors)
        halves = [f.dim // 2 for f in factors]
        n = sum(halves)
        index = []
        offset = 0
        for h in halves:
            index.append(np.r_[offset : offset + h, n + offset : n + offset + h])
            offset += h
        object.__setattr__(self, "_index", index)

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)

    def _support(self, W):
        h = np.zeros(len(W))
        g = np.zeros_like(W)
        for f, idx in zip(self.factors, self._index):
            hf, gf = f._support(W[:, idx])
            h += hf
            g[:, idx] = gf
        return h, g

    def _gauge(self, Z):
        return np.max([f._gauge(Z[:, idx]) for f, idx in zip(self.factors, self._index)], axis=0)

    def to_dict(self):
        return {"type": "symplectic_product", "factors": [f.to_dict() for f in self.factors]}


@dataclass(frozen=True, eq=False)
class LinearImage(Body):
    """Psi(K) for an invertible matrix Psi."""

    matrix: np.ndarray = field(repr=False)
    body: Body

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.shape != (self.body.dim, self.body.dim):
            raise DimensionMismatch("DimensionMismatch: linear map does not fit the body")
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "_inv", np.linalg.inv(M))

    @property
    def dim(self):
        return self.body.dim

    def _support(self, W):
        h, g = self.body._support(W @ self.matrix)
        return h, g @ self.matrix.T

    def _gauge(self, Z):
        return self.body._gauge(Z @ self._inv.T)

    @property
    def is_smooth(self):
        return self.body.is_smooth

    def to_dict(self):
        return {"type": "linear_image", "matrix": self.matrix.tolist(), "body": self.body.to_dict()}


@dataclass(frozen=True, eq=False)
class Translate(Body):
    """K + w."""

    shift: np.ndarray = field(repr=False)
    body: Body

    def __post_init__(self):
        w = np.array(self.shift, dtype=float).ravel()
        if len(w) != self.body.dim:
            raise DimensionMismatch("DimensionMismatch: translation vector length")
        object.__setattr__(self, "shift", w)
        U = sphere_directions(self.body.dim, 64 * self.body.dim, seed=7)
        if np.min(self._support(U)[0]) <= 0:
            raise OriginNotInterior("OriginNotInterior: translate moves 0 outside the body")

    @property
    def dim(self):
        return self.body.dim

    def _support(self, W):
        h, g = self.body._support(W)
        return h + W @ self.shift, g + self.shift

    def _gauge(self, Z):
        # j(z) = inf{lam > 0 : z / lam - w in K}; bracket then bisect
        out = np.empty(len(Z))
        for k, z in enumerate(Z):
            if not np.any(z):
                out[k] = 0.0
                continue

            def inside(lam):
                return self.body._gauge((z / lam - self.shift)[None])[0] <= 1.0

            hi = 1.0
            while not inside(hi):
                hi *= 2.0
            lo = hi / 2.0
            while inside(lo) and lo > 1e-12:
                hi, lo = lo, lo / 2.0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if inside(mid):
                    hi = mid
                else:
                    lo = mid
            out[k] = hi
        return out

    @property
    def is_smooth(self):
        return self.body.is_smooth

    def to_dict(self):
        return {"type": "translate", "w": self.shift.tolist(), "body": self.body.to_dict()}


@dataclass(frozen=True, eq=False)
class Scale(Body):
    factor: float
    body: Body

    def __post_init__(self):
        if not self.factor > 0:
            raise SymcapError("scale factor must be positive")

    @property
    def dim(self):
        return self.body.dim

    def _support(self, W):
        h, g = self.body._support(W)
        return self.factor * h, self.factor * g

    def _gauge(self, Z):
        return self.body._gauge(Z) / self.factor

    @property
    def is_smooth(self):
        return self.body.is_smooth

    def to_dict(self):
        return {"type": "scale", "lambda": self.factor, "body": self.body.to_dict()}


_KIND_NAMES = {
    Ball: "ball",
    Ellipsoid: "ellipsoid",
    PolytopeV: "polytope_v",
    PolytopeH: "polytope_h",
    PSum: "psum",
    LagrangianProduct: "lagrangian_product",
    SymplecticProduct: "symplectic_product",
    LinearImage: "linear_image",
    Translate: "translate",
    Scale: "scale",
}


# ---------------------------------------------------------------------------
# gauge by polar search

def _gauge_by_search(body: Body, Z: np.ndarray, iters: int = 200) -> np.ndarray:
    """j(z) = max_{w != 0} <z, w> / h(w), by sphere grid plus batched ascent.

    The coarse grid has 2 dim 64 directions; each point is then refined by
    projected gradient ascent with a shared ladder of trial step sizes.
    """
    dim = body.dim
    G = sphere_directions(dim, 2 * dim * 64, seed=11)
    G = np.vstack([G, np.eye(dim), -np.eye(dim)])
    hG = body._support(G)[0]
    if np.any(hG <= 0):
        raise OriginNotInterior("OriginNotInterior: support not positive on the sphere")
    ratio = Z @ G.T / hG
    best = np.argmax(ratio, axis=1)
    w = G[best].copy()
    f = ratio[np.arange(len(Z)), best]
    steps = np.geomspace(1.0, 1e-9, 28)
    active = np.linalg.norm(Z, axis=1) > 0
    for _ in range(iters):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        za, wa = Z[idx], w[idx]
        h, g = body._support(wa)
        zw = np.einsum("ij,ij->i", za, wa)
        grad = za / h[:, None] - (zw / h**2)[:, None] * g
        grad -= np.einsum("ij,ij->i", grad, wa)[:, None] * wa
        gn = np.linalg.norm(grad, axis=1)
        d = grad / np.maximum(gn, _TINY)[:, None]
        cand = wa[:, None, :] + steps[None, :, None] * d[:, None, :]
        cand /= np.linalg.norm(cand, axis=2, keepdims=True)
        flat = cand.reshape(-1, dim)
        hc = body._support(flat)[0].reshape(len(idx), len(steps))
        fc = np.einsum("ikj,ij->ik", cand, za) / hc
        k = np.argmax(fc, axis=1)
        fbest = fc[np.arange(len(idx)), k]
        improved = fbest > f[idx] * (1 + 1e-15) + 1e-300
        upd = idx[improved]
        w[upd] = cand[improved, k[improved]]
        f[upd] = fbest[improved]
        active[idx[~improved]] = False
    f[np.linalg.norm(Z, axis=1) == 0] = 0.0
    return f


# ---------------------------------------------------------------------------
# functional interface

def support(body: Body, w):
    """Support value h(w) and a maximizing boundary point."""
    return body.support(w)


def gauge(body: Body, z):
    return body.gauge(z)


def hstar(body: Body, w):
    """Legendre transform of the squared gauge: h(w)^2 / 4."""
    h, _ = body.support(w)
    return 0.25 * h**2


def hstar_grad(body: Body, w):
    h, g = body.support(w)
    return 0.5 * np.asarray(h)[..., None] * g


def polar(body: Body) -> Body:
    """Closed-form polar body.

    Raises
    ------
    UnsupportedKind
        For p-sums, products and translates.
    """
    if isinstance(body, Ball):
        return Ball(1.0 / body.radius, body.dim)
    if isinstance(body, Ellipsoid):
        return Ellipsoid(4.0 * body._Sinv)
    if isinstance(body, PolytopeV):
        return PolytopeH(body.vertices, np.ones(len(body.vertices)))
    if isinstance(body, PolytopeH):
        return PolytopeV(body.A / body.b[:, None])
    if isinstance(body, Scale):
        return Scale(1.0 / body.factor, polar(body.body))
    if isinstance(body, LinearImage):
        return LinearImage(body._inv.T, polar(body.body))
    raise UnsupportedKind(f"UnsupportedKind: no closed-form polar for {body.kind}")


def smooth(body: Body, eps: float) -> Body:
    """2-sum with an eps-ball: support sqrt(h^2 + eps^2 |w|^2)."""
    if not eps > 0:
        raise SymcapError("smoothing radius must be positive")
    return PSum(2.0, (body, Ball(eps, body.dim)))


def minkowski_sum(a: Body, b: Body) -> Body:
    """Minkowski sum with exact representations where cheap.

    Balls add radii; planar V-polytopes use the hull of pairwise vertex sums;
    anything else is the support-function sum PSum(1, ...).
    """
    if a.dim != b.dim:
        raise UnsupportedSum(f"UnsupportedSum: dimensions {a.dim} and {b.dim}")
    if isinstance(a, Ball) and isinstance(b, Ball):
        return Ball(a.radius + b.radius, a.dim)
    if isinstance(a, PolytopeV) and isinstance(b, PolytopeV) and a.dim == 2:
        pts = (a.vertices[:, None, :] + b.vertices[None, :, :]).reshape(-1, 2)
        hull = ConvexHull(pts)
        return PolytopeV(pts[np.sort(hull.vertices)])
    return PSum(1.0, (a, b))


def tau_invariant(body: Body, tau, samples: int = 512, seed: int = 42) -> bool:
    """Sampled test of h(tau^T w) = h(w); exact for ellipsoids."""
    T = np.asarray(getattr(tau, "matrix", tau), dtype=float)
    if T.shape != (body.dim, body.dim):
        raise DimensionMismatch("DimensionMismatch: involution does not fit the body")
    if isinstance(body, Ellipsoid):
        return bool(np.max(np.abs(T.T @ body.S @ T - body.S)) < 1e-8 * max(1.0, np.abs(body.S).max()))
    W = sphere_directions(body.dim, samples, seed)
    h = body._support(W)[0]
    ht = body._support(W @ T)[0]
    return bool(np.max(np.abs(ht - h) / np.maximum(np.abs(h), _TINY)) < 1e-8)


# ---------------------------------------------------------------------------
# geometric summary

@dataclass(frozen=True)
class GeometricSummary:
    inradius: float
    circumradius: float
    width: float
    mean_width: float
    in_center: list
    circum_center: list
    exact: bool = True

    def to_dict(self) -> dict:
        return {
            "inradius": self.inradius,
            "circumradius": self.circumradius,
            "width": self.width,
            "mean_width": self.mean_width,
            "in_center": list(self.in_center),
            "circum_center": list(self.circum_center),
            "exact": self.exact,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeometricSummary":
        return cls(**d)


def _canonical(body: Body):
    """Reduce affine wrappers to an exact base body plus an offset."""
    if isinstance(body, (Ball, Ellipsoid, PolytopeV)):
        return body, np.zeros(body.dim)
    if isinstance(body, PolytopeH):
        return body._vrep, np.zeros(body.dim)
    if isinstance(body, Scale):
        base, off = _canonical(body.body)
        if base is None:
            return None, None
        return _scaled(base, body.factor), body.factor * off
    if isinstance(body, Translate):
        base, off = _canonical(body.body)
        if base is None:
            return None, None
        return base, off + body.shift
    if isinstance(body, LinearImage):
        base, off = _canonical(body.body)
        if base is None:
            return None, None
        M = body.matrix
        if isinstance(base, PolytopeV):
            return PolytopeV(base.vertices @ M.T), M @ off
        S = base.S if isinstance(base, Ellipsoid) else np.eye(base.dim) * 2.0 / base.radius**2
        Minv = body._inv
        return Ellipsoid(Minv.T @ S @ Minv), M @ off
    return None, None


def _scaled(base: Body, lam: float) -> Body:
    if isinstance(base, Ball):
        return Ball(lam * base.radius, base.dim)
    if isinstance(base, Ellipsoid):
        return Ellipsoid(base.S / lam**2)
    return PolytopeV(lam * base.vertices)


def _chebyshev_center(A: np.ndarray, b: np.ndarray):
    dim = A.shape[1]
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(dim + 1)
    c[-1] = -1.0
    res = linprog(
        c,
        A_ub=np.c_[A, norms],
        b_ub=b,
        bounds=[(None, None)] * dim + [(0, None)],
        method="highs",
    )
    if not res.success:
        raise SymcapError(f"Chebyshev center LP failed: {res.message}")
    return float(res.x[-1]), res.x[:-1]


def _enclosing_ball(V: np.ndarray):
    """Minimum enclosing ball of a point set (epigraph form, SLSQP)."""
    c0 = 0.5 * (V.max(axis=0) + V.min(axis=0))
    r0 = np.max(np.sum((V - c0) ** 2, axis=1))
    x0 = np.r_[c0, r0]
    cons = {
        "type": "ineq",
        "fun": lambda x: x[-1] - np.sum((V - x[:-1]) ** 2, axis=1),
        "jac": lambda x: np.c_[2 * (V - x[:-1]), np.ones(len(V))],
    }
    res = minimize(
        lambda x: x[-1],
        x0,
        jac=lambda x: np.r_[np.zeros(len(x) - 1), 1.0],
        constraints=[cons],
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 500},
    )
    c = res.x[:-1]
    return float(np.sqrt(np.max(np.sum((V - c) ** 2, axis=1)))), c


def _sphere_extreme(fun, dim: int, samples: int, seed: int, sense: int):
    """Minimize (sense = 1) or maximize (sense = -1) a 0-homogeneous function."""
    if dim == 1:
        vals = [fun(np.array([1.0])), fun(np.array([-1.0]))]
        k = int(np.argmin([sense * v for v in vals]))
        return vals[k], np.array([1.0 if k == 0 else -1.0])
    if dim == 2:
        theta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
        U = np.c_[np.cos(theta), np.sin(theta)]
        vals = sense * fun(U)
        k = int(np.argmin(vals))
        step = 2 * np.pi / samples

        def f1(t):
            return sense * fun(np.array([[np.cos(t), np.sin(t)]]))[0]

        res = minimize_scalar(
            f1, bounds=(theta[k] - step, theta[k] + step), method="bounded",
            options={"xatol": 1e-12},
        )
        t = res.x if res.fun <= vals[k] else theta[k]
        u = np.array([np.cos(t), np.sin(t)])
        return float(sense * min(res.fun, vals[k])), u
    U = np.vstack([sphere_directions(dim, samples, seed), np.eye(dim), -np.eye(dim)])
    vals = sense * fun(U)
    best_val, best_u = np.inf, None
    for k in np.argsort(vals)[:5]:
        res = minimize(
            lambda x: sense * fun((x / np.linalg.norm(x))[None])[0],
            U[k],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000},
        )
        if res.fun < best_val:
            best_val, best_u = res.fun, res.x / np.linalg.norm(res.x)
    return float(sense * best_val), best_u


def width(body: Body, samples: int = 4096, seed: int = 42) -> float:
    """min over unit u of h(u) + h(-u)."""

    def breadth(U):
        return body._support(U)[0] + body._support(-U)[0]

    base, _ = _canonical(body)
    if isinstance(base, PolytopeV) and base.dim == 2:
        # a planar polygon attains its width at an edge normal
        A, _ = base.halfspaces
        U = A / np.linalg.norm(A, axis=1, keepdims=True)
        V = base.vertices
        return float(np.min(np.ptp(V @ U.T, axis=0)))
    return _sphere_extreme(breadth, body.dim, samples, seed, sense=1)[0]


def mean_width(body: Body, samples: int = 4096, seed: int = 42) -> float:
    """Average of h over uniformly seeded sphere directions (so M*(B(r)) = r)."""
    U = sphere_directions(body.dim, samples, seed)
    return float(np.mean(body._support(U)[0]))


def geometric_summary(delta: Body, samples: int = 4096, seed: int = 42) -> GeometricSummary:
    """Inradius, circumradius, width and mean width of a body.

    Exact for balls, ellipsoids and polytopes (and affine images of them);
    other kinds fall back to radii about the origin from sampled directions
    and are flagged with ``exact=False``.
    """
    if samples < 100:
        raise SymcapError("geometric_summary needs at least 100 samples")
    base, off = _canonical(delta)
    mw = mean_width(delta, samples, seed)
    if isinstance(base, Ball):
        r = base.radius
        return GeometricSummary(r, r, 2 * r, mw, off.tolist(), off.tolist())
    if isinstance(base, Ellipsoid):
        ax = base.semi_axes
        return GeometricSummary(
            float(ax[0]), float(ax[-1]), float(2 * ax[0]), mw, off.tolist(), off.tolist()
        )
    wd = width(delta, samples, seed)
    if isinstance(base, PolytopeV):
        A, b = base.halfspaces
        r, ci = _chebyshev_center(A, b)
        R, cc = _enclosing_ball(base.vertices)
        return GeometricSummary(r, R, wd, mw, (ci + off).tolist(), (cc + off).tolist())
    h = lambda U: delta._support(U)[0]
    r, _ = _sphere_extreme(h, delta.dim, samples, seed, sense=1)
    R, _ = _sphere_extreme(h, delta.dim, samples, seed, sense=-1)
    zero = [0.0] * delta.dim
    return GeometricSummary(r, R, wd, mw, zero, zero, exact=False)


# ---------------------------------------------------------------------------
# zoo

def square(half: float = 1.0) -> PolytopeV:
    """[-half, half]^2."""
    return PolytopeV(half * np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0]]))


def cross_polytope(dim: int = 2, radius: float = 1.0) -> PolytopeV:
    """{|z|_1 <= radius}."""
    I = np.eye(dim)
    return PolytopeV(radius * np.vstack([I, -I]))


def cube(dim: int, half: float = 1.0) -> PolytopeV:
    grid = np.array(np.meshgrid(*[[-1.0, 1.0]] * dim, indexing="ij")).reshape(dim, -1).T
    return PolytopeV(half * grid)


def regular_polygon(k: int, circumradius: float = 1.0, phase: float = 0.0) -> PolytopeV:
    t = phase + 2 * np.pi * np.arange(k) / k
    return PolytopeV(circumradius * np.c_[np.cos(t), np.sin(t)])


def random_symmetric_polygon(seed: int, k: int = 5) -> PolytopeV:
    """Centrally symmetric polygon with 2k vertices from a seeded generator."""
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0.0, np.pi, k))
    r = rng.uniform(0.6, 1.4, k)
    P = np.c_[r * np.cos(t), r * np.sin(t)]
    pts = np.vstack([P, -P])
    hull = ConvexHull(pts)
    return PolytopeV(pts[np.sort(hull.vertices)])


# ---------------------------------------------------------------------------
# JSON descriptors

def body_from_dict(d: dict) -> Body:
    """Parse a JSON body descriptor (see README for the schema)."""
    if not isinstance(d, dict) or "type" not in d:
        raise SymcapError("body descriptor must be an object with a 'type' field")
    t = d["type"]
    try:
        if t == "ball":
            return Ball(float(d["r"]), int(d["dim"]))
        if t == "ellipsoid":
            if "radii" in d:
                return Ellipsoid.from_radii(d["radii"])
            if "semi_axes" in d:
                return Ellipsoid.from_semi_axes(d["semi_axes"])
            return Ellipsoid(np.array(d["S"], dtype=float))
        if t == "polytope_v":
            return PolytopeV(np.array(d["vertices"], dtype=float))
        if t == "polytope_h":
            return PolytopeH(np.array(d["A"], dtype=float), np.array(d["b"], dtype=float))
        if t == "psum":
            return PSum(float(d["p"]), tuple(body_from_dict(x) for x in d["bodies"]))
        if t == "lagrangian_product":
            return LagrangianProduct(body_from_dict(d["delta"]), body_from_dict(d["lambda"]))
        if t == "symplectic_product":
            return SymplecticProduct(tuple(body_from_dict(x) for x in d["factors"]))
        if t == "translate":
            return Translate(np.array(d["w"], dtype=float), body_from_dict(d["body"]))
        if t == "scale":
            return Scale(float(d["lambda"]), body_from_dict(d["body"]))
        if t == "linear_image":
            return LinearImage(np.array(d["matrix"], dtype=float), body_from_dict(d["body"]))
    except KeyError as exc:
        raise SymcapError(f"body descriptor of type {t!r} is missing field {exc}") from None
    raise SymcapError(f"unknown body type {t!r}")
