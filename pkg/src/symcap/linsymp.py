"""
Linear symplectic and anti-symplectic algebra on R^{2n}.

Coordinates are (x_1..x_n, y_1..y_n) and the complex structure is
J0(x, y) = (-y, x).  The canonical involution is tau0(x, y) = (x, -y)
with fixed space L0 = {y = 0}; tauhat0(x, y) = (-x, y).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateBasis,
    NotAntiSymplectic,
    NotCommuting,
    NotInvolutive,
    NotSPD,
    NotSymmetric,
    SymcapError,
    WrongFixedDimension,
)

# type-invariant tolerances; fixed, not configurable
INVOLUTION_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10
WILLIAMSON_TOL = 1e-8
COMMUTE_TOL = 1e-12
BREAKDOWN_TOL = 1e-12


def J0(n: int) -> np.ndarray:
    """Standard complex structure [[0, -I], [I, 0]] on R^{2n}."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def tau0(n: int) -> np.ndarray:
    return np.diag(np.r_[np.ones(n), -np.ones(n)])


def tauhat0(n: int) -> np.ndarray:
    return np.diag(np.r_[-np.ones(n), np.ones(n)])


def _half_dim(matrix: np.ndarray) -> int:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
        raise WrongFixedDimension(
            f"expected a square matrix of even size, got shape {matrix.shape}"
        )
    return matrix.shape[0] // 2


def _sup(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def mgs(vectors: np.ndarray, tol: float = BREAKDOWN_TOL) -> np.ndarray:
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Columns whose residual norm falls below `tol` (relative to their input
    norm) are dropped.  Returns an array with orthonormal columns.
    """
    basis: list[np.ndarray] = []
    for col in np.asarray(vectors, dtype=float).T:
        ref = np.linalg.norm(col)
        if ref == 0.0:
            continue
        v = col.copy()
        for _ in range(2):
            for b in basis:
                v -= (b @ v) * b
        nv = np.linalg.norm(v)
        if nv <= tol * max(ref, 1.0):
            continue
        basis.append(v / nv)
    if not basis:
        return np.zeros((vectors.shape[0], 0))
    return np.stack(basis, axis=1)


@dataclass(frozen=True)
class Involution:
    """A validated linear anti-symplectic involution.

    Attributes
    ----------
    n : int
        Half-dimension.
    matrix : ndarray, shape (2n, 2n)
    fixed_basis : ndarray, shape (2n, n)
        Orthonormal basis of Fix(tau), one vector per column.
    symmetric : bool
        Whether tau is Euclidean-symmetric (tau^T = tau).
    """

    n: int
    matrix: np.ndarray = field(repr=False)
    fixed_basis: np.ndarray = field(repr=False)
    symmetric: bool

    def is_canonical(self) -> bool:
        return bool(np.array_equal(self.matrix, tau0(self.n)))

    def to_list(self) -> list[list[float]]:
        return self.matrix.tolist()


@dataclass(frozen=True)
class SymplecticMap:
    n: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        res = symplectic_residual(self.matrix)
        if res >= SYMPLECTIC_TOL:
            raise SymcapError(f"matrix is not symplectic (residual {res:.3e})")

    @property
    def inverse(self) -> np.ndarray:
        # Psi^{-1} = -J0 Psi^T J0 for symplectic Psi
        J = J0(self.n)
        return -J @ self.matrix.T @ J


@dataclass(frozen=True)
class WilliamsonForm:
    """Symplectic normal form of a tau0-commuting SPD quadratic form.

    The quadratic form is q(z) = 1/2 <S z, z>, whose unit sublevel set is
    the ellipsoid E(q).  `psi` satisfies
    psi^T S psi = 2 diag(1/r_1^2, ..., 1/r_n^2, 1/r_1^2, ..., 1/r_n^2),
    so that psi^{-1} E(q) = {sum (x_j^2 + y_j^2) / r_j^2 < 1}.
    """

    psi: SymplecticMap
    radii: np.ndarray

    def normal_matrix(self) -> np.ndarray:
        d = 2.0 / self.radii**2
        return np.diag(np.r_[d, d])


def symplectic_residual(psi: np.ndarray) -> float:
    n = _half_dim(psi)
    J = J0(n)
    return _sup(psi.T @ J @ psi - J)


def validate_involution(matrix) -> Involution:
    """Check that `matrix` is a linear anti-symplectic involution.

    Raises
    ------
    NotInvolutive, NotAntiSymplectic, WrongFixedDimension
    """
    tau = np.array(matrix, dtype=float)
    n = _half_dim(tau)
    I = np.eye(2 * n)
    if _sup(tau @ tau - I) >= INVOLUTION_TOL:
        raise NotInvolutive("NotInvolutive: tau^2 != I")
    J = J0(n)
    if _sup(tau.T @ J @ tau + J) >= INVOLUTION_TOL:
        raise NotAntiSymplectic("NotAntiSymplectic: tau^T J0 tau != -J0")
    # Fix(tau) = ker(tau - I)
    _, s, vt = np.linalg.svd(tau - I)
    null = vt[s < 1e-8 * max(1.0, s.max())].T
    if null.shape[1] != n:
        raise WrongFixedDimension(
            f"WrongFixedDimension: dim Fix(tau) = {null.shape[1]}, expected {n}"
        )
    basis = mgs(null)
    if basis.shape[1] != n or _sup(tau @ basis - basis) >= INVOLUTION_TOL:
        raise WrongFixedDimension("WrongFixedDimension: fixed basis is degenerate")
    symmetric = _sup(tau - tau.T) < INVOLUTION_TOL
    return Involution(n=n, matrix=tau, fixed_basis=basis, symmetric=bool(symmetric))


def involution_from_spec(spec, n: int | None = None) -> Involution:
    """Build an Involution from a keyword ("tau0", "tauhat0") or a matrix."""
    if isinstance(spec, Involution):
        return spec
    if isinstance(spec, str):
        if n is None:
            raise SymcapError("half-dimension required for keyword involutions")
        if spec == "tau0":
            return validate_involution(tau0(n))
        if spec == "tauhat0":
            return validate_involution(tauhat0(n))
        raise SymcapError(f"unknown involution keyword {spec!r}")
    return validate_involution(np.asarray(spec, dtype=float))


def normalize_involution(tau: Involution) -> SymplecticMap:
    """Return a symplectic Psi with Psi tau = tau0 Psi.

    Only Euclidean-symmetric involutions are supported.  An orthonormal
    basis u_1..u_n of Fix(tau) is completed by v_j = J0 u_j; Psi sends u_j
    to e_j and v_j to f_j, and is orthogonal.
    """
    if not tau.symmetric:
        raise NotSymmetric("NotSymmetric: tau^T != tau; supply a normalizer explicitly")
    n = tau.n
    projector = 0.5 * (tau.matrix + np.eye(2 * n))
    u = mgs(projector)
    if u.shape[1] != n:
        raise DegenerateBasis(
            f"DegenerateBasis: Gram-Schmidt produced {u.shape[1]} of {n} vectors"
        )
    frame = np.hstack([u, J0(n) @ u])
    if _sup(frame.T @ frame - np.eye(2 * n)) >= SYMPLECTIC_TOL:
        raise DegenerateBasis("DegenerateBasis: completed frame is not orthonormal")
    return SymplecticMap(n=n, matrix=frame.T.copy())


def sym_williamson(S) -> WilliamsonForm:
    """tau0-commuting Williamson diagonalization of an SPD matrix.

    For S = diag(S11, S22) the map Psi = diag(P, P^{-T}) is symplectic and
    commutes with tau0.  P comes from the simultaneous congruence of S11 and
    S22^{-1}: with Q^T S11 Q = diag(lam) and Q^T S22^{-1} Q = I, the choice
    P = Q diag(lam^{-1/4}) gives P^T S11 P = diag(sqrt(lam)) and
    P^{-1} S22 P^{-T} = diag(sqrt(lam)).
    """
    S = np.array(S, dtype=float)
    n = _half_dim(S)
    if _sup(S - S.T) > 1e-12 * max(1.0, _sup(S)):
        raise NotSPD("NotSPD: matrix is not symmetric")
    S = 0.5 * (S + S.T)
    if np.linalg.eigvalsh(S).min() <= 0:
        raise NotSPD("NotSPD: matrix is not positive definite")
    if max(_sup(S[:n, n:]), _sup(S[n:, :n])) > COMMUTE_TOL:
        raise NotCommuting("NotCommuting: S has nonzero off-diagonal blocks")
    S11, S22 = S[:n, :n], S[n:, n:]
    S22inv = np.linalg.inv(S22)
    S22inv = 0.5 * (S22inv + S22inv.T)
    lam, Q = scipy.linalg.eigh(S11, S22inv)
    d = np.sqrt(lam)  # symplectic eigenvalues
    order = np.argsort(-d, kind="stable")  # ascending radii
    d, lam, Q = d[order], lam[order], Q[:, order]
    P = Q * lam ** (-0.25)
    psi = scipy.linalg.block_diag(P, np.linalg.inv(P).T)
    radii = np.sqrt(2.0 / d)
    form = WilliamsonForm(psi=SymplecticMap(n=n, matrix=psi), radii=radii)
    if _sup(psi.T @ S @ psi - form.normal_matrix()) >= WILLIAMSON_TOL * max(1.0, d.max()):
        raise SymcapError("Williamson normal form did not reach tolerance")
    return form


def random_orthosymplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of Sp(2n) cap O(2n) = U(n)."""
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    A, B = Q.real, Q.imag
    return np.block([[A, -B], [B, A]])
