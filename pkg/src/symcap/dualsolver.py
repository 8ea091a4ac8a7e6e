"""
Clarke-dual computation of the symmetric EHZ capacity.

Loops are truncated Fourier series

    x(t) = sum_{1 <= |j| <= M} exp(2 pi j t J0) (x_j, 0),    x_j in R^n,

so every loop is mean-zero and satisfies x(1 - t) = tau0 x(t) exactly.  The
capacity is the minimum of the scale-invariant ratio

    F_p(x) = mean_k H*(-J0 x'(t_k))^(p/2) / A(x)^(p/2),    H* = h^2 / 4,

raised to the power 2/p, where A is the symplectic action.  The minimizer,
rescaled and shifted by the Lagrange multiplier a0 in L0, is a brake closed
characteristic on the boundary whose action equals the capacity.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from . import bodies as B
from .errors import NonPositiveAction, NormalizerUnavailable, NotInvariant, NotSymmetric, SymcapError
from .linsymp import (
    Involution,
    SymplecticMap,
    involution_from_spec,
    normalize_involution,
    tau0,
)
from .serialize import dump_curve_csv, rounded

log = logging.getLogger(__name__)

DEFAULT_POLY_EPS = 1e-3
_REJECT = 1e100  # objective value returned for iterates with A <= 0
_STALL_WINDOW = 20
_STALL_RTOL = 1e-12


@dataclass(frozen=True)
class SolveConfig:
    """Discretization and optimizer settings.

    ``smoothing_eps=None`` selects 0 for smooth bodies and 1e-3 otherwise.
    """

    modes: int = 24
    samples: int = 512
    p: float = 2.0
    restarts: int = 16
    seed: int = 0
    max_iters: int = 2000
    grad_tol: float = 1e-9
    smoothing_eps: float | None = None
    threads: int | None = None

    def __post_init__(self):
        if self.modes < 1:
            raise SymcapError("modes must be >= 1")
        if not self.samples > 4 * self.modes:
            raise SymcapError(f"samples ({self.samples}) must exceed 4 * modes ({4 * self.modes})")
        if self.restarts < 1:
            raise SymcapError("restarts must be >= 1")
        if not self.p >= 1:
            raise SymcapError("p must be >= 1")
        if self.smoothing_eps is not None and self.smoothing_eps < 0:
            raise SymcapError("smoothing_eps must be >= 0")

    def replace(self, **changes) -> "SolveConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SolveConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)

    def worker_count(self) -> int:
        if self.threads is not None:
            return max(1, int(self.threads))
        return max(1, int(os.environ.get("SYMCAP_THREADS", "1")))


# ---------------------------------------------------------------------------
# loops

def mode_indices(M: int) -> np.ndarray:
    """Mode numbers j = -M..-1, 1..M in coefficient row order."""
    return np.r_[np.arange(-M, 0), np.arange(1, M + 1)]


@lru_cache(maxsize=32)
def _basis(M: int, N: int):
    js = mode_indices(M)
    t = np.arange(N) / N
    arg = 2 * np.pi * np.outer(t, js)
    return js, np.cos(arg), np.sin(arg)


@dataclass(frozen=True, eq=False)
class SymmetricLoop:
    """Fourier loop with coefficients x_j in L0, rows ordered as mode_indices(M)."""

    coeffs: np.ndarray

    def __post_init__(self):
        X = np.array(self.coeffs, dtype=float)
        if X.ndim != 2 or X.shape[0] % 2:
            raise SymcapError("coefficients must have shape (2M, n)")
        object.__setattr__(self, "coeffs", X)

    @property
    def M(self) -> int:
        return self.coeffs.shape[0] // 2

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    @classmethod
    def single_mode(cls, n: int, M: int, j: int, vec) -> "SymmetricLoop":
        X = np.zeros((2 * M, n))
        X[mode_indices(M) == j] = np.asarray(vec, dtype=float)
        return cls(X)

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        arg = 2 * np.pi * np.outer(t, mode_indices(self.M))
        return np.hstack([np.cos(arg) @ self.coeffs, np.sin(arg) @ self.coeffs])

    def velocity(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        js = mode_indices(self.M)
        arg = 2 * np.pi * np.outer(t, js)
        Y = (2 * np.pi * js)[:, None] * self.coeffs
        return np.hstack([-np.sin(arg) @ Y, np.cos(arg) @ Y])

    def action(self) -> float:
        return action(self)

    def scaled(self, lam: float) -> "SymmetricLoop":
        return SymmetricLoop(lam * self.coeffs)

    def to_dict(self) -> dict:
        return {"modes": mode_indices(self.M).tolist(), "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SymmetricLoop":
        return cls(np.array(d["coeffs"], dtype=float))


def _action(X: np.ndarray, js: np.ndarray) -> float:
    return float(np.pi * np.sum(js * np.sum(X**2, axis=1)))


def action(loop: SymmetricLoop) -> float:
    """A(x) = pi sum_j j |x_j|^2."""
    return _action(loop.coeffs, mode_indices(loop.M))


def _dual_velocity(X: np.ndarray, basis) -> np.ndarray:
    """-J0 x'(t_k) = sum_j 2 pi j exp(2 pi j t J0) (x_j, 0) on the grid."""
    js, C, S = basis
    Y = (2 * np.pi * js)[:, None] * X
    return np.hstack([C @ Y, S @ Y])


def _objective(X: np.ndarray, body: B.Body, p: float, basis, want_grad: bool = True):
    js, C, S = basis
    A = _action(X, js)
    if not A > 0:
        raise NonPositiveAction(f"NonPositiveAction: A = {A:.3e}")
    W = _dual_velocity(X, basis)
    h, g = body._support(W)
    h = np.maximum(h, 0.0)
    N = len(h)
    scale = 2.0**-p
    I = scale * np.mean(h**p)
    F = I / A ** (p / 2)
    if not want_grad:
        return F, None
    n = X.shape[1]
    dI_dW = (scale * p / N) * (h ** (p - 1))[:, None] * g
    dI = (2 * np.pi * js)[:, None] * (C.T @ dI_dW[:, :n] + S.T @ dI_dW[:, n:])
    dA = (2 * np.pi * js)[:, None] * X
    grad = (dI - (p / 2) * (I / A) * dA) / A ** (p / 2)
    return F, grad


def dual_objective(body: B.Body, loop: SymmetricLoop, p: float = 2.0, N_t: int = 512) -> float:
    """Scale-invariant dual ratio F_p of a loop; capacity estimate is F_p^(2/p)."""
    return _objective(loop.coeffs, body, p, _basis(loop.M, N_t), want_grad=False)[0]


def dual_gradient(body: B.Body, loop: SymmetricLoop, p: float = 2.0, N_t: int = 512) -> np.ndarray:
    """Gradient of F_p with respect to the coefficients, shape (2M, n)."""
    return _objective(loop.coeffs, body, p, _basis(loop.M, N_t))[1]


# ---------------------------------------------------------------------------
# optimization

@dataclass
class _RestartOutcome:
    index: int
    X: np.ndarray
    objective: float
    iterations: int
    status: str

    @property
    def converged(self) -> bool:
        return self.status != "max_iters"


def _starting_loops(n: int, M: int, count: int, seed: int) -> list[np.ndarray]:
    js = mode_indices(M)
    starts = []
    for i in range(min(n, count)):
        X = np.zeros((2 * M, n))
        X[js == 1, i] = 1.0
        starts.append(X)
    rng = np.random.default_rng(seed)
    low = np.abs(js) <= 3
    weight = 1.0 / np.abs(js[low])
    while len(starts) < count:
        X = np.zeros((2 * M, n))
        X[low] = weight[:, None] * rng.normal(size=(low.sum(), n))
        A = _action(X, js)
        if A < 0:
            X = X[::-1].copy()  # j -> -j reverses orientation
        elif A == 0:
            X[js == 1, 0] += 1.0
        starts.append(X)
    return starts


def _minimize(body: B.Body, X0: np.ndarray, p: float, basis, config: SolveConfig, index: int) -> _RestartOutcome:
    shape = X0.shape
    history: list[float] = []
    status = {"value": None}

    def fun(z):
        try:
            F, G = _objective(z.reshape(shape), body, p, basis)
        except NonPositiveAction:
            return _REJECT, np.zeros_like(z)
        return F, G.ravel()

    def callback(intermediate_result):
        history.append(float(intermediate_result.fun))
        if len(history) > _STALL_WINDOW:
            old, new = history[-_STALL_WINDOW - 1], history[-1]
            if old - new <= _STALL_RTOL * abs(new):
                status["value"] = "stalled"
                raise StopIteration

    res = minimize(
        fun,
        X0.ravel(),
        jac=True,
        method="BFGS",
        callback=callback,
        options={"maxiter": config.max_iters, "gtol": config.grad_tol},
    )
    if status["value"] is None:
        if res.status == 0:
            status["value"] = "gradient"
        elif res.status == 1:
            status["value"] = "max_iters"
        else:
            status["value"] = "linesearch"
    X = res.x.reshape(shape)
    F = float(res.fun)
    if F >= _REJECT:
        F = np.inf
    return _RestartOutcome(index, X, F, int(res.nit), status["value"])


def _multistart(body: B.Body, starts: list[np.ndarray], config: SolveConfig, basis) -> list[_RestartOutcome]:
    jobs = list(enumerate(starts))

    def run(job):
        k, X0 = job
        return _minimize(body, X0, config.p, basis, config, k)

    workers = min(config.worker_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, jobs))
    else:
        outcomes = [run(j) for j in jobs]
    return outcomes


def _best(outcomes: list[_RestartOutcome]) -> _RestartOutcome:
    # min by value, ties by restart index
    return min(outcomes, key=lambda o: (o.objective, o.index))


# ---------------------------------------------------------------------------
# carriers and residuals

def spectral_derivative(X: np.ndarray) -> np.ndarray:
    """d/dt of samples of a 1-periodic curve on the uniform grid t_k = k/N."""
    N = X.shape[0]
    F = np.fft.fft(X, axis=0)
    k = np.fft.fftfreq(N, d=1.0 / N)
    if N % 2 == 0:
        k[N // 2] = 0.0
    return np.real(np.fft.ifft(2j * np.pi * k[:, None] * F, axis=0))


def sampled_action(X: np.ndarray) -> float:
    """1/2 integral of <-J0 x', x> over [0, 1] from uniform periodic samples."""
    n = X.shape[1] // 2
    V = spectral_derivative(X)
    mJV = np.hstack([V[:, n:], -V[:, :n]])  # -J0 (a, b) = (b, -a)
    return 0.5 * float(np.mean(np.einsum("ij,ij->i", mJV, X)))


def extract_carrier(body: B.Body, loop: SymmetricLoop, p: float = 2.0, N_t: int = 512,
                    support_fit: bool | None = None):
    """Recover (capacity, a0, carrier samples, off-L0 residual) from a minimizer.

    The loop is normalized to unit action.  With rho the subgradient of
    (H*)^(p/2) along -J0 u', the multiplier identity rho - (p/2) mu u = a0
    holds pointwise, so a0 is the grid average of rho.  At kinks of h the
    selected subgradient is arbitrary within a face and the average is
    biased; there (``support_fit``, default: body not smooth) a0 is instead
    the least-squares solution of the support-plane contact conditions
    <x*_k, w_k> = h(w_k).  The carrier is sqrt(c) u + (2/p) c^((1-p)/2) a0.
    """
    basis = _basis(loop.M, N_t)
    A = _action(loop.coeffs, basis[0])
    if not A > 0:
        raise NonPositiveAction(f"NonPositiveAction: A = {A:.3e}")
    if support_fit is None:
        support_fit = not body.is_smooth
    u = loop.coeffs / np.sqrt(A)
    W = _dual_velocity(u, basis)
    h, g = body._support(W)
    h = np.maximum(h, 0.0)
    mu = 2.0**-p * float(np.mean(h**p))
    c = mu ** (2.0 / p)
    rho = (p * 2.0**-p) * (h ** (p - 1))[:, None] * g
    js, C, S = basis
    U = np.hstack([C @ u, S @ u])
    n = loop.n
    kappa = (2.0 / p) * c ** ((1.0 - p) / 2.0)
    a0_full = rho.mean(axis=0)
    off_axis = float(np.linalg.norm(a0_full[n:]))
    a0 = np.zeros(2 * n)
    if support_fit:
        # x*_k must touch the support plane with normal w_k:
        # <sqrt(c) u_k + kappa a0, w_k> = h(w_k), linear in a0 = (a, 0)
        # ridge toward the averaged estimate pins directions no normal sees
        Mq = kappa * W[:, :n]
        rhs = h - np.sqrt(c) * np.einsum("ij,ij->i", U, W)
        G = Mq.T @ Mq
        delta = 1e-6 * np.trace(G) / n
        a0[:n] = np.linalg.solve(G + delta * np.eye(n), Mq.T @ rhs + delta * a0_full[:n])
    else:
        a0[:n] = a0_full[:n]
    carrier = np.sqrt(c) * U + (2.0 / p) * c ** ((1.0 - p) / 2.0) * a0
    return c, a0, carrier, off_axis, SymmetricLoop(u)


def residuals(body: B.Body, tau, carrier: np.ndarray, capacity: float) -> dict:
    """Boundary, brake-symmetry and action residuals of sampled carrier data."""
    T = np.asarray(getattr(tau, "matrix", tau), dtype=float)
    N = carrier.shape[0]
    boundary = float(np.max(np.abs(body.gauge(carrier) - 1.0)))
    mirror = carrier[(-np.arange(N)) % N]  # samples at 1 - t_k
    symmetry = float(np.max(np.linalg.norm(mirror - carrier @ T.T, axis=1)))
    act = abs(sampled_action(carrier) - capacity) / capacity
    return {"boundary": boundary, "symmetry": symmetry, "action": float(act)}


def legendre_residual(body: B.Body, carrier: np.ndarray, capacity: float) -> float:
    """max_k |H(x) + H*(xi) - <x, xi>| / <x, xi> with xi = -J0 x' / c and H = j^2."""
    n = carrier.shape[1] // 2
    V = spectral_derivative(carrier)
    xi = np.hstack([V[:, n:], -V[:, :n]]) / capacity
    H = body.gauge(carrier) ** 2
    Hs = 0.25 * body._support(xi)[0] ** 2
    pair = np.einsum("ij,ij->i", carrier, xi)
    return float(np.max(np.abs(H + Hs - pair) / np.abs(pair)))


# ---------------------------------------------------------------------------
# capacity

@dataclass(eq=False)
class CapacityResult:
    capacity: float
    loop: SymmetricLoop
    a0: np.ndarray
    carrier: np.ndarray
    residuals: dict
    restarts: list
    converged: bool
    tau: np.ndarray
    psi: np.ndarray
    config: SolveConfig
    multiplier: float
    smoothing: dict = field(default_factory=dict)

    @property
    def no_convergence(self) -> bool:
        return not self.converged

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.carrier.shape[0]) / self.carrier.shape[0]

    def to_dict(self) -> dict:
        return rounded(
            {
                "capacity": self.capacity,
                "converged": self.converged,
                "a0": self.a0,
                "multiplier": self.multiplier,
                "residuals": self.residuals,
                "restarts": self.restarts,
                "smoothing": self.smoothing,
                "tau": self.tau,
                "psi": self.psi,
                "config": self.config.to_dict(),
                "loop": self.loop.to_dict(),
                "carrier": self.carrier,
            }
        )

    @classmethod
    def from_dict(cls, d: dict) -> "CapacityResult":
        return cls(
            capacity=d["capacity"],
            loop=SymmetricLoop.from_dict(d["loop"]),
            a0=np.array(d["a0"], dtype=float),
            carrier=np.array(d["carrier"], dtype=float),
            residuals=dict(d["residuals"]),
            restarts=list(d["restarts"]),
            converged=d["converged"],
            tau=np.array(d["tau"], dtype=float),
            psi=np.array(d["psi"], dtype=float),
            config=SolveConfig.from_dict(d["config"]),
            multiplier=d["multiplier"],
            smoothing=dict(d["smoothing"]),
        )

    def write_carrier_csv(self, path):
        return dump_curve_csv(self.times, self.carrier, path)


def _normalizer(tau: Involution, psi) -> np.ndarray:
    if psi is not None:
        P = np.asarray(getattr(psi, "matrix", psi), dtype=float)
        SymplecticMap(tau.n, P)  # validates symplecticity
        if np.max(np.abs(P @ tau.matrix - tau0(tau.n) @ P)) >= 1e-10:
            raise NormalizerUnavailable("supplied Psi does not satisfy Psi tau = tau0 Psi")
        return P
    if tau.is_canonical():
        return np.eye(2 * tau.n)
    try:
        return normalize_involution(tau).matrix
    except NotSymmetric:
        raise NormalizerUnavailable(
            "NormalizerUnavailable: non-symmetric tau requires an explicit normalizer Psi"
        ) from None


def _solve_stage(body, config, basis, starts):
    outcomes = _multistart(body, starts, config, basis)
    return outcomes, _best(outcomes)


def pad_modes(coeffs: np.ndarray, M: int) -> np.ndarray:
    """Embed coefficients of a lower-mode loop into a loop with M modes."""
    X = np.asarray(coeffs, dtype=float)
    m = X.shape[0] // 2
    if m > M:
        raise SymcapError("cannot pad to fewer modes")
    out = np.zeros((2 * M, X.shape[1]))
    out[M - m : M + m] = X
    return out


def compute_capacity(body: B.Body, tau="tau0", config: SolveConfig | None = None, psi=None,
                     starts=None) -> CapacityResult:
    """Symmetric EHZ capacity of a tau-invariant convex body with 0 inside.

    Parameters
    ----------
    body : Body
    tau : str, array or Involution
        "tau0", "tauhat0", or an explicit anti-symplectic involution.
    config : SolveConfig, optional
    psi : array, optional
        Symplectic normalizer with psi tau = tau0 psi; required when tau is
        not Euclidean-symmetric.
    starts : list of arrays, optional
        Initial coefficient arrays (normalized coordinates, padded to
        ``config.modes``) replacing the generated multistart set.

    Returns
    -------
    CapacityResult
        ``no_convergence`` is set when every restart exhausted max_iters.
    """
    config = config or SolveConfig()
    if body.dim % 2:
        raise SymcapError("capacity needs an even-dimensional body")
    n = body.dim // 2
    inv = involution_from_spec(tau, n)
    if inv.n != n:
        raise SymcapError("involution does not fit the body")
    if not B.tau_invariant(body, inv):
        raise NotInvariant("NotInvariant: body is not tau-invariant")
    P = _normalizer(inv, psi)
    work = body if np.array_equal(P, np.eye(2 * n)) else B.LinearImage(P, body)

    eps = config.smoothing_eps
    if eps is None:
        eps = 0.0 if work.is_smooth else DEFAULT_POLY_EPS
    basis = _basis(config.modes, config.samples)
    if starts is None:
        starts = _starting_loops(n, config.modes, config.restarts, config.seed)
    else:
        starts = [pad_modes(X, config.modes) for X in starts]

    smoothing: dict = {"eps": eps}
    if eps > 0:
        first, best1 = _solve_stage(B.smooth(work, eps), config, basis, starts)
        value1 = best1.objective ** (2.0 / config.p)
        # warm-start the eps/2 solve from the three best eps minimizers
        ranked = sorted(first, key=lambda o: (o.objective, o.index))[:3]
        solved_body = B.smooth(work, eps / 2)
        second = _multistart(solved_body, [o.X for o in ranked], config, basis)
        best = _best(second)
        value2 = best.objective ** (2.0 / config.p)
        delta = abs(value2 - value1)
        smoothing.update(
            value_eps=value1,
            value_half_eps=value2,
            bracket=[value2 - delta, value2],
        )
        outcomes = first
        converged = any(o.converged for o in first) and any(o.converged for o in second)
    else:
        solved_body = work
        outcomes, best = _solve_stage(work, config, basis, starts)
        converged = any(o.converged for o in outcomes)

    if not np.isfinite(best.objective):
        raise SymcapError("all restarts were rejected (non-positive action)")
    loop = SymmetricLoop(best.X)
    c, a0, carrier_work, off_axis, u = extract_carrier(solved_body, loop, config.p, config.samples)
    Pinv = np.linalg.inv(P)
    carrier = carrier_work @ Pinv.T
    a0_orig = Pinv @ a0
    _, grad = _objective(u.coeffs, solved_body, config.p, basis)
    res = residuals(body, inv, carrier, c)
    res["gradient_norm"] = float(np.linalg.norm(grad))
    res["a0_off_l0"] = off_axis
    if solved_body.is_smooth:
        res["legendre"] = legendre_residual(solved_body, carrier_work, c)
    mu = c ** (config.p / 2.0)
    table = [
        {
            "index": o.index,
            "objective": o.objective,
            "capacity": o.objective ** (2.0 / config.p) if np.isfinite(o.objective) else None,
            "iterations": o.iterations,
            "status": o.status,
        }
        for o in outcomes
    ]
    if not converged:
        log.warning("no restart met the convergence criteria within %d iterations", config.max_iters)
    return CapacityResult(
        capacity=float(c),
        loop=u,
        a0=a0_orig,
        carrier=carrier,
        residuals=res,
        restarts=table,
        converged=converged,
        tau=inv.matrix,
        psi=P,
        config=config,
        multiplier=-config.p * mu / 2.0,
        smoothing=smoothing,
    )
