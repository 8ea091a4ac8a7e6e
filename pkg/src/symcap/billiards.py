"""
Minkowski billiards read off capacity carriers of Lagrangian products.

A carrier on the boundary of Delta x Lambda splits as z(t) = (q(t), p(t)).
Bounces are the times where both q and p sit on their boundaries; the
h_Lambda-length of the closed bounce polygon equals the action.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import bodies as B
from .dualsolver import CapacityResult, SolveConfig, compute_capacity
from .errors import EmptyCarrier, NoBoundaryContact, TooFewPoints

BOUNCE_TOL = 0.02
CLUSTER_GAP = 3
GLIDING_FRACTION = 0.95
BRAKE_TOL = 1e-2


@dataclass
class BilliardTrajectory:
    bounce_points: np.ndarray
    length: float
    classification: str
    brake: bool
    bounce_indices: list = field(default_factory=list)
    gauge_residual: float = 0.0
    source: str = "carrier"

    @property
    def bounces(self) -> int:
        return len(self.bounce_points)

    def to_dict(self) -> dict:
        return {
            "bounces": np.asarray(self.bounce_points).tolist(),
            "length": self.length,
            "class": self.classification,
            "brake": self.brake,
            "bounce_indices": list(self.bounce_indices),
            "gauge_residual": self.gauge_residual,
            "source": self.source,
        }


@dataclass
class ZetaReport:
    zeta: float
    bounds: dict
    trajectory: BilliardTrajectory | None
    result: CapacityResult

    def to_dict(self) -> dict:
        return {
            "zeta": self.zeta,
            "bounds": dict(self.bounds),
            "trajectory": None if self.trajectory is None else self.trajectory.to_dict(),
            "converged": self.result.converged,
            "residuals": self.result.residuals,
            "smoothing": self.result.smoothing,
        }


def billiard_length(bounce_points, lam: B.Body) -> float:
    """Cyclic h_Lambda-length sum_j h_Lambda(q_j - q_{j+1})."""
    Q = np.atleast_2d(np.asarray(bounce_points, dtype=float))
    if len(Q) < 2:
        raise TooFewPoints("TooFewPoints: a closed billiard needs at least two bounce points")
    chords = Q - np.roll(Q, -1, axis=0)
    return float(np.sum(lam.support(chords)[0]))


def _cyclic_runs(mask: np.ndarray, gap: int) -> list[np.ndarray]:
    """Group indices of a cyclic boolean mask; runs separated by < gap misses merge."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    N = mask.size
    if idx.size == N:
        return [idx]
    # start scanning just after the largest hole so no run wraps the seam
    holes = np.diff(np.r_[idx, idx[0] + N])
    start = (int(np.argmax(holes)) + 1) % idx.size
    order = np.r_[idx[start:], idx[:start] + N]
    runs, current = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if b - a >= gap:
            runs.append(np.array(current) % N)
            current = []
        current.append(b)
    runs.append(np.array(current) % N)
    return runs


def _split_run(run, q, gq, dist, dip):
    """Split a cluster at an interior dip of gauge_Delta separating two distinct wall points.

    A chord running close to the boundary stays inside the tolerance band
    between two reflections; the dip marks where it leaves the wall.
    """
    if len(run) < 3:
        return [run]
    k = 1 + int(np.argmin(gq[run[1:-1]]))
    left, right = run[: k + 1], run[k:]
    il, ir = left[np.argmax(gq[left])], right[np.argmax(gq[right])]
    if gq[run[k]] < min(gq[il], gq[ir]) - dip and np.linalg.norm(q[il] - q[ir]) > dist:
        return _split_run(run[:k], q, gq, dist, dip) + _split_run(run[k:], q, gq, dist, dip)
    return [run]


def _merge_repeated(runs, q, gq, tol):
    """Join cyclically adjacent clusters sitting on the same boundary point.

    While q rests on the wall and p crosses Lambda, the bounce set is met on
    entry and on exit; both visits belong to one reflection.
    """
    runs = list(runs)
    rep = lambda r: q[r[np.argmax(gq[r])]]
    merged = True
    while merged and len(runs) > 1:
        merged = False
        for i in range(len(runs)):
            j = (i + 1) % len(runs)
            if np.linalg.norm(rep(runs[i]) - rep(runs[j])) <= tol:
                joined = np.r_[runs[i], runs[j]]
                runs[i] = joined
                del runs[j]
                merged = True
                break
    return runs


def _reversal_symmetric(Q: np.ndarray, tol: float) -> bool:
    m = len(Q)
    R = Q[::-1]
    for s in range(m):
        if np.max(np.linalg.norm(np.roll(R, s, axis=0) - Q, axis=1)) < tol:
            return True
    return False


def project_carrier(carrier, delta: B.Body, lam: B.Body, bounce_tol: float = BOUNCE_TOL) -> BilliardTrajectory:
    """Read a billiard trajectory off a sampled carrier on the boundary of delta x lam.

    Parameters
    ----------
    carrier : array, shape (N, 2n)
        Uniform samples of a closed curve, coordinates (q, p).
    delta, lam : Body
        Table and momentum body in R^n.
    bounce_tol : float
        A sample is a bounce when both gauges exceed 1 - bounce_tol.

    Returns
    -------
    BilliardTrajectory
    """
    Z = np.asarray(carrier, dtype=float)
    if Z.ndim != 2 or Z.shape[0] == 0:
        raise EmptyCarrier("EmptyCarrier: no carrier samples")
    n = delta.dim
    q, p = Z[:, :n], Z[:, n:]
    gq, gp = delta.gauge(q), lam.gauge(p)
    mask = (gq > 1 - bounce_tol) & (gp > 1 - bounce_tol)
    if not mask.any():
        raise NoBoundaryContact("NoBoundaryContact: carrier never meets the boundary of delta x lambda")
    same = 2 * bounce_tol * float(np.max(np.abs(q)))
    runs = [piece for r in _cyclic_runs(mask, CLUSTER_GAP) for piece in _split_run(r, q, gq, same, bounce_tol / 4)]
    runs = _merge_repeated(runs, q, gq, same)
    reps = [int(r[np.argmax(gq[r])]) for r in runs]
    Q = q[reps]
    if mask.mean() > GLIDING_FRACTION:
        kind = "gliding"
    elif len(runs) <= 2 * n:
        kind = "proper"
    else:
        kind = "mixed"
    length = billiard_length(Q, lam) if len(Q) >= 2 else 0.0
    return BilliardTrajectory(
        bounce_points=Q,
        length=length,
        classification=kind,
        brake=_reversal_symmetric(Q, BRAKE_TOL),
        bounce_indices=reps,
        gauge_residual=float(np.max(np.abs(gq[reps] - 1.0))),
    )


def _is_unit_ball(body: B.Body) -> bool:
    return isinstance(body, B.Ball) and abs(body.radius - 1.0) < 1e-12


def _trajectory(result, delta, lam):
    try:
        return project_carrier(result.carrier, delta, lam)
    except NoBoundaryContact:
        return None


def zeta(delta: B.Body, lam: B.Body, tau="tau0", config: SolveConfig | None = None,
         max_modes: int = 96) -> ZetaReport:
    """zeta_Lambda^tau(Delta) = c_EHZ,tau(Delta x Lambda) with geometric bounds.

    The width and 2(n+1) r bounds are attached only when Lambda is the
    Euclidean unit ball, where they are known to hold.  When no billiard
    can be read off the carrier, the mode count is doubled (up to
    `max_modes`) and the solve is warm-started from the previous minimizer;
    corners of product carriers need many modes to reach the boundary.
    """
    config = config or SolveConfig()
    body = B.LagrangianProduct(delta, lam)
    result = compute_capacity(body, tau, config)
    traj = _trajectory(result, delta, lam)
    while (traj is None or traj.bounces < 2) and 2 * result.config.modes <= max_modes:
        M = 2 * result.config.modes
        finer = result.config.replace(modes=M, samples=max(result.config.samples, 16 * M), restarts=1)
        result = compute_capacity(body, tau, finer, starts=[result.loop.coeffs])
        traj = _trajectory(result, delta, lam)
    geo = B.geometric_summary(delta)
    n = delta.dim
    bounds = {"four_r": 4 * geo.inradius, "four_R": 4 * geo.circumradius}
    if _is_unit_ball(lam):
        bounds["two_width"] = 2 * geo.width
        bounds["two_np1_r"] = 2 * (n + 1) * geo.inradius
    return ZetaReport(zeta=result.capacity, bounds=bounds, trajectory=traj, result=result)


def bouncing_ball_oracle(delta: B.Body, lam: B.Body, samples: int = 720, seed: int = 42):
    """Shortest width-type 2-bounce candidate; an upper bound for zeta only.

    For a unit direction u the chord between the two support planes normal
    to u has length w(u) = h(u) + h(-u) and costs
    h_Lambda(w u) + h_Lambda(-w u).

    Returns
    -------
    length : float
    endpoints : ndarray, shape (2, n)
        Support points of delta in directions u and -u.
    """
    n = delta.dim

    def cost(U):
        U = np.atleast_2d(U)
        w = delta.support(U)[0] + delta.support(-U)[0]
        V = w[:, None] * U
        return lam.support(V)[0] + lam.support(-V)[0]

    if n == 2:
        th = np.linspace(0, np.pi, samples, endpoint=False)
        vals = cost(np.c_[np.cos(th), np.sin(th)])
        k = int(np.argmin(vals))
        step = np.pi / samples
        res = minimize_scalar(
            lambda a: cost(np.array([np.cos(a), np.sin(a)]))[0],
            bounds=(th[k] - step, th[k] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = min((vals[k], th[k]), (res.fun, res.x))
        u = np.array([np.cos(best[1]), np.sin(best[1])])
    else:
        U = B.sphere_directions(n, samples * n, seed)
        vals = cost(U)
        u = U[int(np.argmin(vals))]
        for step in 0.5 ** np.arange(2, 30):
            trial = [u]
            for i in range(n):
                for s in (-1, 1):
                    v = u.copy()
                    v[i] += s * step
                    trial.append(v / np.linalg.norm(v))
            trial = np.array(trial)
            u = trial[int(np.argmin(cost(trial)))]
    length = float(cost(u)[0])
    ends = np.vstack([delta.support(u)[1], delta.support(-u)[1]])
    return length, ends
