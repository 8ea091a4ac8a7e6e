"""
Verifiers for capacity identities and inequalities.

Every check returns one or more CheckReport records.  A report compares
two sides with an absolute tolerance ``tol = rel_tol * max(|lhs|, |rhs|)``:
inequalities ``lhs <= rhs`` have slack ``rhs - lhs`` and equalities have
slack ``-|lhs - rhs|``; a report passes iff ``slack >= -tol``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import bodies as B
from .billiards import zeta
from .dualsolver import CapacityResult, SolveConfig, compute_capacity, spectral_derivative
from .errors import SymcapError
from .serialize import rounded

log = logging.getLogger(__name__)

REL_TOL = 0.02
DEFAULT_EPS = (0.1, 0.05, 0.025)


@dataclass
class CheckReport:
    name: str
    inputs: dict
    lhs: float
    rhs: float
    slack: float
    tol: float
    relation: str = "<="
    artifacts: dict = field(default_factory=dict)
    notes: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.slack >= -self.tol)

    def to_dict(self) -> dict:
        return rounded(
            {
                "name": self.name,
                "inputs": self.inputs,
                "lhs": self.lhs,
                "rhs": self.rhs,
                "relation": self.relation,
                "slack": self.slack,
                "tol": self.tol,
                "pass": self.passed,
                "artifacts": self.artifacts,
                "notes": self.notes,
            }
        )

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(
            name=d["name"],
            inputs=d["inputs"],
            lhs=d["lhs"],
            rhs=d["rhs"],
            slack=d["slack"],
            tol=d["tol"],
            relation=d.get("relation", "<="),
            artifacts=d.get("artifacts", {}),
            notes=d.get("notes", ""),
        )

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.lhs:.6g} {self.relation} {self.rhs:.6g} (slack {self.slack:.3g}, tol {self.tol:.3g})"


def _report(name, inputs, lhs, rhs, relation="<=", rel_tol=REL_TOL, **extra) -> CheckReport:
    lhs, rhs = float(lhs), float(rhs)
    slack = -abs(lhs - rhs) if relation == "==" else rhs - lhs
    tol = rel_tol * max(abs(lhs), abs(rhs))
    return CheckReport(name, inputs, lhs, rhs, slack, tol, relation, **extra)


class _Solver:
    """Memoizes capacity solves keyed on the body descriptor."""

    def __init__(self, config: SolveConfig | None):
        self.config = config or SolveConfig()
        self._cache: dict = {}

    def __call__(self, body: B.Body, tau="tau0") -> CapacityResult:
        tkey = tau if isinstance(tau, str) else np.asarray(tau).tolist()
        key = json.dumps([body.to_dict(), tkey], sort_keys=True, default=float)
        if key not in self._cache:
            self._cache[key] = compute_capacity(body, tau, self.config)
        return self._cache[key]


def _solver(config) -> _Solver:
    return config if isinstance(config, _Solver) else _Solver(config)


# ---------------------------------------------------------------------------
# checks

def check_product(bodies, config=None, rel_tol: float = REL_TOL) -> CheckReport:
    """Capacity of a symplectic product equals the smallest factor capacity."""
    if len(bodies) < 2:
        raise SymcapError("check_product needs at least two factors")
    solve = _solver(config)
    prod = B.SymplecticProduct(tuple(bodies))
    lhs = solve(prod).capacity
    factors = [solve(b).capacity for b in bodies]
    return _report(
        "product",
        {"bodies": [b.to_dict() for b in bodies]},
        lhs,
        min(factors),
        "==",
        rel_tol,
        artifacts={"factor_capacities": factors},
    )


def check_brunn_minkowski(D, K, p: float = 1.0, tau="tau0", config=None, equality: bool = False,
                          rel_tol: float = REL_TOL) -> CheckReport:
    """c(D)^(p/2) + c(K)^(p/2) <= c(D +_p K)^(p/2).

    With ``equality=True`` (homothetic pairs) the two sides must agree.
    """
    solve = _solver(config)
    cD, cK = solve(D, tau).capacity, solve(K, tau).capacity
    S = B.minkowski_sum(D, K) if p == 1 else B.PSum(p, (D, K))
    cS = solve(S, tau).capacity
    lhs = cD ** (p / 2) + cK ** (p / 2)
    rhs = cS ** (p / 2)
    return _report(
        "brunn_minkowski",
        {"D": D.to_dict(), "K": K.to_dict(), "p": p},
        lhs,
        rhs,
        "==" if equality else "<=",
        rel_tol,
        artifacts={"c_D": cD, "c_K": cK, "c_sum": cS},
    )


def check_zeta_superadditive(delta1, delta2, lam, tau="tau0", config=None, equality: bool = False,
                             rel_tol: float = REL_TOL) -> CheckReport:
    """zeta(D1) + zeta(D2) <= zeta(D1 + D2)."""
    solve = _solver(config)
    z = lambda d: solve(B.LagrangianProduct(d, lam), tau).capacity
    z1, z2 = z(delta1), z(delta2)
    z12 = z(B.minkowski_sum(delta1, delta2))
    return _report(
        "zeta_superadditive",
        {"delta1": delta1.to_dict(), "delta2": delta2.to_dict(), "lambda": lam.to_dict()},
        z1 + z2,
        z12,
        "==" if equality else "<=",
        rel_tol,
        artifacts={"zeta1": z1, "zeta2": z2, "zeta_sum": z12},
    )


def carrier_length(carrier: np.ndarray) -> float:
    """Euclidean length of a closed curve sampled uniformly on [0, 1]."""
    V = spectral_derivative(np.asarray(carrier, dtype=float))
    return float(np.mean(np.linalg.norm(V, axis=1)))


def check_length_bound(D, tau="tau0", config=None, equality: bool = False, rel_tol: float = REL_TOL) -> CheckReport:
    """4 pi c(D) <= L(carrier)^2."""
    res = _solver(config)(D, tau)
    L = carrier_length(res.carrier)
    return _report(
        "length_bound",
        {"body": D.to_dict()},
        4 * np.pi * res.capacity,
        L**2,
        "==" if equality else "<=",
        rel_tol,
        artifacts={"capacity": res.capacity, "carrier_length": L},
    )


def check_mean_width_bound(delta, lam, config=None, equality: bool = False, samples: int = 20000,
                           rel_tol: float = REL_TOL) -> CheckReport:
    """c(delta x lam) <= 4 M*(delta) M*(lam) for centrally symmetric lam.

    M* of the central symmetrization equals M* of the body itself, since
    h(u) and h(-u) have the same sphere average.
    """
    res = _solver(config)(B.LagrangianProduct(delta, lam))
    rd = B.mean_width(delta, samples)
    rl = B.mean_width(lam, samples)
    return _report(
        "mean_width_bound",
        {"delta": delta.to_dict(), "lambda": lam.to_dict()},
        res.capacity,
        4 * rd * rl,
        "==" if equality else "<=",
        rel_tol,
        artifacts={"r_delta": rd, "r_lambda": rl},
    )


def period_from_carrier(S: np.ndarray, carrier: np.ndarray, capacity: float) -> float:
    """T = 2 int_0^c dt / <grad H(x), x> for H = 1/2 <Sz, z> on an action-normalized carrier."""
    X = np.asarray(carrier, dtype=float)
    pair = np.einsum("ij,ij->i", X @ S.T, X)
    return float(2 * capacity * np.mean(1.0 / pair))


def neduv_scan(S, e_grid, tau="tau0", config=None, rel_tol: float = REL_TOL) -> list[CheckReport]:
    """Compare the derivative of e -> c(D(e)) with carrier periods T_x.

    D(e) = {1/2 <Sz, z> < e}.  Only the carrier from the best restart is
    examined, so T_x is one of possibly several carrier periods.
    """
    S = np.asarray(S, dtype=float)
    e = np.asarray(e_grid, dtype=float)
    if e.size < 3 or np.any(np.diff(e) <= 0):
        raise SymcapError("e_grid must be increasing with at least three levels")
    solve = _solver(config)
    results = [solve(B.Ellipsoid(S / ek), tau) for ek in e]
    C = np.array([r.capacity for r in results])
    reports = []
    for k in range(1, len(e) - 1):
        deriv = (C[k + 1] - C[k - 1]) / (e[k + 1] - e[k - 1])
        T = period_from_carrier(S, results[k].carrier, C[k])
        reports.append(
            _report(
                "neduv",
                {"S": S.tolist(), "e": float(e[k])},
                deriv,
                T,
                "==",
                rel_tol,
                artifacts={"capacities": C.tolist()},
                notes="period taken from the minimum-objective carrier only",
            )
        )
    return reports


def check_capacity_derivative(D, K, tau="tau0", eps_list=DEFAULT_EPS, config=None,
                              rel_tol: float = REL_TOL) -> list[CheckReport]:
    """Sandwich 2 sqrt(c(D) c(K)) <= d_K(D) <= int_0^1 h_K(-J0 z_D').

    d_K(D) is estimated from secants (c(D + eps K) - c(D)) / eps; the
    reported value is the Richardson extrapolate 2 d_{eps/2} - d_eps of the
    last two secants, which removes their first-order bias.
    """
    eps = np.asarray(eps_list, dtype=float)
    if eps.size < 2 or np.any(np.diff(eps) >= 0) or np.any(eps <= 0):
        raise SymcapError("eps_list must be positive and decreasing with at least two entries")
    solve = _solver(config)
    base = solve(D, tau)
    cK = solve(K, tau).capacity
    secants = [(solve(B.minkowski_sum(D, B.Scale(float(t), K)), tau).capacity - base.capacity) / t for t in eps]
    ratio = eps[-2] / eps[-1]
    d = (ratio * secants[-1] - secants[-2]) / (ratio - 1.0)
    n = D.dim // 2
    V = spectral_derivative(base.carrier)
    W = np.hstack([V[:, n:], -V[:, :n]])
    upper = float(np.mean(K.support(W)[0]))
    lower = 2 * np.sqrt(base.capacity * cK)
    art = {"secants": secants, "eps": eps.tolist(), "derivative": d, "c_D": base.capacity, "c_K": cK,
           "monotone": bool(np.all(np.diff(secants) >= 0))}
    inputs = {"D": D.to_dict(), "K": K.to_dict()}
    return [
        _report("capacity_derivative_lower", inputs, lower, d, "<=", rel_tol, artifacts=art),
        _report("capacity_derivative_upper", inputs, d, upper, "<=", rel_tol, artifacts=art),
    ]


def check_zeta_bounds(delta, config=None, rel_tol: float = REL_TOL) -> list[CheckReport]:
    """4r <= zeta <= 4R, zeta <= 2 width, zeta <= 2(n+1) r for Lambda the unit ball."""
    solve = _solver(config)
    lam = B.Ball(1.0, delta.dim)
    rep = zeta(delta, lam, "tau0", solve.config)
    z, b = rep.zeta, rep.bounds
    inputs = {"delta": delta.to_dict()}
    art = {"zeta": z, "bounds": b}
    return [
        _report("zeta_four_r", inputs, b["four_r"], z, "<=", rel_tol, artifacts=art),
        _report("zeta_four_R", inputs, z, b["four_R"], "<=", rel_tol, artifacts=art),
        _report("zeta_two_width", inputs, z, b["two_width"], "<=", rel_tol, artifacts=art),
        _report("zeta_two_np1_r", inputs, z, b["two_np1_r"], "<=", rel_tol, artifacts=art),
    ]


def check_capacity_value(body, expected: float, tau="tau0", config=None, rel_tol: float = REL_TOL) -> CheckReport:
    """Computed capacity equals a claimed closed-form value."""
    res = _solver(config)(body, tau)
    return _report(
        "capacity_value",
        {"body": body.to_dict(), "tau": tau if isinstance(tau, str) else np.asarray(tau).tolist()},
        res.capacity,
        expected,
        "==",
        rel_tol,
        artifacts={"converged": res.converged},
    )


# ---------------------------------------------------------------------------
# manifests

def _body(d):
    return B.body_from_dict(d)


def _run_entry(entry: dict, solve: _Solver) -> list[CheckReport]:
    kind = entry["check"]
    tol = float(entry.get("tol", REL_TOL))
    tau = entry.get("tau", "tau0")
    eq = bool(entry.get("equality", False))
    if kind == "product":
        out = check_product([_body(b) for b in entry["bodies"]], solve, tol)
    elif kind == "brunn_minkowski":
        out = check_brunn_minkowski(_body(entry["D"]), _body(entry["K"]), float(entry.get("p", 1.0)), tau, solve, eq, tol)
    elif kind == "zeta_superadditive":
        out = check_zeta_superadditive(
            _body(entry["delta1"]), _body(entry["delta2"]), _body(entry["lambda"]), tau, solve, eq, tol
        )
    elif kind == "length_bound":
        out = check_length_bound(_body(entry["body"]), tau, solve, eq, tol)
    elif kind == "mean_width_bound":
        out = check_mean_width_bound(_body(entry["delta"]), _body(entry["lambda"]), solve, eq, rel_tol=tol)
    elif kind == "neduv":
        out = neduv_scan(entry["S"], entry["e_grid"], tau, solve, tol)
    elif kind == "capacity_derivative":
        out = check_capacity_derivative(
            _body(entry["D"]), _body(entry["K"]), tau, entry.get("eps_list", DEFAULT_EPS), solve, tol
        )
    elif kind == "zeta_bounds":
        out = check_zeta_bounds(_body(entry["delta"]), solve, tol)
    elif kind == "capacity_value":
        out = check_capacity_value(_body(entry["body"]), float(entry["expected"]), tau, solve, tol)
    else:
        raise SymcapError(f"unknown check {kind!r}")
    reports = out if isinstance(out, list) else [out]
    label = entry.get("name")
    if label:
        for r in reports:
            r.inputs = {"label": label, **r.inputs}
    return reports


def load_manifest(path) -> list[dict]:
    with open(path) as fh:
        data = json.load(fh)
    entries = data["checks"] if isinstance(data, dict) else data
    if not isinstance(entries, list) or not all(isinstance(e, dict) and "check" in e for e in entries):
        raise SymcapError("manifest must list objects with a 'check' field")
    return entries


def run_manifest(entries, config: SolveConfig | None = None, only=None) -> list[CheckReport]:
    """Run manifest entries, optionally restricted to the check kinds in `only`."""
    solve = _Solver(config)
    reports = []
    for entry in entries:
        if only and entry["check"] not in only:
            continue
        overrides = entry.get("config")
        runner = _Solver(solve.config.replace(**overrides)) if overrides else solve
        for r in _run_entry(entry, runner):
            log.info(r.line())
            reports.append(r)
    return reports


def _ball(r, dim=4):
    return {"type": "ball", "r": r, "dim": dim}


_SQUARE = {"type": "polytope_v", "vertices": [[1, 1], [1, -1], [-1, -1], [-1, 1]]}
_CROSS = {"type": "polytope_v", "vertices": [[1, 0], [0, 1], [-1, 0], [0, -1]]}


def _polygon(P: B.PolytopeV) -> dict:
    return {"type": "polytope_v", "vertices": P.vertices.tolist()}


def default_manifest() -> list[dict]:
    """The example inputs of every check."""
    disk = _ball(1.0, 2)
    sq_cross = {"type": "lagrangian_product", "delta": _SQUARE, "lambda": _CROSS}
    ell12 = {"type": "ellipsoid", "radii": [1.0, 2.0]}
    return [
        {"check": "capacity_value", "name": "ball", "body": _ball(1.0), "expected": float(np.pi)},
        {"check": "capacity_value", "name": "ball_tauhat0", "body": _ball(1.0), "tau": "tauhat0", "expected": float(np.pi)},
        {"check": "capacity_value", "name": "ellipsoid_1_2", "body": ell12, "expected": float(np.pi)},
        {"check": "capacity_value", "name": "ellipsoid_2_3", "body": {"type": "ellipsoid", "radii": [2.0, 3.0]}, "expected": float(4 * np.pi)},
        {"check": "capacity_value", "name": "square_x_cross", "body": sq_cross, "expected": 4.0},
        {"check": "product", "bodies": [disk, _ball(1.5, 2)]},
        {"check": "product", "bodies": [disk, disk]},
        {"check": "product", "bodies": [disk, _ball(4.0, 2)]},
        {"check": "brunn_minkowski", "D": _ball(1.0), "K": _ball(1.0), "p": 1, "equality": True},
        {"check": "brunn_minkowski", "D": _ball(1.0), "K": ell12, "p": 2},
        {"check": "brunn_minkowski", "D": _ball(1.0), "K": _ball(3.0), "p": 1, "equality": True},
        {"check": "zeta_superadditive", "delta1": disk, "delta2": disk, "lambda": disk, "equality": True},
        {"check": "zeta_superadditive", "delta1": _SQUARE, "delta2": _SQUARE, "lambda": disk, "equality": True},
        {"check": "zeta_superadditive", "delta1": _SQUARE, "delta2": disk, "lambda": disk},
        {"check": "length_bound", "body": _ball(1.0), "equality": True},
        {"check": "length_bound", "body": ell12, "equality": True},
        {"check": "length_bound", "body": sq_cross},
        {"check": "mean_width_bound", "delta": disk, "lambda": disk},
        {"check": "mean_width_bound", "delta": _SQUARE, "lambda": disk},
        {"check": "mean_width_bound", "delta": {"type": "ellipsoid", "semi_axes": [1.0, 2.0]}, "lambda": disk},
        {"check": "neduv", "S": (2 * np.eye(4)).tolist(), "e_grid": [0.5, 1.0, 1.5]},
        {"check": "neduv", "S": B.Ellipsoid.from_radii([1.0, 2.0]).S.tolist(), "e_grid": [0.5, 1.0, 1.5]},
        {"check": "neduv", "S": B.Ellipsoid.from_radii([2.0, 3.0]).S.tolist(), "e_grid": [0.5, 1.0, 1.5]},
        {"check": "capacity_derivative", "D": _ball(1.0), "K": _ball(1.0)},
        {"check": "capacity_derivative", "D": _ball(1.0), "K": _ball(2.0)},
        {"check": "capacity_derivative", "D": ell12, "K": _ball(1.0)},
        {"check": "zeta_bounds", "delta": disk},
        {"check": "zeta_bounds", "delta": _SQUARE},
        {"check": "zeta_bounds", "delta": {"type": "ellipsoid", "semi_axes": [1.0, 3.0]}},
        {"check": "zeta_bounds", "delta": _polygon(B.regular_polygon(6))},
        {"check": "zeta_bounds", "delta": _polygon(B.random_symmetric_polygon(1))},
        {"check": "zeta_bounds", "delta": _polygon(B.random_symmetric_polygon(2))},
    ]


CHECK_KINDS = (
    "capacity_value",
    "product",
    "brunn_minkowski",
    "zeta_superadditive",
    "length_bound",
    "mean_width_bound",
    "neduv",
    "capacity_derivative",
    "zeta_bounds",
)
