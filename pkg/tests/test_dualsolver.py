import json

import numpy as np
import pytest

from symcap import bodies as B
from symcap.dualsolver import (
    CapacityResult,
    SolveConfig,
    SymmetricLoop,
    _basis,
    _starting_loops,
    action,
    compute_capacity,
    dual_gradient,
    dual_objective,
    extract_carrier,
    legendre_residual,
    mode_indices,
    residuals,
    sampled_action,
)
from symcap.errors import NonPositiveAction, NormalizerUnavailable, NotInvariant, SymcapError
from symcap.linsymp import J0, random_orthosymplectic, tau0, tauhat0
from symcap.serialize import load_curve_csv

BALL = B.Ball(1.0, 4)
ELL12 = B.Ellipsoid.from_radii([1.0, 2.0])
SQ_CROSS = B.LagrangianProduct(B.square(), B.cross_polytope(2))
FAST = SolveConfig(restarts=4)


def random_loop(n, M, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(2 * M, n)) / np.abs(mode_indices(M))[:, None] ** 1.5
    if action(SymmetricLoop(X)) <= 0:
        X = X[::-1].copy()
    return SymmetricLoop(X)


def quadrature_action(loop, N=1024):
    t = np.arange(N) / N
    x, v = loop.evaluate(t), loop.velocity(t)
    n = loop.n
    mJv = np.hstack([v[:, n:], -v[:, :n]])
    return 0.5 * np.mean(np.einsum("ij,ij->i", mJv, x))


# ---------------------------------------------------------------------------
# loops and action

def test_single_mode_action():
    assert action(SymmetricLoop.single_mode(2, 4, 1, [1.0, 0.0])) == pytest.approx(np.pi)
    assert action(SymmetricLoop.single_mode(2, 4, -1, [1.0, 0.0])) == pytest.approx(-np.pi)


@pytest.mark.parametrize("seed", range(5))
def test_action_matches_quadrature(seed):
    loop = random_loop(2, 8, seed)
    assert abs(action(loop) - quadrature_action(loop)) <= 1e-10 * abs(action(loop))


def test_loop_symmetry_and_closure():
    loop = random_loop(3, 6, 1)
    t = np.linspace(0, 1, 257)
    x, xr = loop.evaluate(t), loop.evaluate(1 - t)
    assert np.max(np.abs(xr - x @ tau0(3).T)) < 1e-12
    assert np.allclose(loop.evaluate(0.0), loop.evaluate(1.0), atol=1e-12)
    assert np.allclose(x[:-1].mean(axis=0), 0.0, atol=1e-12)


def test_velocity_is_derivative():
    loop = random_loop(2, 5, 2)
    t, d = 0.31, 1e-6
    fd = (loop.evaluate(t + d) - loop.evaluate(t - d)) / (2 * d)
    assert np.allclose(loop.velocity(t), fd, atol=1e-6)


# ---------------------------------------------------------------------------
# objective and gradient

def test_objective_ball_circle():
    loop = SymmetricLoop.single_mode(2, 24, 1, [1.0, 0.0])
    assert dual_objective(BALL, loop) == pytest.approx(np.pi, rel=1e-14)


@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_objective_scale_invariance(lam):
    loop = random_loop(2, 8, 3)
    F = dual_objective(ELL12, loop, 2.0, 256)
    assert abs(dual_objective(ELL12, loop.scaled(lam), 2.0, 256) - F) < 1e-12 * F


def test_objective_ellipsoid_first_plane():
    loop = SymmetricLoop.single_mode(2, 8, 1, [1.0, 0.0])
    assert dual_objective(ELL12, loop) == pytest.approx(np.pi, rel=1e-12)


def test_objective_rejects_negative_action():
    loop = SymmetricLoop.single_mode(2, 4, -1, [1.0, 0.0])
    with pytest.raises(NonPositiveAction):
        dual_objective(BALL, loop)


def test_gradient_vanishes_at_ball_minimizer():
    loop = SymmetricLoop.single_mode(2, 24, 1, [1.0, 0.0])
    assert np.linalg.norm(dual_gradient(BALL, loop)) < 1e-9


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_gradient_finite_differences(p):
    body = B.PSum(2.0, (ELL12, B.Ball(0.5, 4)))
    loop = random_loop(2, 6, 5)
    G = dual_gradient(body, loop, p, 128)
    X, step = loop.coeffs, 1e-6
    fd = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = step
        fd[idx] = (dual_objective(body, SymmetricLoop(X + E), p, 128) - dual_objective(body, SymmetricLoop(X - E), p, 128)) / (2 * step)
    assert np.linalg.norm(fd - G) <= 1e-5 * np.linalg.norm(G)


def test_gradient_secants_smoothed_product():
    body = B.smooth(B.LagrangianProduct(B.square(), B.Ball(1.0, 2)), 1e-3)
    loop = random_loop(2, 6, 6)
    G = dual_gradient(body, loop, 2.0, 256)
    rng = np.random.default_rng(7)
    for _ in range(10):
        D = rng.normal(size=G.shape)
        D /= np.linalg.norm(D)
        s = 1e-7
        secant = (dual_objective(body, SymmetricLoop(loop.coeffs + s * D), 2.0, 256)
                  - dual_objective(body, SymmetricLoop(loop.coeffs - s * D), 2.0, 256)) / (2 * s)
        assert abs(secant - np.sum(G * D)) <= 1e-4 * max(abs(secant), np.linalg.norm(G) * 1e-2)


# ---------------------------------------------------------------------------
# capacity

def test_capacity_ball():
    res = compute_capacity(BALL)
    assert res.capacity == pytest.approx(np.pi, rel=1e-2)
    assert res.converged and not res.no_convergence


def test_capacity_ball_tauhat0():
    assert compute_capacity(BALL, "tauhat0").capacity == pytest.approx(np.pi, rel=1e-2)


def test_capacity_ellipsoid():
    res = compute_capacity(ELL12)
    assert res.capacity == pytest.approx(np.pi, rel=1e-2)
    assert res.residuals["boundary"] < 1e-3


def test_capacity_square_cross():
    res = compute_capacity(SQ_CROSS)
    assert res.capacity == pytest.approx(4.0, rel=2e-2)
    lo, hi = res.smoothing["bracket"]
    assert lo <= hi == pytest.approx(res.capacity)
    assert res.smoothing["eps"] == 1e-3


@pytest.mark.xfail(strict=True, reason="truncated-mode carrier misses the corners of the product by ~3%; see README")
def test_square_cross_carrier_boundary():
    assert compute_capacity(SQ_CROSS).residuals["boundary"] < 1e-2


def test_ball_carrier():
    res = compute_capacity(BALL)
    assert np.allclose(res.a0, 0.0, atol=1e-12)
    assert np.allclose(np.linalg.norm(res.carrier, axis=1), 1.0, atol=1e-10)
    assert action(res.loop) == pytest.approx(1.0)
    assert res.multiplier == pytest.approx(-np.pi)


def test_ellipsoid_carrier_in_first_plane():
    res = compute_capacity(ELL12)
    assert np.max(np.abs(res.carrier[:, [1, 3]])) < 1e-6
    assert res.residuals["legendre"] < 1e-2


def test_extract_carrier_direct():
    loop = SymmetricLoop.single_mode(2, 8, 1, [3.0, 0.0])
    c, a0, X, off, u = extract_carrier(BALL, loop)
    assert c == pytest.approx(np.pi)
    assert np.allclose(a0, 0) and off < 1e-12
    assert np.allclose(np.linalg.norm(X, axis=1), 1.0)


def test_residuals():
    t = np.arange(512) / 512
    circle = np.c_[np.cos(2 * np.pi * t), np.zeros_like(t), np.sin(2 * np.pi * t), np.zeros_like(t)]
    r = residuals(BALL, tau0(2), circle, np.pi)
    assert max(r.values()) < 1e-10
    bad = circle.copy()
    bad[100] *= 1.1
    assert residuals(BALL, tau0(2), bad, np.pi)["boundary"] >= 0.05
    assert sampled_action(circle) == pytest.approx(np.pi, rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_conformality(lam):
    c = compute_capacity(BALL, config=FAST).capacity
    assert compute_capacity(B.Scale(lam, BALL), config=FAST).capacity == pytest.approx(lam**2 * c, rel=2e-2)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_conformality_product(lam):
    c = compute_capacity(SQ_CROSS, config=FAST).capacity
    assert compute_capacity(B.Scale(lam, SQ_CROSS), config=FAST).capacity == pytest.approx(lam**2 * c, rel=2e-2)


def test_translation_invariance():
    shifted = B.Translate(np.array([0.3, -0.2, 0.0, 0.0]), BALL)
    assert compute_capacity(shifted, config=FAST).capacity == pytest.approx(np.pi, rel=2e-2)


def test_translation_off_fixed_space_rejected():
    with pytest.raises(NotInvariant):
        compute_capacity(B.Translate(np.array([0.0, 0.0, 0.3, 0.0]), BALL))


def test_monotonicity():
    small = compute_capacity(BALL, config=FAST).capacity
    large = compute_capacity(B.Ball(1.1, 4), config=FAST).capacity
    assert small <= large + 1e-2 * large


def test_orthogonal_block_invariance():
    a = 0.7
    A = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    Psi = np.kron(np.eye(2), A)
    for body in (ELL12, SQ_CROSS):
        c0 = compute_capacity(body, config=FAST).capacity
        c1 = compute_capacity(B.LinearImage(Psi, body), config=FAST).capacity
        assert c1 == pytest.approx(c0, rel=2e-2)


def test_p_consistency():
    vals = [compute_capacity(BALL, config=FAST.replace(p=p)).capacity for p in (1.5, 2.0, 3.0)]
    assert max(vals) - min(vals) <= 1e-2 * np.pi


def test_symmetric_conjugate_involution():
    P = random_orthosymplectic(2, np.random.default_rng(11))
    tau = P.T @ tau0(2) @ P
    body = B.LinearImage(P.T, ELL12)  # tau-invariant image of the ellipsoid
    res = compute_capacity(body, tau, FAST)
    assert res.capacity == pytest.approx(np.pi, rel=1e-2)
    assert res.residuals["symmetry"] < 1e-8


def test_nonsymmetric_involution_needs_psi():
    Sh = np.eye(4)
    Sh[2, 0] = Sh[3, 1] = 0.5  # symplectic shear (x, y) -> (x, y + x/2)
    Shinv = np.linalg.inv(Sh)
    tau = Shinv @ tau0(2) @ Sh
    body = B.LinearImage(Shinv, BALL)
    with pytest.raises(NormalizerUnavailable):
        compute_capacity(body, tau, FAST)
    res = compute_capacity(body, tau, FAST, psi=Sh)
    assert res.capacity == pytest.approx(np.pi, rel=1e-2)


def test_no_convergence_flag():
    X = random_loop(2, 24, 8).coeffs
    res = compute_capacity(B.Ellipsoid.from_radii([1.0, 1.3]), config=SolveConfig(restarts=1, max_iters=1), starts=[X])
    assert res.no_convergence


def test_determinism_and_threads():
    a = compute_capacity(ELL12, config=SolveConfig(restarts=6, seed=9))
    b = compute_capacity(ELL12, config=SolveConfig(restarts=6, seed=9, threads=3))
    da, db = a.to_dict(), b.to_dict()
    da.pop("config"), db.pop("config")
    assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)


def test_result_round_trip(tmp_path):
    res = compute_capacity(BALL, config=FAST)
    d = res.to_dict()
    again = CapacityResult.from_dict(json.loads(json.dumps(d)))
    assert again.to_dict() == d
    path = res.write_carrier_csv(tmp_path / "carrier.csv")
    assert path.read_text().splitlines()[0] == "t,x1,x2,x3,x4"
    t, X = load_curve_csv(path)
    assert X.shape == (512, 4) and np.allclose(X, res.carrier, atol=1e-8)


def test_config_validation():
    with pytest.raises(SymcapError):
        SolveConfig(modes=24, samples=96)
    with pytest.raises(SymcapError):
        SolveConfig(restarts=0)
    with pytest.raises(SymcapError):
        SolveConfig(p=0.5)
    cfg = SolveConfig(modes=8, samples=64)
    assert SolveConfig.from_dict(cfg.to_dict()) == cfg


def test_starting_loops_positive_action():
    js = mode_indices(6)
    starts = _starting_loops(3, 6, 12, 0)
    assert len(starts) == 12
    assert all(np.pi * np.sum(js * np.sum(X**2, axis=1)) > 0 for X in starts)
    assert np.array_equal(starts[0][js == 1], [[1.0, 0.0, 0.0]])


def test_legendre_residual_ball():
    t = np.arange(256) / 256
    circle = np.c_[np.cos(2 * np.pi * t), np.zeros_like(t), np.sin(2 * np.pi * t), np.zeros_like(t)]
    assert legendre_residual(BALL, circle, np.pi) < 1e-10
