import numpy as np
import pytest

from symcap import bodies as B
from symcap.errors import DimensionMismatch, OriginNotInterior, UnsupportedKind, UnsupportedSum
from symcap.linsymp import random_orthosymplectic, tau0, tauhat0


def dirs(dim, count=200, seed=3):
    return B.sphere_directions(dim, count, seed)


ZOO = {
    "ball": B.Ball(1.3, 4),
    "ellipsoid": B.Ellipsoid.from_radii([1.0, 2.0]),
    "square": B.square(),
    "polytope_h": B.PolytopeH(np.vstack([np.eye(2), -np.eye(2)]), np.ones(4)),
    "psum": B.PSum(2.0, (B.square(), B.Ball(0.5, 2))),
    "product": B.LagrangianProduct(B.square(), B.cross_polytope(2)),
    "image": B.LinearImage(random_orthosymplectic(2, np.random.default_rng(1)), B.Ellipsoid.from_radii([1.0, 3.0])),
    "scale": B.Scale(2.0, B.regular_polygon(6)),
    "translate": B.Translate(np.array([0.2, -0.1]), B.square()),
}


def test_support_examples():
    h, g = B.support(B.Ball(2.0, 2), [1.0, 0.0])
    assert h == pytest.approx(2.0) and np.allclose(g, [2.0, 0.0])
    h, g = B.support(B.square(), [1.0, 1.0])
    assert h == pytest.approx(2.0) and np.allclose(g, [1.0, 1.0])
    h, _ = B.support(B.PSum(2.0, (B.Ball(1.0, 2), B.Ball(1.0, 2))), [0.6, 0.8])
    assert h == pytest.approx(np.sqrt(2))


def test_support_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        B.Ball(1.0, 2).support(np.ones(3))


def test_gauge_examples():
    ell = B.Ellipsoid.from_radii([1.0, 2.0])
    assert np.allclose(ell.S, np.diag([2, 0.5, 2, 0.5]))
    assert B.gauge(ell, [1.0, 0, 0, 0]) == pytest.approx(1.0)
    assert B.gauge(B.Ball(2.5, 3), [0, 2.5, 0]) == pytest.approx(1.0)
    z = np.array([1.0, 1.0])  # |z| = sqrt 2
    assert B.gauge(B.PSum(2.0, (B.Ball(1.0, 2), B.Ball(1.0, 2))), z) == pytest.approx(1.0, abs=1e-6)


def test_origin_not_interior():
    with pytest.raises(OriginNotInterior):
        B.PolytopeV(np.array([[1.0, 0.0], [2.0, 1.0], [2.0, -1.0]]))


@pytest.mark.parametrize("name", list(ZOO))
def test_homogeneity_and_sublinearity(name):
    body = ZOO[name]
    U = dirs(body.dim, 200, 5)
    V = dirs(body.dim, 200, 6)
    h = body.support(U)[0]
    for lam in (0.5, 3.0):
        assert np.allclose(body.support(lam * U)[0], lam * h, rtol=1e-12, atol=1e-12)
    assert np.all(body.support(U + V)[0] <= h + body.support(V)[0] + 1e-9)


@pytest.mark.parametrize("name", list(ZOO))
def test_gauge_membership_consistency(name):
    body = ZOO[name]
    W = dirs(body.dim, 400, 7)
    hW = body.support(W)[0]
    rng = np.random.default_rng(8)
    Z = rng.normal(size=(60, body.dim))
    j = body.gauge(Z)
    # scale each point to the boundary and test against all sampled support planes
    boundary = Z / j[:, None]
    assert np.all(boundary @ W.T <= hW[None, :] * (1 + 1e-8) + 1e-8)
    # argmax points lie on the boundary
    _, G = body.support(W[:40])
    assert np.allclose(body.gauge(G), 1.0, atol=1e-6)


@pytest.mark.parametrize("body", [B.Ball(1.5, 2), B.Ellipsoid.from_semi_axes([1.0, 3.0]), B.square(), B.regular_polygon(5)])
def test_gauge_support_duality(body):
    Z = dirs(body.dim, 200, 9) * 1.7
    assert np.allclose(body.gauge(Z), B.polar(body).support(Z)[0], rtol=1e-8, atol=1e-8)


def test_hstar():
    assert B.hstar(B.Ball(1.0, 2), [2.0, 0.0]) == pytest.approx(1.0)
    assert np.allclose(B.hstar_grad(B.Ball(1.0, 2), [2.0, 0.0]), [1.0, 0.0])
    assert B.hstar(B.square(), [1.0, 1.0]) == pytest.approx(1.0)
    assert np.allclose(B.hstar_grad(B.square(), [1.0, 1.0]), [1.0, 1.0])


@pytest.mark.parametrize("body", [ZOO["ellipsoid"], ZOO["image"], B.PSum(3.0, (B.Ball(1.0, 4), B.Ellipsoid.from_radii([0.5, 2.0])))])
def test_hstar_grad_finite_differences(body):
    rng = np.random.default_rng(10)
    step = 1e-6
    for w in rng.normal(size=(10, body.dim)):
        grad = B.hstar_grad(body, w)
        fd = np.array([(B.hstar(body, w + step * e) - B.hstar(body, w - step * e)) / (2 * step) for e in np.eye(body.dim)])
        assert np.linalg.norm(fd - grad) <= 1e-5 * np.linalg.norm(grad)


def test_polar_examples():
    p = B.polar(B.Ball(2.0, 3))
    assert isinstance(p, B.Ball) and p.radius == pytest.approx(0.5)
    cross = B.polar(B.square())
    U = dirs(2)
    assert np.allclose(cross.support(U)[0], np.abs(U).max(axis=1))
    assert np.allclose(B.cross_polytope(2).support(U)[0], np.abs(U).max(axis=1))


@pytest.mark.parametrize("body", [B.Ball(1.2, 2), B.Ellipsoid.from_radii([1.0, 2.0]), B.regular_polygon(7), B.square()])
def test_bipolar(body):
    U = dirs(body.dim)
    assert np.allclose(B.polar(B.polar(body)).support(U)[0], body.support(U)[0], atol=1e-9)


def test_polar_unsupported():
    with pytest.raises(UnsupportedKind):
        B.polar(ZOO["psum"])


def test_geometric_summary_examples():
    s = B.geometric_summary(B.square())
    assert (s.inradius, s.circumradius, s.width) == pytest.approx((1.0, np.sqrt(2), 2.0))
    s = B.geometric_summary(B.Ball(0.7, 2))
    assert (s.inradius, s.circumradius, s.width, s.mean_width) == pytest.approx((0.7, 0.7, 1.4, 0.7))
    s = B.geometric_summary(B.Ellipsoid.from_semi_axes([1.0, 3.0]))
    assert (s.inradius, s.circumradius, s.width) == pytest.approx((1.0, 3.0, 2.0))
    s = B.geometric_summary(B.regular_polygon(6))
    assert s.width == pytest.approx(np.sqrt(3))
    assert s.inradius == pytest.approx(np.sqrt(3) / 2)


@pytest.mark.parametrize("body", [B.square(), B.random_symmetric_polygon(1), B.Ellipsoid.from_semi_axes([1.0, 3.0])])
def test_geometric_summary_rotation_invariant(body):
    a = 0.37
    R = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    s0 = B.geometric_summary(body)
    s1 = B.geometric_summary(B.LinearImage(R, body))
    for f in ("inradius", "circumradius", "width"):
        assert getattr(s1, f) == pytest.approx(getattr(s0, f), abs=1e-6)
    assert s0.inradius <= s0.circumradius and s0.width <= 2 * s0.circumradius + 1e-12


def test_summary_round_trip():
    s = B.geometric_summary(B.square())
    assert B.GeometricSummary.from_dict(s.to_dict()) == s


def test_tau_invariant_examples():
    P = random_orthosymplectic(2, np.random.default_rng(2))
    assert B.tau_invariant(B.Ball(1.0, 4), P.T @ tau0(2) @ P)
    assert B.tau_invariant(B.Ball(1.0, 4), tauhat0(2))
    assert B.tau_invariant(B.Ellipsoid.from_radii([1.0, 2.0]), tau0(2))
    prod = B.LagrangianProduct(B.square(), B.square())
    assert B.tau_invariant(prod, tau0(2))
    shifted = B.Translate(np.array([0.0, 0.0, 0.3, 0.2]), prod)
    assert not B.tau_invariant(shifted, tau0(2))


def test_smooth():
    s = B.smooth(B.Ball(1.0, 2), 0.1)
    U = dirs(2)
    assert np.allclose(s.support(U)[0], np.sqrt(1.01))
    assert B.smooth(B.square(), 0.01).support([1.0, 1.0])[0] == pytest.approx(np.sqrt(4 + 0.0002))
    sq = B.square()
    hs, h = B.smooth(sq, 0.05).support(U)[0], sq.support(U)[0]
    assert np.all(h <= hs + 1e-15) and np.all(hs <= h + 0.05 + 1e-15)


def test_minkowski_sum():
    assert B.minkowski_sum(B.Ball(1.0, 2), B.Ball(2.0, 2)).radius == 3.0
    s = B.minkowski_sum(B.square(), B.square())
    assert np.allclose(s.support(dirs(2))[0], 2 * B.square().support(dirs(2))[0])
    mixed = B.minkowski_sum(B.square(), B.Ball(1.0, 2))
    U = dirs(2)
    assert np.allclose(mixed.support(U)[0], B.square().support(U)[0] + 1.0)
    with pytest.raises(UnsupportedSum):
        B.minkowski_sum(B.square(), B.Ball(1.0, 3))


def test_products():
    prod = ZOO["product"]
    w = np.array([1.0, 0.0, 0.0, 2.0])
    assert prod.support(w)[0] == pytest.approx(1.0 + 2.0)
    assert prod.gauge([0.5, 0.5, 0.9, 0.0]) == pytest.approx(0.9)
    sp = B.SymplecticProduct((B.Ball(1.0, 2), B.Ball(2.0, 2)))
    # coordinates (x1, x2, y1, y2); factor k owns (x_k, y_k)
    assert sp.gauge([0.0, 2.0, 0.0, 0.0]) == pytest.approx(1.0)
    assert sp.support([1.0, 0.0, 0.0, 1.0])[0] == pytest.approx(1.0 + 2.0)


def test_translate_and_scale():
    t = ZOO["translate"]
    w = np.array([1.0, 2.0])
    assert t.support(w)[0] == pytest.approx(3.0 + 0.2 - 0.2)
    assert t.gauge([1.2, 0.0]) == pytest.approx(1.0)
    s = ZOO["scale"]
    assert s.gauge([2.0, 0.0]) == pytest.approx(1.0)


@pytest.mark.parametrize("name", list(ZOO))
def test_descriptor_round_trip(name):
    body = ZOO[name]
    again = B.body_from_dict(body.to_dict())
    U = dirs(body.dim)
    assert np.allclose(again.support(U)[0], body.support(U)[0])
