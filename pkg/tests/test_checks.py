import json

import numpy as np
import pytest

from symcap import bodies as B
from symcap.checks import (
    CHECK_KINDS,
    CheckReport,
    carrier_length,
    check_brunn_minkowski,
    check_capacity_derivative,
    check_capacity_value,
    check_length_bound,
    check_mean_width_bound,
    check_product,
    check_zeta_superadditive,
    default_manifest,
    load_manifest,
    neduv_scan,
    period_from_carrier,
    run_manifest,
)
from symcap.dualsolver import SolveConfig
from symcap.errors import SymcapError

CFG = SolveConfig(restarts=4)
DISK = B.Ball(1.0, 2)
BALL = B.Ball(1.0, 4)
ELL12 = B.Ellipsoid.from_radii([1.0, 2.0])


def test_report_semantics():
    r = CheckReport("x", {}, 1.0, 1.01, -0.01, 0.0202, "==")
    assert r.passed
    r = CheckReport("x", {}, 1.1, 1.0, -0.1, 0.022, "<=")
    assert not r.passed
    assert r.line().startswith("FAIL x:")
    again = CheckReport.from_dict(json.loads(json.dumps(r.to_dict())))
    assert again.to_dict() == r.to_dict()


def test_product():
    for bodies in ([DISK, B.Ball(1.5, 2)], [DISK, DISK], [DISK, B.Ball(4.0, 2)]):
        r = check_product(bodies, CFG)
        assert r.passed, r.line()
        assert r.rhs == pytest.approx(np.pi, rel=1e-2)
    with pytest.raises(SymcapError):
        check_product([DISK])


@pytest.mark.parametrize(
    "D,K,p,eq",
    [(BALL, BALL, 1, True), (BALL, ELL12, 2, False), (BALL, B.Ball(3.0, 4), 1, True)],
)
def test_brunn_minkowski(D, K, p, eq):
    r = check_brunn_minkowski(D, K, p, config=CFG, equality=eq)
    assert r.passed, r.line()


def test_brunn_minkowski_equality_detects_non_homothets():
    # minimal radii in different planes: c(D + K) = 16 pi > (2 sqrt pi)^2
    D, K = B.Ellipsoid.from_radii([1.0, 3.0]), B.Ellipsoid.from_radii([3.0, 1.0])
    r = check_brunn_minkowski(D, K, 1, config=CFG, equality=True)
    assert not r.passed
    assert check_brunn_minkowski(D, K, 1, config=CFG).passed


def test_zeta_superadditive_disks():
    r = check_zeta_superadditive(DISK, DISK, DISK, config=CFG, equality=True)
    assert r.passed, r.line()
    assert r.rhs == pytest.approx(8.0, rel=2e-2)


def test_zeta_superadditive_square_disk():
    r = check_zeta_superadditive(B.square(), DISK, DISK, config=CFG)
    assert r.passed, r.line()


def test_carrier_length_circle():
    t = np.arange(256) / 256
    c = np.c_[np.cos(2 * np.pi * t), np.zeros(256), np.sin(2 * np.pi * t), np.zeros(256)]
    assert carrier_length(c) == pytest.approx(2 * np.pi, rel=1e-12)


@pytest.mark.parametrize("body", [BALL, ELL12])
def test_length_bound_equality(body):
    r = check_length_bound(body, config=CFG, equality=True)
    assert r.passed, r.line()


def test_length_bound_product():
    r = check_length_bound(B.LagrangianProduct(B.square(), B.cross_polytope(2)), config=CFG)
    assert r.passed, r.line()


def test_mean_width_disks_equality():
    r = check_mean_width_bound(DISK, DISK, CFG, equality=True)
    assert r.passed, r.line()
    assert r.rhs == pytest.approx(4.0, rel=1e-2)


def test_mean_width_square():
    r = check_mean_width_bound(B.square(), DISK, CFG)
    assert r.passed, r.line()
    assert r.artifacts["r_delta"] == pytest.approx(4 / np.pi, rel=1e-2)


def test_period_of_ball_carrier():
    t = np.arange(256) / 256
    c = np.c_[np.cos(2 * np.pi * t), np.zeros(256), np.sin(2 * np.pi * t), np.zeros(256)]
    # H = |z|^2 on the unit ball level, c = pi; T = 2 pi / 2 = pi
    assert period_from_carrier(2 * np.eye(4), c, np.pi) == pytest.approx(np.pi)


@pytest.mark.parametrize("S", [2 * np.eye(4), ELL12.S])
def test_period_scan(S):
    reports = neduv_scan(S, [0.5, 1.0, 1.5], config=CFG)
    assert len(reports) == 1
    assert all(r.passed for r in reports), [r.line() for r in reports]


def test_period_scan_rejects_short_grid():
    with pytest.raises(SymcapError):
        neduv_scan(2 * np.eye(4), [1.0, 2.0])


def test_capacity_derivative_balls():
    lo, hi = check_capacity_derivative(BALL, BALL, config=CFG)
    assert lo.passed and hi.passed, (lo.line(), hi.line())
    # c(B + eps B) = pi (1 + eps)^2, derivative 2 pi
    assert lo.rhs == pytest.approx(2 * np.pi, rel=1e-2)


def test_capacity_derivative_rejects_bad_eps():
    with pytest.raises(SymcapError):
        check_capacity_derivative(BALL, BALL, eps_list=[0.1, 0.2])


def test_capacity_value_fails_on_wrong_claim():
    r = check_capacity_value(BALL, 3.5, config=CFG)
    assert not r.passed


def test_manifest_io(tmp_path):
    entries = [{"check": "capacity_value", "body": {"type": "ball", "r": 1.0, "dim": 4}, "expected": float(np.pi)},
               {"check": "product", "bodies": [{"type": "ball", "r": 1.0, "dim": 2}] * 2}]
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"checks": entries}))
    assert load_manifest(path) == entries
    reports = run_manifest(entries, CFG, only={"capacity_value"})
    assert [r.name for r in reports] == ["capacity_value"] and reports[0].passed
    path.write_text(json.dumps([{"nope": 1}]))
    with pytest.raises(SymcapError):
        load_manifest(path)


def test_manifest_unknown_kind():
    with pytest.raises(SymcapError):
        run_manifest([{"check": "bogus"}], CFG)


def test_default_manifest_covers_all_kinds():
    kinds = {e["check"] for e in default_manifest()}
    assert kinds == set(CHECK_KINDS)
    assert sum(e["check"] == "zeta_bounds" for e in default_manifest()) == 6
