import json
from fractions import Fraction as F

import pytest

from seplab.pii import (
    BoundError,
    Hierarchy,
    HierarchyError,
    b_entries,
    confinement_check,
    hamiltonian,
    hierarchy,
    lambda_check,
    lower_step,
    pii_residuals,
    pole_residue,
    raise_step,
)
from seplab.ratpoly import Poly, RatFun, RootBox, ratfun_leading

y = Poly.x()
Y = RatFun.y()


def rf(num, den=None):
    return RatFun(num, den)


def test_first_entries():
    assert hierarchy(0).U == RatFun.const(1)
    assert hierarchy(0).V == rf(Poly([0, F(-1, 6)]))
    assert hierarchy(1).U == rf(Poly([0, F(-1, 6)]))
    assert hierarchy(1).V == RatFun.const(1)
    assert hierarchy(2).U == rf(y ** 3 + 6, 36 * y)
    assert hierarchy(2).V == rf(Poly.const(-6), y)
    assert hierarchy(-1).U == rf(Poly.const(-6), y)
    assert hierarchy(-1).V == rf(y ** 3 + 6, 36 * y)


def test_hamiltonian_examples():
    assert hamiltonian(0) == Y * Y * F(1, 24)
    assert hamiltonian(1) == Y * Y * F(1, 24)
    H2 = hamiltonian(2)
    assert H2.den == y
    assert H2 == rf(y ** 3 * F(1, 24) - F(1, 2), y)


def test_b_entries_examples():
    B12, B21 = b_entries(0)
    assert B12 == Y * Y * F(1, 12)
    assert B21 == Y ** 3 * F(1, 72) - F(1, 6)
    B12, _ = b_entries(1)
    assert B12 == F(1, 6) - Y ** 3 * F(1, 72)


@pytest.mark.parametrize("m,want", [(0, F(1, 6)), (1, F(-1, 6)), (-2, F(5, 6))])
def test_lambda_examples(m, want):
    assert lambda_check(m) == want


@pytest.mark.parametrize("m", [0, 3, -4])
def test_residuals_vanish(m):
    assert all(r.is_zero() for r in pii_residuals(m))


def test_residual_detects_corruption():
    # a perturbed pair must not satisfy the system
    e = hierarchy(2)
    bad = Hierarchy(bound=2)
    bad._put(2, e.U + 1, e.V)
    assert not all(r.is_zero() for r in pii_residuals(2, bad))
    with pytest.raises(HierarchyError):
        lambda_check(2, bad)


@pytest.mark.parametrize("m", range(-5, 6))
def test_leading_behaviour(m):
    e = hierarchy(m)
    assert ratfun_leading(e.U) == (F(-1, 6) ** m, m)
    assert ratfun_leading(e.V) == (F(-1, 6) ** (1 - m), 1 - m)


@pytest.mark.parametrize("m", range(-5, 6))
def test_round_trip_and_product(m):
    e = hierarchy(m)
    assert raise_step(*lower_step(e.U, e.V)) == (e.U, e.V)
    assert lower_step(*raise_step(e.U, e.V)) == (e.U, e.V)
    assert hierarchy(m + 1).V * e.U == RatFun.const(1)


def test_poles_simple():
    for m in range(-6, 7):
        assert all(b.multiplicity == 1 for b in hierarchy(m).polesU)


def test_pole_residue_examples():
    (b,) = hierarchy(2).polesU
    assert pole_residue(2, b) == F(1, 6)
    (b,) = hierarchy(-1).polesU
    assert pole_residue(-1, b) == -6


def test_pole_residue_irrational_pole():
    e = hierarchy(3)
    for b in e.polesU:
        k = float(pole_residue(3, b))
        z0, h = float(b), 1e-6
        approx = h * e.U.eval_float(z0 + h)
        assert abs(approx - k) < 1e-4 * max(1, abs(k))


def test_confinement_examples():
    (b,) = hierarchy(2).polesU
    rep = confinement_check(2, b)
    assert rep.zV == 0 and rep.zU == 0
    assert rep.signV != 0 and rep.signU != 0
    (b,) = hierarchy(-1).polesU
    confinement_check(-1, b)
    with pytest.raises(HierarchyError):
        confinement_check(2, RootBox(F(1), F(2)))


def test_bound():
    h = Hierarchy(bound=3)
    h(3)
    with pytest.raises(BoundError):
        h(4)
    with pytest.raises(BoundError):
        h(-4)


def test_cache_round_trip(tmp_path):
    h = Hierarchy(bound=4, cache_dir=tmp_path)
    u4 = h(4).U
    assert (tmp_path / "entry_4.json").exists()
    obj = json.loads((tmp_path / "entry_3.json").read_text())
    assert obj["m"] == 3
    h2 = Hierarchy(bound=4, cache_dir=tmp_path)
    assert h2(4).U == u4


def test_to_json_fields():
    obj = hierarchy(2).to_json()
    assert obj["U"] == {"num": ["6", "0", "0", "1"], "den": ["0", "36"]}
    assert len(obj["polesU"]) == 1 and len(obj["zerosU"]) == 1
