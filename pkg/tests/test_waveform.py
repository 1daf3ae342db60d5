import math
import random

import numpy as np
import pytest

from seplab.pii import hierarchy
from seplab.waveform import (
    MINUS,
    PLUS,
    ClassificationGap,
    OutsideRegion,
    RegionLabel,
    RegionParams,
    UnwrapError,
    check_delta,
    error_envelope,
    exact_grazing,
    exact_kink,
    g_model,
    grazing_model,
    grazing_time,
    in_region,
    kink_center_curve,
    kink_model,
    multiscale_model,
    multiscale_overlap,
    overlap_difference,
    p_value,
    region_classify,
    sg_residual,
    tooth_tips,
)

NU = 0.05590169943749474      # sech, A = 3
RP = RegionParams(eps=0.1, delta=0.2, kappa=0.0, B=6)
L = math.log(10)


def s_of(p, m, eps=0.1):
    return eps * (p + 2 * m / 3 * math.log(1 / eps))


def test_delta_below_half_gap():
    assert check_delta(RP) > 0.4
    with pytest.raises(ValueError):
        check_delta(RegionParams(0.1, delta=0.6, B=6))


def test_classify_origin():
    assert region_classify(0.0, 0.0, RP) == [RegionLabel(0, PLUS), RegionLabel(1, MINUS)]


def test_classify_tooth_of_omega2():
    z = -(6 ** (1 / 3))
    assert region_classify(z, s_of(0.05, 2), RP) == [RegionLabel(2, PLUS)]
    # just outside the tooth the partner region takes over
    assert region_classify(z + 0.5, s_of(0.05, 2), RP) == [RegionLabel(3, MINUS)]


def test_notch_excludes_plus():
    p = -0.4
    assert not in_region(RegionLabel(2, PLUS), 0.05, p, RP)    # pole of U_2 at 0
    assert region_classify(0.05, s_of(p, 2), RP) == [RegionLabel(3, MINUS)]


def test_outside_covered_strips():
    with pytest.raises(OutsideRegion):
        region_classify(0.0, s_of(0.0, 9), RP)


def test_strip_union_sampling():
    rng = random.Random(11)
    hw = L / 3
    for _ in range(1000):
        m = rng.randint(-5, 5)
        p = rng.uniform(-hw, hw)
        y = rng.uniform(-8, 8)
        labs = region_classify(y, s_of(p, m), RP)
        assert set(labs) & {RegionLabel(m, PLUS), RegionLabel(m + 1, MINUS)}
        # away from predicate boundaries exactly one of the two holds
        if abs(abs(p) - hw) > 1e-9 and abs(p) > 1e-9:
            own = [l for l in labs if l in (RegionLabel(m, PLUS), RegionLabel(m + 1, MINUS))]
            if len(own) == 2:
                # only possible on a tooth/notch edge
                e = hierarchy(m)
                pts = [float(b) for b in e.zerosU + e.polesU]
                edge = [abs(abs(y - r) - 0.2 * math.exp(-abs(p) / 2)) for r in pts]
                assert min(edge) < 1e-9


def test_tooth_tips_interlock():
    for m in range(-4, 5):
        up, down = tooth_tips(m, RP)
        assert len(up) == len(down)
        for (c1, s1, w1), (c2, s2, w2) in zip(sorted(up), sorted(down)):
            assert abs(c1 - c2) < 1e-11 and abs(s1 - s2) < 1e-14 and w1 == w2


def test_kink_examples():
    assert kink_model(0, 0.7, 0.0, 0.01, NU).as_tuple() == (1.0, 0.0)
    k = kink_model(0, 0.0, 0.02, 0.01, NU)
    assert abs(k.cosHalf - 0.26580) < 1e-5 and abs(k.sinHalf + 0.96403) < 1e-5
    eps = 1e-3
    t = 2 * eps * math.log(4 * NU ** (1 / 3) / eps ** (1 / 3))
    k = kink_model(1, -6.0, t, eps, NU)
    assert abs(k.cosHalf + 1) < 1e-12 and abs(k.sinHalf) < 1e-12


def test_kink_saturation():
    z = kink_model(1, 0.0, 0.0, 1e-3, NU)        # zero of U_1
    assert z.saturated and z.cosHalf == 0 and z.sinHalf == -1.0
    p = kink_model(2, 0.0, 0.0, 1e-3, NU)        # pole of U_2
    assert p.saturated and p.cosHalf == 0 and p.sinHalf == -1.0


def test_model_outputs_on_unit_circle():
    rng = random.Random(3)
    for _ in range(300):
        m = rng.randint(-4, 4)
        z = rng.uniform(-6, 6)
        eps = 10 ** rng.uniform(-6, -1)
        t = rng.uniform(-1, 1) * eps * 5
        for out in (kink_model(m, z, t, eps, NU),
                    multiscale_model(m, rng.choice([PLUS, MINUS]), z, rng.uniform(-3, 3), eps, NU)):
            assert abs(out.cosHalf ** 2 + out.sinHalf ** 2 - 1) < 1e-12


def test_center_curves():
    curve = kink_center_curve(0, (-5, 5), 1e-5, 1 / 64, 11)
    assert all(t == 0 for _, t in curve)
    up = kink_center_curve(1, (8, 40), 1e-5, 1 / 64, 5)
    ts = [t for _, t in up]
    assert all(a > b for a, b in zip(ts, ts[1:]))                  # frown
    down = kink_center_curve(-1, (8, 40), 1e-5, 1 / 64, 5)
    ts = [t for _, t in down]
    assert all(a < b for a, b in zip(ts, ts[1:]))                  # smile
    gapped = kink_center_curve(2, (-3, 3), 1e-5, 1 / 64, 61)
    assert sum(math.isnan(t) for _, t in gapped) >= 2              # zero and pole of U_2
    with pytest.raises(ValueError):
        kink_center_curve(1, (0, 1), 1e-5, 1 / 64, 1)


def test_grazing_examples():
    g = grazing_model(2, 0.0, 0.0, 0.0, 1e-3, NU)
    assert g.as_tuple() == (0.0, -1.0)
    t = grazing_time(2, 0.0, 1e-3, NU)
    far = grazing_model(2, 0.0, 1e3, t, 1e-3, NU)          # T_G = 0, X large
    assert abs(far.cosHalf) < 1e-3 and abs(far.sinHalf - 1) < 1e-6
    mid = grazing_model(2, 0.0, 1 / (2 * (NU / 1e-3) ** (1 / 3)), t, 1e-3, NU)   # X = 1
    assert abs(mid.sinHalf) < 1e-12 and abs(abs(mid.cosHalf) - 1) < 1e-12
    with pytest.raises(ValueError):
        grazing_model(2, 0.3, 0.0, 0.0, 1e-3, NU)


def test_exact_solutions():
    assert np.allclose(exact_kink(0.0, 1), (1, 0))
    assert np.allclose(exact_kink(40.0, 1), (-1, 0)) and np.allclose(exact_kink(-40.0, -1), (-1, 0))
    c, s = exact_kink(0.7, 1)
    assert abs(c * c + s * s - 1) < 1e-15
    assert np.allclose(exact_grazing(0.0, 0.3, 1), (-1, 0))
    assert np.allclose(exact_grazing(2.0, 50.0, -1), (-1, 0))
    c, s = exact_grazing(1.3, -0.4, 1)
    assert abs(c * c + s * s - 1) < 1e-15


def _grid(h):
    T = np.arange(-3, 3 + h / 2, h)
    X = np.arange(-2, 2 + h / 2, h)
    return np.meshgrid(T, X, indexing="ij")


def test_sg_residual_exact_solutions():
    res = {}
    for h in (1e-2, 1e-3):
        TT, XX = _grid(h)
        res[h] = (sg_residual(*exact_kink(TT, 1), h), sg_residual(*exact_grazing(XX, TT, -1), h))
    assert max(res[1e-3]) <= 1e-5
    for a, b in zip(res[1e-2], res[1e-3]):
        assert math.log10(a / b) > 1.9


def test_sg_residual_constant_and_unwrap_error():
    assert sg_residual(-np.ones((4, 4)), np.zeros((4, 4)), 0.1) < 1e-15
    TT, XX = _grid(0.5)
    with pytest.raises(UnwrapError):
        sg_residual(*exact_grazing(40 * XX, TT, 1), 0.5)


def test_multiscale_examples():
    m0 = multiscale_model(0, PLUS, 0.0, 0.0, 0.1, NU)
    assert abs(m0.cosHalf - 1) < 1e-15 and abs(m0.sinHalf) < 1e-15
    m1 = multiscale_model(1, MINUS, 0.0, 0.0, 0.1, NU)
    assert abs(m1.cosHalf - 1) < 1e-2 and abs(m1.sinHalf) < 1e-1
    lim = multiscale_model(1, PLUS, 1.0, 400.0, 0.1, NU)
    assert abs(lim.cosHalf) < 1e-12 and abs(abs(lim.sinHalf) - 1) < 1e-12


def test_multiscale_pole_saturation():
    out = multiscale_model(2, PLUS, 0.0, 0.0, 0.01, NU)
    assert out.saturated and out.cosHalf == 0 and out.sinHalf == 1


def test_multiscale_matches_kink_limit():
    for m in (1, 2, 3):
        errs = []
        for eps in (1e-3, 1e-5):
            t = 2 * m / 3 * eps * math.log(1 / eps)
            k = kink_model(m, 0.37, t, eps, NU)
            q = p_value(t, m, eps)
            ms = multiscale_model(m, PLUS, 0.37, q, eps, NU)
            errs.append(max(abs(k.cosHalf - ms.cosHalf), abs(k.sinHalf - ms.sinHalf)))
        assert errs[1] < errs[0] < 1e-4


def _boundary_ratios(eps, ms, n=200, seed=5):
    """max over samples of |(m,+) - (m+1,-)| / (sum of both envelopes), per m."""
    rp = RegionParams(eps)
    out = {}
    for m in ms:
        rng = random.Random(seed)
        labs = (RegionLabel(m, PLUS), RegionLabel(m + 1, MINUS))
        worst, k = 0.0, 0
        while k < n:
            y = rng.uniform(-5, 5)
            if not all(in_region(lab, y, 0.0, rp) for lab in labs):
                continue
            k += 1
            a = multiscale_model(m, PLUS, y, 0.0, eps, NU)
            b = multiscale_model(m + 1, MINUS, y, 0.0, eps, NU)
            env = sum(error_envelope(lab.m, lab.sign, y, 0.0, eps, rp) for lab in labs)
            d = max(abs(a.cosHalf - b.cosHalf), abs(a.sinHalf - b.sinHalf))
            worst = max(worst, d / env)
        out[m] = worst
    return out


def test_shared_boundary_continuity():
    r = _boundary_ratios(1e-6, range(-2, 3))
    assert max(r.values()) <= 1.0


def test_shared_boundary_outer_strips_shrink():
    # at |m| = 3 the O(1) constant is large; only the trend is checked
    r = [_boundary_ratios(e, [3], n=100)[3] for e in (1e-4, 1e-6, 1e-8)]
    assert r[0] > r[1] > r[2]


def test_error_envelope_cases():
    e3 = 0.1 ** (1 / 3)
    assert error_envelope(0, PLUS, 0.3, -0.2, 0.1, RP) == pytest.approx(e3)
    # inside delta of the pole of U_2 but outside the shrunken notch at p = -1/2
    assert error_envelope(2, PLUS, 0.17, -0.5, 0.1, RP) == pytest.approx(e3 / 0.17, rel=1e-9)
    # tooth case
    z = -(6 ** (1 / 3))
    p, d = 0.5, 0.15
    assert error_envelope(2, PLUS, z + d, p, 0.1, RP) == pytest.approx(e3 * math.exp(p) * d, rel=1e-9)
    with pytest.raises(OutsideRegion):
        error_envelope(2, PLUS, 0.01, -0.5, 0.1, RP)


def test_kink_grazing_overlap_decay():
    eps_list = [1e-3, 1e-4, 1e-5]
    d = [overlap_difference(2, 0.0, e, NU, e ** (1 / 6)) for e in eps_list]
    slope = np.polyfit(np.log(eps_list), np.log(d), 1)[0]
    assert d[0] > d[1] > d[2] and slope >= 0.25


def test_g_model():
    assert g_model(0.3, 0.0) == -2.0


def test_overlap_reports_every_region():
    r = multiscale_overlap(0.0, 0.0, NU, RegionParams(1e-6))
    assert [lab for lab, _, _ in r.outputs] == [RegionLabel(0, PLUS), RegionLabel(1, MINUS)]
    assert r.maxDiff == 0.0 and not r.disagree
    # kappa > 0: strips 0 and 1 overlap above the top of strip 0
    eps = 1e-6
    s = eps * (math.log(1 / eps) / 3 + 0.2)
    r = multiscale_overlap(0.7, s, NU, RegionParams(eps, kappa=0.5))
    labs = [lab for lab, _, _ in r.outputs]
    assert labs == [RegionLabel(1, PLUS), RegionLabel(1, MINUS)]
    assert 0 < r.maxDiff < sum(e for _, _, e in r.outputs) and not r.disagree
