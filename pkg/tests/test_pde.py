import json
import math

import numpy as np
import pytest

from seplab.initdata import profile_sech
from seplab.pde import (
    FieldFrame,
    SolverConfig,
    SolverError,
    Window,
    critical_window,
    figure1_structure,
    half_angle,
    load_frame,
    model_compare,
    pde_energy,
    pde_solve,
    pendulum_reference,
)

SECH3 = profile_sech(3.0)


def last(gen):
    fr = None
    for fr in gen:
        pass
    return fr


def test_zero_data_stays_zero():
    frames = list(pde_solve(lambda x: 0 * x, SolverConfig(0.2, 0.3, L=2)))
    assert all(not fr.u.any() and not fr.epsUt.any() for fr in frames)
    assert pde_energy(frames[-1]) == 0.0


def test_uniform_data_is_a_pendulum():
    eps, c = 0.1, 1.5
    cfg = SolverConfig(eps, 0.5, L=1, outputEvery=10)
    frames = list(pde_solve(lambda x: -c + 0 * x, cfg))
    ts = [fr.t for fr in frames]
    ref = pendulum_reference(c, eps, ts)
    for fr, r in zip(frames, ref):
        assert np.ptp(fr.u) < 1e-12
        assert abs(fr.u[0] - r) < 1e-4


def test_initial_energy_sech():
    fr = next(pde_solve(SECH3, SolverConfig(0.1, 0.01)))
    E = pde_energy(fr)
    assert E == pytest.approx(9 * math.tanh(6), rel=1e-8)
    assert E == pytest.approx(9, rel=2e-4)       # whole-line value


def test_energy_drift():
    cfg = SolverConfig(3 / 16, 1.0, outputEvery=50)
    E = [pde_energy(fr) for fr in pde_solve(SECH3, cfg)]
    assert max(abs(e - E[0]) for e in E) / E[0] <= 1e-4


def test_parity():
    fr = last(pde_solve(SECH3, SolverConfig(0.1, 0.5, outputEvery=100)))
    assert np.max(np.abs(fr.u - fr.u[::-1])) <= 1e-12


def test_second_order_convergence():
    ends = [last(pde_solve(SECH3, SolverConfig(0.25, 0.5, L=3, nx=n))) for n in (240, 480, 960)]
    assert all(abs(fr.t - 0.5) < 1e-12 for fr in ends)
    coarse, mid, fine = (fr.u for fr in ends)
    d1 = np.max(np.abs(coarse - mid[::2]))
    d2 = np.max(np.abs(mid - fine[::2]))
    assert math.log2(d1 / d2) >= 1.8


def test_config_checks():
    with pytest.raises(ValueError):
        SolverConfig(0.1, 1.0, cfl=1.5)
    with pytest.raises(ValueError):
        SolverConfig(0.0, 1.0)
    cfg = SolverConfig(0.1, 1.0)
    assert cfg.dt <= cfg.dx and cfg.dx == pytest.approx(0.1 / 40, rel=1e-2)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_blowup_reported():
    with pytest.raises(SolverError):
        list(pde_solve(lambda x: np.inf + 0 * x, SolverConfig(0.1, 0.2, L=1)))


def test_frame_roundtrip(tmp_path):
    fr = last(pde_solve(SECH3, SolverConfig(0.2, 0.05, L=2)))
    fr.dump(tmp_path / "f.bin")
    back = load_frame(tmp_path / "f.bin")
    assert back.t == fr.t and back.nx == fr.nx and back.eps == fr.eps
    assert np.array_equal(back.u, fr.u) and np.array_equal(back.epsUt, fr.epsUt)
    head = (tmp_path / "f.bin").read_bytes().split(b"\n", 1)[0]
    assert set(json.loads(head)) == {"t", "nx", "L", "eps"}


def test_model_compare_self():
    frames = list(pde_solve(SECH3, SolverConfig(0.1, 0.05, L=2)))
    by_t = {fr.t: fr for fr in frames}

    def same(x, t):
        fr = by_t[t]
        return half_angle(fr.u[np.isin(fr.x, x)])

    sup, rms = model_compare(frames, same, Window(-0.5, 0.5, 0.0, 0.05))
    assert sup == 0.0 and rms == 0.0


def test_model_compare_constant_model():
    frames = list(pde_solve(lambda x: 0 * x, SolverConfig(0.1, 0.02, L=1)))
    sup, rms = model_compare(frames, lambda x, t: (0 * x, 0 * x + 1), Window(-0.5, 0.5, 0.0, 0.02))
    assert sup == pytest.approx(1.0) and rms == pytest.approx(1.0)


def test_model_compare_rejects_uncovered_window():
    frames = list(pde_solve(lambda x: 0 * x, SolverConfig(0.1, 0.02, L=1)))
    with pytest.raises(ValueError):
        model_compare(frames, lambda x, t: (x, x), Window(-0.5, 0.5, 0.0, 10.0))
    with pytest.raises(ValueError):
        model_compare(frames, lambda x, t: (x, x), Window(3.0, 4.0, 0.0, 0.01))


def test_critical_window():
    w = critical_window(1e-3, 1 / 64, 0.9624)
    assert w.x1 - w.x0 == pytest.approx(4 * 0.25 * 1e-2)
    assert w.t1 == pytest.approx(1e-3 * math.log(1e3) / 3)


def test_figure1_structure_synthetic():
    x = np.linspace(-6, 6, 1201)
    # full turns inside, small wiggle outside
    u = np.where(np.abs(x) < 0.9, 3 * np.pi, 0.1)
    frames = [FieldFrame(0.0, 0 * x, 0 * x, 6.0, 1200, 0.1), FieldFrame(1.0, u, 0 * x, 6.0, 1200, 0.1)]
    st = figure1_structure(frames, 1.0)
    assert st["core"]["turns"] == pytest.approx(1.5)
    assert st["wing"]["turns"] < 0.1 and st["wing"]["negCos"] == 0.0
