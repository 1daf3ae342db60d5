"""Direct solver for eps^2 u_tt - eps^2 u_xx + sin u = 0 with u(x,0) = 0, eps u_t(x,0) = G(x)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np
from scipy.integrate import trapezoid


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    eps: float
    tEnd: float
    L: float = 6.0
    nx: int | None = None       # default: dx ~ eps/40
    cfl: float = 0.5
    outputEvery: int = 1

    def __post_init__(self):
        if not self.tEnd > 0 or not self.eps > 0:
            raise ValueError("need eps > 0 and tEnd > 0")
        if not 0 < self.cfl < 1:
            raise ValueError("cfl must lie in (0, 1)")
        if self.outputEvery < 1:
            raise ValueError("outputEvery must be >= 1")

    @property
    def n(self) -> int:
        if self.nx is not None:
            return int(self.nx)
        return 2 * math.ceil(80 * self.L / self.eps / 2)

    @property
    def dx(self) -> float:
        return 2 * self.L / self.n

    @property
    def dt(self) -> float:
        return self.cfl * min(self.dx, self.eps / 4)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n + 1)


@dataclass(frozen=True)
class FieldFrame:
    t: float
    u: np.ndarray
    epsUt: np.ndarray
    L: float
    nx: int
    eps: float
    meta: dict = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.nx + 1)

    def header(self) -> dict:
        return {"t": self.t, "nx": self.nx, "L": self.L, "eps": self.eps}

    def dump(self, path):
        """Binary frame: one JSON header line, then u and eps*u_t as float64."""
        with open(path, "wb") as f:
            f.write((json.dumps(self.header()) + "\n").encode())
            f.write(np.ascontiguousarray(self.u, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(self.epsUt, dtype="<f8").tobytes())


def load_frame(path) -> FieldFrame:
    with open(path, "rb") as f:
        hdr = json.loads(f.readline())
        data = np.frombuffer(f.read(), dtype="<f8")
    n = hdr["nx"] + 1
    return FieldFrame(hdr["t"], data[:n].copy(), data[n:2 * n].copy(), hdr["L"], hdr["nx"], hdr["eps"])


def _laplacian(u, dx):
    out = np.empty_like(u)
    out[1:-1] = (u[2:] + u[:-2]) - 2 * u[1:-1]   # symmetric sum keeps parity exact
    # Neumann via mirror ghost points
    out[0] = 2 * (u[1] - u[0])
    out[-1] = 2 * (u[-2] - u[-1])
    return out / (dx * dx)


def pde_solve(G: Callable[[np.ndarray], np.ndarray] | object, cfg: SolverConfig,
              u0: np.ndarray | None = None) -> Iterator[FieldFrame]:
    """Leapfrog frames at t = 0, k*outputEvery*dt, ..., up to tEnd.

    ``G`` is a Profile or a callable giving eps*u_t(x, 0).  ``u0`` (test mode
    only) replaces the pure-impulse u(x, 0) = 0.
    """
    Gf = getattr(G, "G", G)
    x = cfg.x
    eps, dx, dt = cfg.eps, cfg.dx, cfg.dt
    if dt > dx:
        raise SolverError(f"CFL violated: dt = {dt} > dx = {dx}")
    g = np.asarray(Gf(x), dtype=float) * np.ones_like(x)
    n = cfg.n
    nsteps = math.ceil(cfg.tEnd / dt - 1e-9)
    k2 = 1 / (eps * eps)

    def accel(u):
        return _laplacian(u, dx) - k2 * np.sin(u)

    prev = np.zeros_like(x) if u0 is None else np.asarray(u0, float).copy()
    # Taylor start; for u(x,0) = 0 this is exactly u(dt) = dt G / eps
    cur = prev + dt * g / eps + 0.5 * dt * dt * accel(prev)
    yield FieldFrame(0.0, prev.copy(), g.copy(), cfg.L, n, eps)
    for k in range(1, nsteps + 1):
        nxt = 2 * cur - prev + dt * dt * accel(cur)
        if k % cfg.outputEvery == 0 or k == nsteps:
            if not np.all(np.isfinite(nxt)):
                raise SolverError(f"non-finite field at step {k}, t = {k * dt}")
            vel = eps * (nxt - prev) / (2 * dt)
            yield FieldFrame(k * dt, cur.copy(), vel, cfg.L, n, eps)
        prev, cur = cur, nxt


def pde_energy(frame: FieldFrame, eps: float | None = None) -> float:
    """Trapezoid integral of (eps u_t)^2/2 + (eps u_x)^2/2 + 1 - cos u."""
    eps = frame.eps if eps is None else eps
    x = frame.x
    ux = np.gradient(frame.u, x)
    dens = 0.5 * frame.epsUt ** 2 + 0.5 * (eps * ux) ** 2 + 1 - np.cos(frame.u)
    return float(trapezoid(dens, x))


def half_angle(u):
    return np.cos(0.5 * u), np.sin(0.5 * u)


@dataclass(frozen=True)
class Window:
    x0: float
    x1: float
    t0: float
    t1: float


def critical_window(eps: float, nu: float, xCrit: float, K: float = 1.0, tmax: float | None = None) -> Window:
    """|x - x_crit| <= 2 nu^{1/3} K eps^{2/3} and 0 <= t <= tmax (default (1/3) eps log(1/eps))."""
    half = 2 * nu ** (1 / 3) * K * eps ** (2 / 3)
    if tmax is None:
        tmax = eps * math.log(1 / eps) / 3
    return Window(xCrit - half, xCrit + half, 0.0, tmax)


def model_compare(frames: Iterable[FieldFrame], evaluator, window: Window, B: int = 6) -> tuple[float, float]:
    """(sup, rms) difference of (cos(u/2), sin(u/2)) against ``evaluator(x, t)``.

    ``evaluator`` returns the model's (cosHalf, sinHalf) arrays at the grid
    points of one frame.  Windows reaching past |t| = (B/3) eps log(1/eps)
    leave the covered strips and are rejected.
    """
    checked = False
    sup = 0.0
    acc = 0.0
    cnt = 0
    for fr in frames:
        if not checked:
            tcov = B / 3 * fr.eps * math.log(1 / fr.eps)
            if max(abs(window.t0), abs(window.t1)) > tcov * (1 + 1e-9):
                raise ValueError(f"window leaves the covered strips |t| <= {tcov}")
            checked = True
        if fr.t < window.t0 - 1e-12:
            continue
        if fr.t > window.t1 + 1e-12:
            break
        x = fr.x
        sel = (x >= window.x0) & (x <= window.x1)
        if not sel.any():
            raise ValueError("window contains no grid points")
        c, s = half_angle(fr.u[sel])
        mc, ms = evaluator(x[sel], fr.t)
        d = np.maximum(np.abs(c - mc), np.abs(s - ms))
        sup = max(sup, float(d.max()))
        acc += float(np.sum(d * d))
        cnt += d.size
    if cnt == 0:
        raise ValueError("no frame inside the window")
    return sup, math.sqrt(acc / cnt)


def pendulum_reference(c: float, eps: float, ts, rtol: float = 1e-12):
    """u(t) for eps^2 u'' + sin u = 0, u(0) = 0, eps u'(0) = -c (scipy oracle)."""
    from scipy.integrate import solve_ivp

    sol = solve_ivp(lambda t, y: [y[1], -np.sin(y[0]) / eps ** 2], (0, max(ts)),
                    [0.0, -c / eps], t_eval=ts, rtol=rtol, atol=1e-13, method="DOP853")
    return sol.y[0]


def figure1_structure(frames: Iterable[FieldFrame], xCrit: float, core_gap: float = 0.3,
                      fan_width: float = 0.15, wing_gap: float = 0.5, wing_max: float = 4.0) -> dict:
    """Sign statistics of cos u in three x-bands.

    For each band: ``negCos`` is the fraction of samples with cos u < 0 and
    ``turns`` the median over x of max_t |u| / (2 pi).  Rotation shows up as
    turns > 1, libration as turns < 1/2.
    """
    fr = list(frames)
    U = np.array([f.u for f in fr])
    ax = np.abs(fr[0].x)
    bands = {
        "core": ax < xCrit - core_gap,
        "fan": np.abs(ax - xCrit) < fan_width,
        "wing": (ax > xCrit + wing_gap) & (ax < wing_max),
    }
    out = {}
    for name, sel in bands.items():
        u = U[:, sel]
        out[name] = {
            "negCos": float(np.mean(np.cos(u) < 0)),
            "turns": float(np.median(np.abs(u).max(axis=0)) / (2 * np.pi)),
        }
    return out
