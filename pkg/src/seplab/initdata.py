"""Impulse profiles G(x), criticality constants, and the real-integral identities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq


class ProfileError(ValueError):
    pass


class IdentityViolation(AssertionError):
    pass


@dataclass(frozen=True)
class Profile:
    """Even, nonpositive impulse profile with the derived quantities we need."""

    name: str
    G: Callable[[np.ndarray], np.ndarray]
    dG: Callable[[np.ndarray], np.ndarray]
    Ginv: Callable[[float], float]          # inverse of G on x > 0
    G0: float
    l1norm: float
    params: dict = field(default_factory=dict)

    def script_G(self, m):
        """sqrt(m) sqrt(G0^2 - m) / (2 G'(G^{-1}(-sqrt m)))  on 0 < m <= G0^2.

        The formula is 0/0 at m = G0^2 where script-G is still analytic, so
        the last 1e-6 (relative) is filled by linear extrapolation.
        """
        m = np.asarray(m, dtype=float)
        top = self.G0 ** 2
        mc = top * (1 - 1e-6)
        near = m > mc
        out = self._script_G_raw(np.where(near, mc, m))
        if np.any(near):
            step = top * 1e-6
            g1, g0 = self._script_G_raw(np.array([mc, mc - step]))
            out = np.where(near, g1 + (m - mc) * (g1 - g0) / step, out)
        return out

    def _script_G_raw(self, m):
        root = np.sqrt(m)
        x = np.vectorize(self.Ginv)(-root)
        return root * np.sqrt(self.G0 ** 2 - m) / (2 * self.dG(x))


def profile_sech(amplitude: float) -> Profile:
    """G(x) = -A sech(x), A > 2."""
    A = float(amplitude)
    if not A > 2:
        raise ProfileError(f"amplitude {A} violates G(0) < -2")

    def G(x):
        return -A / np.cosh(x)

    def dG(x):
        return A * np.tanh(x) / np.cosh(x)

    def Ginv(g):
        if not 0 < -g <= A * (1 + 1e-15):
            raise ProfileError(f"G^-1 undefined at {g}")
        return math.acosh(max(-A / g, 1.0))

    return Profile("sech", G, dG, Ginv, -A, A * math.pi, {"type": "sech", "amplitude": A})


def profile_from_config(cfg: dict) -> Profile:
    kind = str(cfg.get("type", "sech")).strip().strip('"')
    if kind == "sech":
        return profile_sech(float(cfg.get("amplitude", 3.0)))
    raise ProfileError(f"unknown profile type {kind!r}")


def parse_profile_config(text: str) -> dict:
    """Parse ``key: value`` / ``key = value`` lines, or one comma separated line."""
    text = text.strip()
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    if "\n" not in text:
        text = text.replace(",", "\n")
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in (":", "="):
            if sep in line:
                k, v = line.split(sep, 1)
                out[k.strip().strip('"')] = v.strip().strip('"')
                break
        else:
            raise ProfileError(f"cannot parse config line {line!r}")
    return out


@dataclass(frozen=True)
class CritConstants:
    xCrit: float
    nu: float
    wStar: float = -1.0
    S: float = 1.0


def crit_constants(p: Profile) -> CritConstants:
    f = lambda x: float(p.G(x)) + 2.0
    hi = 1.0
    while f(hi) < 0:
        hi *= 2
        if hi > 1e6:
            raise ProfileError("x_crit root solve failed")
    x = brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return CritConstants(x, 1.0 / (12.0 * float(p.dG(x))))


def epsilon_N(p: Profile, N: int) -> float:
    if N < 1:
        raise ValueError("N must be >= 1")
    return p.l1norm / (4 * math.pi * N)


# --------------------------------------------------------------- quadrature

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def gauss_adaptive(f, a: float, b: float, tol: float = 1e-13, n: int = 32, depth: int = 30) -> float:
    """Composite Gauss-Legendre; a panel is split until n and 2n nodes agree."""
    def panel(lo, hi, k):
        x, w = _gl(k)
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        return half * float(np.dot(w, f(mid + half * x)))

    def rec(lo, hi, d):
        c, f2 = panel(lo, hi, n), panel(lo, hi, 2 * n)
        if abs(c - f2) <= tol * max(1.0, abs(f2)) or d == 0:
            return f2
        m = (lo + hi) / 2
        return rec(lo, m, d - 1) + rec(m, hi, d - 1)

    return rec(a, b, depth)


# --------------------------------------------------------------- Psi, phi

def _check_v(p: Profile, v: float, lo: float = 0.0):
    if not lo < v < -p.G0:
        raise ValueError(f"v = {v} outside ({lo}, {-p.G0})")


def psi_eval(p: Profile, v: float, nodes: int = 32) -> float:
    """(1/2) int_0^{G^-1(-v)} sqrt(G(s)^2 - v^2) ds.

    With s = X (1 - u^2) the square-root zero at s = X becomes a smooth
    factor of u.
    """
    _check_v(p, v)
    X = p.Ginv(-v)

    def f(u):
        s = X * (1 - u * u)
        g = -p.G(s)
        return np.sqrt(np.maximum((g - v) * (g + v), 0.0)) * 2 * X * u

    return 0.5 * gauss_adaptive(f, 0.0, 1.0, n=nodes)


def phi_eval(p: Profile, v: float, route: str = "scriptG", h: float = 1e-4) -> float:
    """d Psi / dv, either by central difference or by the script-G integral."""
    _check_v(p, v, lo=2.0)
    if route == "direct":
        hh = min(h, 0.5 * (-p.G0 - v))
        return (psi_eval(p, v + hh) - psi_eval(p, v - hh)) / (2 * hh)
    if route != "scriptG":
        raise ValueError("route must be 'direct' or 'scriptG'")
    return _phi_script(p, v)


def _phi_script(p: Profile, v: float, nodes: int = 64) -> float:
    # m = (a+b)/2 + (b-a)/2 cos(theta) removes both inverse square roots and
    # leaves an analytic integrand, so a fixed Gauss rule is spectrally
    # accurate and never touches the endpoints where script-G is 0/0
    a, b = v * v, p.G0 ** 2
    x, w = _gl(nodes)
    theta = 0.5 * math.pi * (x + 1)
    m = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(theta)
    return -0.5 * v * 0.5 * math.pi * float(np.dot(w, p.script_G(m) / m))


@dataclass(frozen=True)
class IdentityReport:
    I2: float
    xCrit: float
    nu: float
    nuAlt: float
    i2Error: float
    nuError: float


def identity_checks(p: Profile, raise_on_fail: bool = True) -> IdentityReport:
    """I2 = -x_crit/2 via the phi quadrature, and nu via script-G(4)."""
    cc = crit_constants(p)
    top = math.acosh(-p.G0 / 2)

    # v = 2 cosh(t) absorbs 1/sqrt(v^2 - 4)
    def f(t):
        return np.array([_phi_script(p, 2 * math.cosh(ti)) for ti in np.atleast_1d(t)])

    I2 = 2 / math.pi * gauss_adaptive(f, 0.0, top, tol=1e-12, n=16)
    nu_alt = float(p.script_G(4.0)) / (12 * math.sqrt(p.G0 ** 2 - 4))
    rep = IdentityReport(I2, cc.xCrit, cc.nu, nu_alt, abs(I2 + cc.xCrit / 2), abs(nu_alt - cc.nu))
    if raise_on_fail and (rep.i2Error > 1e-6 or rep.nuError > 1e-9):
        raise IdentityViolation(f"identity check failed: {rep}")
    return rep


def bohr_sommerfeld(p: Profile, N: int, tol: float = 1e-13) -> list[float]:
    """v_k solving Psi(v_k) = pi eps_N (k + 1/2), k = 0..N-1.

    Psi decreases from |G|_1/4 at v = 0 to 0 at v = -G(0), so v_k decreases
    with k.
    """
    eps = epsilon_N(p, N)
    vmax = -p.G0
    out = []
    for k in range(N):
        target = math.pi * eps * (k + 0.5)
        f = lambda v: psi_eval(p, v) - target
        lo, hi = 1e-12 * vmax, vmax * (1 - 1e-15)
        out.append(brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200))
    return out


# --------------------------------------------------------------- coordinates

@dataclass(frozen=True)
class Coords:
    dx: float
    z: float
    r: float
    s: float
    y: float
    m: int
    pm: float
    qm: float


def strip_index(t: float, eps: float) -> int:
    """Lowest m with |t/eps - (2m/3) log(1/eps)| <= (1/3) log(1/eps)."""
    L = math.log(1 / eps)
    return math.ceil((3 * t / (eps * L) - 1) / 2 - 1e-12)


def q_of(t: float, m: int, eps: float) -> float:
    return t / eps - 2 * m / 3 * math.log(1 / eps)


def t_of(q: float, m: int, eps: float) -> float:
    return 2 * m / 3 * eps * math.log(1 / eps) + eps * q


def coords(p: Profile | CritConstants, x: float, t: float, eps: float, m: int | None = None) -> Coords:
    """Leading-order critical coordinates of (x, t)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    cc = p if isinstance(p, CritConstants) else crit_constants(p)
    dx = x - cc.xCrit
    r = dx / (2 * cc.nu ** (1 / 3))
    s = t
    z = r / eps ** (2 / 3)
    if m is None:
        m = strip_index(t, eps)
    q = q_of(t, m, eps)
    return Coords(dx, z, r, s, z, m, q_of(s, m, eps), q)
