"""Airy function Ai and its derivative at complex argument.

Two regimes, both evaluated in mpmath at a working precision chosen by the
caller:

* |z| <= 7: Maclaurin series.  Extra digits are added to absorb the
  cancellation between the two series on the positive real axis, where the
  terms grow like exp(+2/3 |z|^{3/2}) while Ai decays like exp(-2/3 |z|^{3/2}).
* |z| > 7: Poincare asymptotic series, truncated at its smallest term.  For
  |arg z| > 2pi/3 the connection formula
  Ai(z) = -w Ai(w z) - w^2 Ai(w^2 z),  w = exp(2 pi i / 3)
  moves both evaluations into |arg| <= 2pi/3.
"""
from __future__ import annotations

import math

import mpmath as mp

SWITCH_RADIUS = 7.0


def _maclaurin(z):
    extra = int(1.2 * abs(complex(z)) ** 1.5) + 10
    with mp.extradps(extra):
        z = mp.mpc(z)
        z3 = z ** 3
        c1 = 1 / (mp.power(3, mp.mpf(2) / 3) * mp.gamma(mp.mpf(2) / 3))
        c2 = 1 / (mp.power(3, mp.mpf(1) / 3) * mp.gamma(mp.mpf(1) / 3))
        tol = mp.eps * mp.mpf(10) ** (-extra)
        # f = sum a_k z^{3k},  g = sum b_k z^{3k+1}
        a = mp.mpf(1)
        b = mp.mpf(1)
        p = mp.mpc(1)  # z^{3k}
        f = mp.mpc(1)
        g = z
        df = mp.mpc(0)
        dg = mp.mpc(1)
        k = 0
        while True:
            k += 1
            a = a / ((3 * k - 1) * (3 * k))
            b = b / ((3 * k) * (3 * k + 1))
            pm1 = p * z * z      # z^{3k-1}
            p = p * z3           # z^{3k}
            tf = a * p
            tg = b * p * z
            f += tf
            g += tg
            df += a * 3 * k * pm1
            dg += b * (3 * k + 1) * p
            if abs(tf) + abs(tg) < tol * (abs(f) + abs(g)) and k > 2:
                break
        ai = c1 * f - c2 * g
        dai = c1 * df - c2 * dg
    return +ai, +dai


def _asymptotic(z):
    """Principal-branch asymptotic series, valid for |arg z| <= 2pi/3."""
    z = mp.mpc(z)
    z14 = mp.power(z, mp.mpf(1) / 4)
    zeta = mp.mpf(2) / 3 * mp.power(z, mp.mpf(3) / 2)
    e = mp.exp(-zeta) / (2 * mp.sqrt(mp.pi))
    s_ai = mp.mpc(1)
    s_dai = mp.mpc(1)
    u = mp.mpf(1)
    inv = 1 / zeta
    pw = mp.mpc(1)
    last = mp.inf
    k = 0
    while True:
        k += 1
        u = u * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        v = -u * (6 * k + 1) / (6 * k - 1)
        pw = -pw * inv
        t_ai = u * pw
        t_dai = v * pw
        size = abs(t_ai) + abs(t_dai)
        if size > last:
            break  # past the smallest term
        s_ai += t_ai
        s_dai += t_dai
        last = size
        if size < mp.eps:
            break
    return e / z14 * s_ai, -z14 * e * s_dai


def airy_mp(z, series_radius: float = SWITCH_RADIUS):
    """(Ai(z), Ai'(z)) as mpmath complex numbers at the current precision.

    ``series_radius`` can be raised when full working precision is needed
    (the asymptotic branch is only good to about exp(-4/3 |z|^{3/2})).
    """
    z = mp.mpc(z)
    r = abs(z)
    if r <= series_radius:
        return _maclaurin(z)
    if abs(mp.arg(z)) <= 2 * mp.pi / 3:
        return _asymptotic(z)
    w = mp.expjpi(mp.mpf(2) / 3)
    w2 = w * w
    a1, d1 = _asymptotic(w * z)
    a2, d2 = _asymptotic(w2 * z)
    # d/dz Ai(w z) = w Ai'(w z)
    return -w * a1 - w2 * a2, -w * w * d1 - w2 * w2 * d2


def airy_eval(z: complex, dps: int = 30) -> tuple[complex, complex]:
    """Ai(z), Ai'(z) in double precision (relative accuracy ~1e-12)."""
    with mp.workdps(dps):
        ai, dai = airy_mp(mp.mpc(z))
        return complex(ai), complex(dai)


def cyclic_residual(z: complex) -> float:
    """|Ai(z) + w^-1 Ai(z/w) + w Ai(w z)| with w = exp(2 pi i/3)."""
    w = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
    wb = w.conjugate()
    a0 = airy_eval(z)[0]
    am = airy_eval(z * wb)[0]
    ap = airy_eval(z * w)[0]
    return abs(a0 + wb * am + w * ap)
