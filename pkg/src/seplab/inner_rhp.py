"""Inner model problem: Z_m(zeta; y) from Airy functions and Schlesinger ladders.

Matrices returned to callers are 2x2 complex128 numpy arrays.  Internally all
assembly happens in mpmath, because the columns of L = Z exp(-theta sigma_3)
differ in size by exp(2 Re theta) and ray jumps are differences of such
products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np

from .airy import SWITCH_RADIUS, airy_mp
from .pii import Hierarchy, HierarchyEntry, default_hierarchy

DPS = 30


class LadderBlocked(ValueError):
    """A Schlesinger pivot vanishes at the requested y."""

    def __init__(self, m: int, direction: str, y):
        name = "U" if direction == "up" else "V"
        super().__init__(f"{name}_{m}({y}) = 0: ladder step {direction} from m={m} is blocked")
        self.m = m
        self.direction = direction
        self.y = y


class ExtractionFailed(RuntimeError):
    pass


# ------------------------------------------------------------------ helpers

def _mat(a, b, c, d):
    return mp.matrix([[a, b], [c, d]])


def _to_np(M) -> np.ndarray:
    return np.array([[complex(M[0, 0]), complex(M[0, 1])],
                     [complex(M[1, 0]), complex(M[1, 1])]], dtype=np.complex128)


def sector_index(zeta: complex) -> int:
    """k in {-3,...,2} with arg(zeta) in [k pi/3, (k+1) pi/3).

    Points on a ray go to the counterclockwise neighbour; arg = pi is
    identified with -pi.
    """
    a = math.atan2(zeta.imag, zeta.real)
    if a >= math.pi:
        a = -math.pi
    k = math.floor(3 * a / math.pi + 1e-15)
    return max(-3, min(2, k))


# ------------------------------------------------------------------ m = 0

def _l_vectors(zeta, y, which, series_radius):
    """Solution vectors l^0, l^+, l^- (sigma = +1) as mp column pairs."""
    c6 = mp.power(6, -mp.mpf(1) / 3)
    xi = c6 * (y + mp.mpf(3) / 2 * zeta * zeta)
    out = {}
    for key in which:
        w = {"0": mp.mpc(1), "+": mp.expjpi(mp.mpf(2) / 3), "-": mp.expjpi(-mp.mpf(2) / 3)}[key]
        ai, dai = airy_mp(w * xi, series_radius)
        out[key] = (ai, c6 * w * dai + zeta * ai / 2)
    return out


_COLUMNS = {
    0: (("0", "i"), ("-", "w-")),
    1: (("+", "e+"), ("-", "w-")),
    2: (("+", "e+"), ("0", "-1")),
    -3: (("-", "e-"), ("0", "-1")),
    -2: (("-", "e-"), ("+", "w+")),
    -1: (("0", "-i"), ("+", "w+")),
}


def _coef(tag):
    return {
        "i": mp.mpc(0, 1),
        "-i": mp.mpc(0, -1),
        "e+": mp.expjpi(mp.mpf(1) / 6),
        "e-": mp.expjpi(-mp.mpf(1) / 6),
        "w-": mp.expjpi(-mp.mpf(2) / 3),
        "w+": mp.expjpi(mp.mpf(2) / 3),
        "-1": mp.mpf(-1),
    }[tag]


def l0_matrix_mp(zeta, y, sector: int, series_radius=SWITCH_RADIUS):
    """L_0 = Z_0 exp(-theta sigma_3) using the formula of the given sector."""
    (k1, c1), (k2, c2) = _COLUMNS[sector]
    ls = _l_vectors(zeta, y, {k1, k2}, series_radius)
    pref = mp.power(48, mp.mpf(1) / 6) * mp.sqrt(mp.pi)
    a1, b1 = ls[k1]
    a2, b2 = ls[k2]
    f1 = pref * _coef(c1)
    f2 = pref * _coef(c2)
    return _mat(f1 * a1, f2 * a2, f1 * b1, f2 * b2)


def _theta(zeta, y):
    return (zeta ** 3 + y * zeta) / 2


def z0_mp(zeta, y, sector=None, series_radius=SWITCH_RADIUS):
    zeta = mp.mpc(zeta)
    y = mp.mpf(y) if not isinstance(y, mp.mpf) else y
    if sector is None:
        sector = sector_index(complex(zeta))
    L = l0_matrix_mp(zeta, y, sector, series_radius)
    th = _theta(zeta, y)
    e = mp.exp(th)
    ei = mp.exp(-th)
    return _mat(L[0, 0] * e, L[0, 1] * ei, L[1, 0] * e, L[1, 1] * ei)


def z0_eval(zeta: complex, y: float) -> np.ndarray:
    """Z_0(zeta; y) in double precision."""
    with mp.workdps(DPS):
        return _to_np(z0_mp(zeta, y))


# ------------------------------------------------------------------ ladder

def _exact(y) -> Fraction:
    return y if isinstance(y, Fraction) else Fraction(y)


def schlesinger_exact(entry: HierarchyEntry, y, direction: str):
    """(S1, S0) as nested lists of Fractions for one ladder step."""
    yq = _exact(y)
    if direction == "up":
        u = entry.U(yq)
        if u == 0:
            raise LadderBlocked(entry.m, "up", y)
        w = entry.W(yq)
        return [[-1, 0], [0, 0]], [[w / (3 * u), u], [-1 / u, 0]]
    if direction == "down":
        v = entry.V(yq)
        if v == 0:
            raise LadderBlocked(entry.m, "down", y)
        z = entry.Z(yq)
        return [[0, 0], [0, -1]], [[0, -1 / v], [v, z / (3 * v)]]
    raise ValueError("direction must be 'up' or 'down'")


def schlesinger_step(entry: HierarchyEntry, y: float, direction: str) -> tuple[np.ndarray, np.ndarray]:
    S1, S0 = schlesinger_exact(entry, y, direction)
    conv = lambda M: np.array([[complex(float(c)) for c in row] for row in M])
    return conv(S1), conv(S0)


@dataclass(frozen=True)
class InnerSolution:
    m: int
    y: float
    ladder: tuple = field(repr=False)   # ((S1, S0) exact) applied in order

    def prefactor_mp(self, zeta):
        P = mp.eye(2)
        for S1, S0 in self.ladder:
            F = _mat(*(mp.mpf(S1[i][j].numerator) / S1[i][j].denominator * zeta
                       + mp.mpf(S0[i][j].numerator) / S0[i][j].denominator
                       for i in range(2) for j in range(2)))
            P = F * P
        return P


def inner_solution(m: int, y: float, h: Hierarchy | None = None) -> InnerSolution:
    """Build the ladder from m = 0 to m; raises LadderBlocked on a zero pivot."""
    h = h or default_hierarchy()
    steps = []
    k = 0
    direction = "up" if m > 0 else "down"
    while k != m:
        S1, S0 = schlesinger_exact(h(k), y, direction)
        steps.append((tuple(tuple(Fraction(c) for c in r) for r in S1),
                      tuple(tuple(Fraction(c) for c in r) for r in S0)))
        k += 1 if m > 0 else -1
    return InnerSolution(m, float(y), tuple(steps))


def zm_mp(sol: InnerSolution, zeta, sector=None, series_radius=SWITCH_RADIUS):
    zeta = mp.mpc(zeta)
    return sol.prefactor_mp(zeta) * z0_mp(zeta, sol.y, sector, series_radius)


def zm_eval(sol: InnerSolution, zeta: complex) -> np.ndarray:
    with mp.workdps(DPS):
        return _to_np(zm_mp(sol, zeta))


def lm_mp(sol: InnerSolution, zeta, sector, series_radius=SWITCH_RADIUS):
    zeta = mp.mpc(zeta)
    return sol.prefactor_mp(zeta) * l0_matrix_mp(zeta, mp.mpf(sol.y), sector, series_radius)


# ------------------------------------------------------------------ expansion

@dataclass(frozen=True)
class ExpansionData:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    fitResidual: float
    imagLeak: float


def normalized_minus_identity(sol: InnerSolution, zeta: complex) -> np.ndarray:
    """Z_m(zeta)(-zeta)^{(1-2m) sigma_3/2} - I."""
    with mp.workdps(DPS):
        zeta_m = mp.mpc(zeta)
        Z = zm_mp(sol, zeta_m)
        p = mp.power(-zeta_m, mp.mpf(1 - 2 * sol.m) / 2)
        N = _mat(Z[0, 0] * p, Z[0, 1] / p, Z[1, 0] * p, Z[1, 1] / p)
        return _to_np(N) - np.eye(2)


def extract_coeffs(sol: InnerSolution, radius: float = 10.0, samples: int = 96,
                   terms: int = 18) -> ExpansionData:
    """Least-squares fit of Z_m (-zeta)^{(1-2m)sigma_3/2} - I in inverse powers.

    Samples sit at angles (j + 1/2) 2 pi / samples, which avoids the six rays
    when ``samples`` is a multiple of 6.  ``terms`` inverse powers are fitted;
    only the first three are reported.
    """
    if radius < 8:
        raise ValueError("radius must be at least 8")
    if samples < 24:
        raise ValueError("need at least 24 samples")
    if samples % 6:
        raise ValueError("samples must be a multiple of 6 so that no sample lies on a ray")
    if terms < 3:
        raise ValueError("need at least 3 fitted terms (A, B, C)")
    terms = min(terms, samples // 2)
    ang = (np.arange(samples) + 0.5) * 2 * np.pi / samples
    zetas = radius * np.exp(1j * ang)
    F = np.array([normalized_minus_identity(sol, z) for z in zetas])  # (n, 2, 2)
    # scaled basis (r/zeta)^k keeps the system orthonormal-ish
    X = np.stack([(radius / zetas) ** k for k in range(1, terms + 1)], axis=1)
    rhs = F.reshape(samples, 4)
    coef, *_ = np.linalg.lstsq(X, rhs, rcond=None)
    resid = float(np.sqrt(np.mean(np.abs(X @ coef - rhs) ** 2)))
    scale = radius ** np.arange(1, terms + 1)
    coef = coef * scale[:, None]
    mats = [coef[k].reshape(2, 2) for k in range(3)]
    leak = float(max(np.max(np.abs(M.imag)) / max(1.0, np.max(np.abs(M.real))) for M in mats))
    out = ExpansionData(mats[0].real.copy(), mats[1].real.copy(), mats[2].real.copy(),
                        max(resid, leak), leak)
    if out.fitResidual > 1e-4:
        raise ExtractionFailed(f"fit residual {out.fitResidual:.3e} exceeds 1e-4")
    return out


# ------------------------------------------------------------------ jumps

def ray_jump_matrix(sol: InnerSolution, ray: int, rho: float, dps: int = 40) -> np.ndarray:
    """J = L_-^{-1} L_+ on the ray arg zeta = ray*pi/3 at radius rho.

    The + side is the counterclockwise sector (rays point outward).  Full
    Maclaurin evaluation is used so the result is good to working precision.
    """
    with mp.workdps(dps):
        zeta = mp.mpf(rho) * mp.expjpi(mp.mpf(ray) / 3)
        k_plus = ((ray + 3) % 6) - 3
        k_minus = ((ray - 1 + 3) % 6) - 3
        big = float("inf")
        Lp = lm_mp(sol, zeta, k_plus, big)
        Lm = lm_mp(sol, zeta, k_minus, big)
        return _to_np(mp.inverse(Lm) * Lp)


def ray_jump_check(sol: InnerSolution, ray: int, radii=(1.0, 2.0, 3.0)) -> float:
    """Max entrywise spread of the jump matrix over the given radii."""
    if not 0 <= ray <= 5:
        raise ValueError("ray index must be in 0..5")
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    Js = [ray_jump_matrix(sol, ray, r) for r in radii]
    worst = 0.0
    for i in range(len(Js)):
        for j in range(i + 1, len(Js)):
            worst = max(worst, float(np.max(np.abs(Js[i] - Js[j]))))
    return worst


# ------------------------------------------------------------------ Lax pair

@dataclass(frozen=True)
class LaxReport:
    ry: float
    rzeta: float
    Cy: float
    Czeta: float


def lax_residual(y: float, zeta: complex, h: float) -> LaxReport:
    """Central-difference residuals of both m = 0 Lax equations.

    r = |(dL) L^{-1} - M|_max, where dL is the central difference and M the
    coefficient matrix.  The same sector formula is used at all stencil points.
    """
    if not 1e-6 <= h <= 1e-3:
        raise ValueError("h must lie in [1e-6, 1e-3]")
    k = sector_index(complex(zeta))
    sol = inner_solution(0, y)
    with mp.workdps(DPS):
        z = mp.mpc(zeta)
        yy = mp.mpf(y)
        hh = mp.mpf(h)
        L = l0_matrix_mp(z, yy, k)
        Li = mp.inverse(L)
        dLy = (l0_matrix_mp(z, yy + hh, k) - l0_matrix_mp(z, yy - hh, k)) / (2 * hh)
        dLz = (l0_matrix_mp(z + hh, yy, k) - l0_matrix_mp(z - hh, yy, k)) / (2 * hh)
        My = _mat(-z / 2, 1, yy / 6, z / 2)
        Mz = _mat(-mp.mpf(3) / 2 * z * z, 3 * z, (yy * z + 1) / 2, mp.mpf(3) / 2 * z * z)
        ry = float(max(abs(x) for x in (dLy * Li - My)))
        rz = float(max(abs(x) for x in (dLz * Li - Mz)))
    del sol
    return LaxReport(ry, rz, ry / h ** 2, rz / h ** 2)
