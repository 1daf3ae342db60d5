"""Asymptotic models near the separatrix crossing and exact sine-Gordon references.

Everything here is evaluated in double precision from the exact hierarchy in
:mod:`seplab.pii`.  Angles are reported as the half-angle pair
(cos(u/2), sin(u/2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pii import Hierarchy, default_hierarchy

PLUS, MINUS = "+", "-"
STRIP_TOL = 1e-9   # strips are closed; absorbs rounding in p at shared edges


class ClassificationGap(RuntimeError):
    """A covered point fell in no region (should not happen for kappa = 0)."""


class OutsideRegion(ValueError):
    pass


class UnwrapError(ValueError):
    """Neighbouring samples too far apart to unwrap the angle unambiguously."""


@dataclass(frozen=True)
class RegionParams:
    eps: float
    delta: float = 0.2
    kappa: float = 0.0
    B: int = 6

    def __post_init__(self):
        if not self.delta > 0 or self.kappa < 0 or not 0 < self.eps < 1:
            raise ValueError(f"bad region parameters {self}")

    @property
    def L(self) -> float:
        return math.log(1 / self.eps)

    @property
    def half_width(self) -> float:
        """Half height of each strip in the p variable."""
        return self.L / 3 + self.kappa


@dataclass(frozen=True, order=True)
class RegionLabel:
    m: int
    sign: str

    def __str__(self):
        return f"({self.m},{self.sign})"


@dataclass(frozen=True)
class ModelOutput:
    cosHalf: float
    sinHalf: float
    saturated: bool = False

    def as_tuple(self):
        return (self.cosHalf, self.sinHalf)


def _sgn(m: int) -> int:
    return -1 if m % 2 else 1


def _sign(sign: str) -> str:
    if sign not in (PLUS, MINUS):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return sign


def _ev(F, z):
    """Float evaluation of a RatFun with IEEE semantics at poles."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return F.eval_float(np.float64(z) if np.isscalar(z) else np.asarray(z, float))


# --------------------------------------------------------------- regions

class _Singularities:
    """Root boxes of U_m, V_m cached per hierarchy."""

    def __init__(self, h: Hierarchy):
        self.h = h
        self._c = {}

    def get(self, m: int, what: str):
        key = (m, what)
        if key not in self._c:
            e = self.h(m)
            self._c[key] = [(float(b.low), float(b.high)) for b in getattr(e, what)]
        return self._c[key]


_SING: dict[int, _Singularities] = {}


def _sing(h: Hierarchy | None) -> _Singularities:
    h = h or default_hierarchy()
    s = _SING.get(id(h))
    if s is None or s.h is not h:
        s = _SING[id(h)] = _Singularities(h)
    return s


def dist_to_set(y: float, boxes) -> float:
    """Distance from y to a union of root boxes (0 inside a box, inf if empty)."""
    d = math.inf
    for lo, hi in boxes:
        d = min(d, max(0.0, lo - y, y - hi))
    return d


def min_singularity_gap(B: int, h: Hierarchy | None = None) -> float:
    """Smallest distance between consecutive real zeros/poles of U_m or V_m, |m| <= B."""
    S = _sing(h)
    gap = math.inf
    for m in range(-B, B + 1):
        for a, b in (("zerosU", "polesU"), ("zerosV", "polesV")):
            pts = sorted(0.5 * (lo + hi) for lo, hi in S.get(m, a) + S.get(m, b))
            for u, v in zip(pts, pts[1:]):
                gap = min(gap, v - u)
    return gap


def check_delta(rp: RegionParams, h: Hierarchy | None = None) -> float:
    gap = min_singularity_gap(rp.B, h)
    if not rp.delta < gap / 2:
        raise ValueError(f"delta = {rp.delta} not below half the minimal gap {gap}")
    return gap


def p_value(s: float, m: int, eps: float) -> float:
    return s / eps - 2 * m / 3 * math.log(1 / eps)


def in_region(label: RegionLabel, y: float, p: float, rp: RegionParams, h=None) -> bool:
    """Membership of (y, p) in Omega_m^sign.

    ``p`` is p_m for the plus family and p_{m-1} for the minus family.
    """
    if abs(p) > rp.half_width + STRIP_TOL:
        return False
    S = _sing(h)
    m = label.m
    if _sign(label.sign) == PLUS:
        if p <= 0:
            return dist_to_set(y, S.get(m, "polesU")) >= rp.delta * math.exp(p / 2)
        return dist_to_set(y, S.get(m, "zerosU")) <= rp.delta * math.exp(-p / 2)
    if p >= 0:
        return dist_to_set(y, S.get(m, "polesV")) >= rp.delta * math.exp(-p / 2)
    return dist_to_set(y, S.get(m, "zerosV")) <= rp.delta * math.exp(p / 2)


def region_classify(y: float, s: float, rp: RegionParams, h=None) -> list[RegionLabel]:
    """All labels (m, sign) with |m| <= B whose region contains (y, s)."""
    eps = rp.eps
    L = rp.L
    # strips containing s in the p_m variable
    lo = math.floor((3 * s / (eps * L) - 1) / 2 - 3 * rp.kappa / (2 * L)) - 1
    hi = math.ceil((3 * s / (eps * L) + 1) / 2 + 3 * rp.kappa / (2 * L)) + 1
    covered = False
    out = set()
    for m in range(lo, hi + 1):
        p = p_value(s, m, eps)
        if abs(p) > rp.half_width + STRIP_TOL:
            continue
        # strip m hosts (m,+) and (m+1,-), both read p_m
        for lab in (RegionLabel(m, PLUS), RegionLabel(m + 1, MINUS)):
            if abs(lab.m) > rp.B:
                continue
            covered = True
            if in_region(lab, y, p, rp, h):
                out.add(lab)
    if not covered:
        raise OutsideRegion(f"s = {s} outside the strips covered by B = {rp.B}")
    if not out:
        raise ClassificationGap(f"(y, s) = ({y}, {s}) lies in no region")
    return sorted(out)


def tooth_tips(m: int, rp: RegionParams, h=None):
    """Tooth tips of Omega_{m-1}^+ (top of its strip) and Omega_{m+1}^- (bottom).

    Returns two lists of (center, s, half_width); the two families sit over the
    same root boxes since zeros of U_{m-1} are zeros of V_{m+1}.
    """
    S = _sing(h)
    eps, w = rp.eps, rp.half_width
    up = []
    for lo, hi in S.get(m - 1, "zerosU"):
        s = eps * (w + 2 * (m - 1) / 3 * rp.L)
        up.append((0.5 * (lo + hi), s, rp.delta * math.exp(-w / 2)))
    down = []
    for lo, hi in S.get(m + 1, "zerosV"):
        s = eps * (-w + 2 * m / 3 * rp.L)
        down.append((0.5 * (lo + hi), s, rp.delta * math.exp(-w / 2)))
    return up, down


def error_envelope(m: int, sign: str, y: float, p: float, eps: float, rp: RegionParams, h=None) -> float:
    """Piecewise accuracy bound e_m^sign at (y, p)."""
    lab = RegionLabel(m, _sign(sign))
    if not in_region(lab, y, p, rp, h):
        raise OutsideRegion(f"({y}, {p}) is not in Omega{lab}")
    S = _sing(h)
    e3 = eps ** (1 / 3)
    if sign == PLUS:
        dz = dist_to_set(y, S.get(m, "zerosU"))
        dp = dist_to_set(y, S.get(m, "polesU"))
        if p > 0 and dz >= rp.delta * math.exp(-p):
            return e3 * math.exp(p) * dz
    else:
        dz = dist_to_set(y, S.get(m, "zerosV"))
        dp = dist_to_set(y, S.get(m, "polesV"))
        if p < 0 and dz >= rp.delta * math.exp(p):
            return e3 * math.exp(-p) * dz
    if dp <= rp.delta:
        return e3 / dp
    return e3


# --------------------------------------------------------------- kinks

def _log4nu(nu: float, eps: float) -> float:
    return math.log(4 * nu ** (1 / 3) / eps ** (1 / 3))


def _sech_tanh(T):
    with np.errstate(over="ignore"):
        return 1 / np.cosh(T), np.tanh(T)


def kink_phase(m: int, z, t, eps: float, nu: float, h=None):
    """T_K and sgn(U_m(z)); vectorized over z, t."""
    U = _ev((h or default_hierarchy())(m).U, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        T = np.asarray(t) / eps - 2 * m * _log4nu(nu, eps) + np.log(np.abs(U))
    return np.nan_to_num(T, nan=np.inf, posinf=np.inf, neginf=-np.inf), np.sign(np.nan_to_num(U, nan=0.0))


def kink_model(m: int, z: float, t: float, eps: float, nu: float, h=None) -> ModelOutput:
    """Superluminal kink near the center of strip m."""
    T, sg = kink_phase(m, z, t, eps, nu, h)
    se, th = _sech_tanh(T)
    sat = not np.isfinite(T)
    return ModelOutput(float(_sgn(m) * sg * se), float(-_sgn(m) * th), bool(sat))


def kink_center_curve(m: int, zRange, eps: float, nu: float, n: int, h=None):
    """Samples (z, t) of the curve T_K = 0.

    A row (z, nan) separates branches whenever a zero or pole of U_m lies
    between consecutive samples.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    e = (h or default_hierarchy())(m)
    zs = np.linspace(zRange[0], zRange[1], n)
    U = _ev(e.U, zs)
    with np.errstate(divide="ignore"):
        ts = eps * (2 * m * _log4nu(nu, eps) - np.log(np.abs(U)))
    marks = sorted(0.5 * (float(b.low) + float(b.high)) for b in e.zerosU + e.polesU)
    out = []
    for i, (z, t) in enumerate(zip(zs, ts)):
        if i and any(zs[i - 1] < r <= z for r in marks):
            out.append((float(0.5 * (zs[i - 1] + z)), math.nan))
        out.append((float(z), float(t) if np.isfinite(t) else math.nan))
    return out


def grazing_model(m: int, z0: float, z: float, t: float, eps: float, nu: float, h=None,
                  tol: float = 1e-9) -> ModelOutput:
    """Grazing collision near a simple real zero z0 of U_{m-1}.

    ``z`` is the critical coordinate of the point, X_G = 2 (nu/eps)^{1/3} (z - z0).
    """
    e = (h or default_hierarchy())(m - 1)
    if not any(float(b.low) - tol <= z0 <= float(b.high) + tol and b.multiplicity == 1
               for b in e.zerosU):
        raise ValueError(f"z0 = {z0} is not a simple real zero of U_{m - 1}")
    d = float(_ev(e.dU, z0))
    X = 2 * (nu / eps) ** (1 / 3) * (z - z0)
    T = t / eps - (2 * m - 1) * _log4nu(nu, eps) + math.log(abs(d))
    se = float(_sech_tanh(T)[0])
    q = X * X * se * se
    c = _sgn(m - 1) * math.copysign(1.0, d) * 2 * X * se / (1 + q)
    s = _sgn(m - 1) * (1 - q) / (1 + q)
    return ModelOutput(c, s)


def grazing_time(m: int, z0: float, eps: float, nu: float, TG: float = 0.0, h=None) -> float:
    """The t at which T_G takes the value TG."""
    d = float(_ev((h or default_hierarchy())(m - 1).dU, z0))
    return eps * (TG + (2 * m - 1) * _log4nu(nu, eps) - math.log(abs(d)))


def superpose(a: ModelOutput, b: ModelOutput, base: ModelOutput) -> ModelOutput:
    """Half-angle sum a + b - base (two well separated kinks over a common state)."""
    th = (math.atan2(a.sinHalf, a.cosHalf) + math.atan2(b.sinHalf, b.cosHalf)
          - math.atan2(base.sinHalf, base.cosHalf))
    return ModelOutput(math.cos(th), math.sin(th))


def overlap_difference(m: int, z0: float, eps: float, nu: float, offset: float, h=None) -> float:
    """Max component difference between the grazing model and the two kinks.

    Evaluated at T_G = 0 and z = z0 +- offset.  The kinks of index m-1 and m
    are combined by adding their half-angle deviations from the common
    background state sin(u/2) = (-1)^m.
    """
    t = grazing_time(m, z0, eps, nu, 0.0, h)
    base = ModelOutput(0.0, float(_sgn(m)))
    worst = 0.0
    for z in (z0 - offset, z0 + offset):
        g = grazing_model(m, z0, z, t, eps, nu, h)
        k = superpose(kink_model(m - 1, z, t, eps, nu, h), kink_model(m, z, t, eps, nu, h), base)
        worst = max(worst, abs(g.cosHalf - k.cosHalf), abs(g.sinHalf - k.sinHalf))
    return worst


# --------------------------------------------------------------- exact references

def exact_kink(T, sigma: int = 1):
    """(cos u, sin u) for the homoclinic solution of u'' + sin u = 0."""
    se, th = _sech_tanh(np.asarray(T, dtype=float))
    return 2 * se * se - 1, -2 * sigma * se * th


def exact_grazing(X, T, kappaSign: int = 1):
    """(cos u, sin u) for the double-pole two-kink solution."""
    X = np.asarray(X, dtype=float)
    se = _sech_tanh(np.asarray(T, dtype=float))[0]
    q = X * X * se * se
    den = (1 + q) ** 2
    return 8 * q / den - 1, 4 * kappaSign * X * se * (1 - q) / den


def unwrap_grid(cosU, sinU, max_step: float = math.pi / 2):
    """Continuous angle from (cos, sin) samples, row-major from index (0, 0).

    Column 0 is unwrapped first, then each row from its first entry.
    """
    w = np.arctan2(np.asarray(sinU, float), np.asarray(cosU, float))
    if w.ndim == 1:
        w = w[None, :]

    def steps(a, axis):
        d = np.diff(a, axis=axis)
        d = (d + np.pi) % (2 * np.pi) - np.pi
        if np.any(np.abs(d) > max_step):
            raise UnwrapError("angle jumps between neighbours; refine the grid")
        return d

    col = np.concatenate([w[:1, 0], w[0, 0] + np.cumsum(steps(w[:, 0], 0))])
    d = steps(w, 1)
    u = np.empty_like(w)
    u[:, 0] = col
    u[:, 1:] = col[:, None] + np.cumsum(d, axis=1)
    return u


def sg_residual(cosU, sinU, h: float) -> float:
    """max |u_TT - u_XX + sin u| on interior nodes; arrays are indexed [T, X]."""
    u = unwrap_grid(cosU, sinU)
    if u.shape[0] < 3 or u.shape[1] < 3:
        raise ValueError("need at least a 3x3 grid")
    c = u[1:-1, 1:-1]
    utt = (u[2:, 1:-1] - 2 * c + u[:-2, 1:-1]) / h ** 2
    uxx = (u[1:-1, 2:] - 2 * c + u[1:-1, :-2]) / h ** 2
    return float(np.max(np.abs(utt - uxx + np.sin(c))))


# --------------------------------------------------------------- multiscale model

def _rdot(m: int, sign: str, z, q, eps: float, nu: float, h=None):
    e = (h or default_hierarchy())(m)
    z = np.asarray(z, float)
    q = np.asarray(q, float)
    e23 = eps ** (2 / 3)
    with np.errstate(invalid="ignore", over="ignore"):
        if sign == PLUS:
            F, Bv = _ev(e.U, z), _ev(e.B12, z)
            num = -(2.0 ** (4 * (1 - m))) * nu ** (-2 * m / 3) * np.exp(q) * F
            den = 2.0 ** (-8 * m) * nu ** (-2 * (1 + 2 * m) / 3) * e23 * np.exp(2 * q) * Bv * Bv + 16
        else:
            F, Bv = _ev(e.V, z), _ev(e.B21, z)
            num = -(2.0 ** (4 * m)) * nu ** (2 * (m - 1) / 3) * np.exp(-q) * F
            den = 2.0 ** (8 * (m - 1)) * nu ** (-2 + 4 * m / 3) * e23 * np.exp(-2 * q) * Bv * Bv + 16
        R = num / den
    bad = ~np.isfinite(R)
    # at a pole the B-entry dominates and R -> 0
    R = np.where(bad, 0.0, R)
    return R, bad


def multiscale_arrays(m: int, sign: str, z, q, eps: float, nu: float, h=None):
    """(Cdot, Sdot, saturated) arrays; q is q_m for '+' and q_{m-1} for '-'."""
    R, bad = _rdot(m, _sign(sign), z, q, eps, nu, h)
    s = _sgn(m + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        big = np.abs(R) > 1e150
        R2 = np.where(big, 1.0, R * R)
        C = np.where(big, 0.0, 2 * R / (R2 + 1))
        S = np.where(big, 1.0, (R2 - 1) / (R2 + 1))
    C = s * C if sign == PLUS else -s * C
    return C, s * S, bad


def multiscale_model(m: int, sign: str, z: float, q: float, eps: float, nu: float, h=None) -> ModelOutput:
    C, S, bad = multiscale_arrays(m, sign, z, q, eps, nu, h)
    return ModelOutput(float(C), float(S), bool(bad))


@dataclass(frozen=True)
class OverlapReport:
    outputs: list          # (label, ModelOutput, envelope) for every region holding the point
    maxDiff: float
    disagree: bool         # some pair differs by more than the sum of its envelopes


def multiscale_overlap(y: float, s: float, nu: float, rp: RegionParams, h=None) -> OverlapReport:
    """Evaluate the multiscale model in every region containing (y, s).

    Where regions overlap (kappa > 0, or a shared boundary) no single formula
    is preferred; all are returned and disagreement beyond envelopes flagged.
    """
    outs = []
    for lab in region_classify(y, s, rp, h):
        p = p_value(s, lab.m if lab.sign == PLUS else lab.m - 1, rp.eps)
        mo = multiscale_model(lab.m, lab.sign, y, p, rp.eps, nu, h)
        outs.append((lab, mo, error_envelope(lab.m, lab.sign, y, p, rp.eps, rp, h)))
    worst, flag = 0.0, False
    for i, (_, a, ea) in enumerate(outs):
        for _, b, eb in outs[i + 1:]:
            d = max(abs(a.cosHalf - b.cosHalf), abs(a.sinHalf - b.sinHalf))
            worst = max(worst, d)
            flag |= d > ea + eb
    return OverlapReport(outs, worst, flag)


def multiscale_field(xs, ts, eps: float, nu: float, xCrit: float, h=None, B: int = 6):
    """(cos(u/2), sin(u/2)) on a grid [t, x], using region (m,+) of the strip holding t.

    The plus family already covers the whole strip up to its envelopes, so
    the choice of representative is immaterial at leading order.
    """
    xs = np.asarray(xs, float)
    L = math.log(1 / eps)
    z = (xs - xCrit) / (2 * nu ** (1 / 3) * eps ** (2 / 3))
    C = np.empty((len(ts), len(xs)))
    S = np.empty_like(C)
    for i, t in enumerate(ts):
        m = math.ceil((3 * t / (eps * L) - 1) / 2 - 1e-12)
        if abs(m) > B:
            raise OutsideRegion(f"t = {t} lies in strip {m}, beyond |m| <= {B}")
        q = t / eps - 2 * m / 3 * L
        C[i], S[i], _ = multiscale_arrays(m, PLUS, z, np.full_like(z, q), eps, nu, h)
    return C, S


def g_model(z: float = 0.0, q0: float = 0.0) -> float:
    """Leading-order eps*u_t at the critical point: -(S + 1/S) with S = 1."""
    S = 1.0
    return -(S + 1 / S)
