"""Rational solutions of the coupled Painleve-II system, generated exactly.

Base entry (m = 0): U = 1, V = -y/6.  Raising and lowering steps:

    U_{m+1} = -(y/6) U - U'^2/U + U''/2,     V_{m+1} = 1/U_m
    U_{m-1} = 1/V_m,                         V_{m-1} = V''/2 - V'^2/V - (y/6) V

W = -3U', Z = 3V' and H = WZ/6 - (3/2)U^2V^2 - yUV/2.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

from .ratpoly import (
    Poly,
    RatFun,
    RootBox,
    poly_real_roots,
    ratfun_from_json,
    ratfun_to_json,
    sturm_count,
)

DEFAULT_BOUND = 8
DEFAULT_WIDTH = Fraction(1, 10**12)


class HierarchyError(RuntimeError):
    """Raised when an exact identity of the hierarchy fails."""


class BoundError(ValueError):
    pass


_Y = RatFun.y()
_SIXTH = Fraction(1, 6)


def raise_step(U: RatFun, V: RatFun) -> tuple[RatFun, RatFun]:
    dU = U.deriv()
    U_new = -_SIXTH * _Y * U - dU * dU / U + dU.deriv() * Fraction(1, 2)
    return U_new, U.inverse()


def lower_step(U: RatFun, V: RatFun) -> tuple[RatFun, RatFun]:
    dV = V.deriv()
    V_new = dV.deriv() * Fraction(1, 2) - dV * dV / V - _SIXTH * _Y * V
    return V.inverse(), V_new


class HierarchyEntry:
    """(U, V, W, Z, H) at index m, with lazily cached root data."""

    def __init__(self, m: int, U: RatFun, V: RatFun, width: Fraction = DEFAULT_WIDTH):
        self.m = m
        self.U = U
        self.V = V
        self.width = width

    @cached_property
    def dU(self) -> RatFun:
        return self.U.deriv()

    @cached_property
    def dV(self) -> RatFun:
        return self.V.deriv()

    @cached_property
    def W(self) -> RatFun:
        return self.dU * -3

    @cached_property
    def Z(self) -> RatFun:
        return self.dV * 3

    @cached_property
    def H(self) -> RatFun:
        U, V = self.U, self.V
        UV = U * V
        return self.W * self.Z * _SIXTH - UV * UV * Fraction(3, 2) - _Y * UV * Fraction(1, 2)

    @cached_property
    def B12(self) -> RatFun:
        return self.H * self.U * 2 - self.dU

    @cached_property
    def B21(self) -> RatFun:
        return self.dV - self.H * self.V * 2

    @cached_property
    def zerosU(self) -> list[RootBox]:
        return _roots(self.U.num, self.width)

    @cached_property
    def polesU(self) -> list[RootBox]:
        return _roots(self.U.den, self.width)

    @cached_property
    def zerosV(self) -> list[RootBox]:
        return _roots(self.V.num, self.width)

    @cached_property
    def polesV(self) -> list[RootBox]:
        return _roots(self.V.den, self.width)

    def floats(self) -> dict[str, list[float]]:
        """Root midpoints as doubles (region geometry works in floats)."""
        return {
            "zerosU": [float(b) for b in self.zerosU],
            "polesU": [float(b) for b in self.polesU],
            "zerosV": [float(b) for b in self.zerosV],
            "polesV": [float(b) for b in self.polesV],
        }

    def to_json(self) -> dict:
        def boxes(bs):
            return [[str(b.low), str(b.high)] for b in bs]

        return {
            "m": self.m,
            "U": ratfun_to_json(self.U),
            "V": ratfun_to_json(self.V),
            "W": ratfun_to_json(self.W),
            "Z": ratfun_to_json(self.Z),
            "H": ratfun_to_json(self.H),
            "zerosU": boxes(self.zerosU),
            "polesU": boxes(self.polesU),
            "zerosV": boxes(self.zerosV),
            "polesV": boxes(self.polesV),
        }


def _roots(p: Poly, width: Fraction) -> list[RootBox]:
    if p.degree <= 0:
        return []
    return poly_real_roots(p, width)


class Hierarchy:
    """Memoized generator.  Reads are lock-free; generation takes a lock."""

    def __init__(self, bound: int = DEFAULT_BOUND, width: Fraction = DEFAULT_WIDTH,
                 cache_dir: str | os.PathLike | None = None):
        self.bound = bound
        self.width = Fraction(width)
        self._entries: dict[int, HierarchyEntry] = {}
        self._lock = threading.Lock()
        if cache_dir is None:
            cache_dir = os.environ.get("SEPLAB_CACHE")
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._put(0, RatFun.const(1), RatFun(Poly([0, Fraction(-1, 6)])))

    def _put(self, m, U, V):
        self._entries[m] = HierarchyEntry(m, U, V, self.width)

    def _load_cached(self, m: int) -> bool:
        if self.cache_dir is None:
            return False
        path = self.cache_dir / f"entry_{m}.json"
        if not path.exists():
            return False
        try:
            obj = json.loads(path.read_text())
            self._put(m, ratfun_from_json(obj["U"]), ratfun_from_json(obj["V"]))
        except (OSError, ValueError, KeyError):
            return False
        return True

    def _store_cached(self, m: int):
        if self.cache_dir is None:
            return
        e = self._entries[m]
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            obj = {"m": m, "U": ratfun_to_json(e.U), "V": ratfun_to_json(e.V)}
            (self.cache_dir / f"entry_{m}.json").write_text(json.dumps(obj))
        except OSError:
            pass

    def __call__(self, m: int) -> HierarchyEntry:
        e = self._entries.get(m)
        if e is not None:
            return e
        if abs(m) > self.bound:
            raise BoundError(f"|m| = {abs(m)} exceeds bound B = {self.bound}")
        with self._lock:
            step = 1 if m > 0 else -1
            k = m
            while k not in self._entries:
                k -= step
            while k != m:
                prev = self._entries[k]
                k += step
                if not self._load_cached(k):
                    if step > 0:
                        U, V = raise_step(prev.U, prev.V)
                    else:
                        U, V = lower_step(prev.U, prev.V)
                    self._put(k, U, V)
                    self._store_cached(k)
        return self._entries[m]


_default = Hierarchy()


def default_hierarchy() -> Hierarchy:
    return _default


def hierarchy(m: int, h: Hierarchy | None = None) -> HierarchyEntry:
    return (h or _default)(m)


def hamiltonian(m: int, h: Hierarchy | None = None) -> RatFun:
    return hierarchy(m, h).H


def b_entries(m: int, h: Hierarchy | None = None) -> tuple[RatFun, RatFun]:
    e = hierarchy(m, h)
    B12, B21 = e.B12, e.B21
    if B12 != e.W * Fraction(1, 3) + e.H * e.U * 2 or B21 != e.Z * Fraction(1, 3) - e.H * e.V * 2:
        raise HierarchyError(f"B-entry forms disagree at m={m}")
    return B12, B21


def lambda_check(m: int, h: Hierarchy | None = None) -> Fraction:
    e = hierarchy(m, h)
    lam = e.V * e.dU - e.U * e.dV
    if not lam.is_const():
        raise HierarchyError(f"V U' - U V' is not constant at m={m}")
    val = lam.const_value()
    if val != _SIXTH - Fraction(m, 3):
        raise HierarchyError(f"lambda_{m} = {val}, expected {_SIXTH - Fraction(m, 3)}")
    return val


def pii_residuals(m: int, h: Hierarchy | None = None) -> tuple[RatFun, RatFun, RatFun, RatFun]:
    """Residuals of the coupled system and of the two scalar PII equations.

    The scalar residuals are returned with denominators cleared
    (numerator polynomial only), so zero means an exact polynomial identity.
    """
    e = hierarchy(m, h)
    U, V, y = e.U, e.V, _Y
    r1 = e.dU.deriv() + U * U * V * 2 + y * U * Fraction(1, 3)
    r2 = e.dV.deriv() + U * V * V * 2 + y * V * Fraction(1, 3)
    r3 = _scalar_pii_residual(U, -Fraction(2, 3) * m)
    r4 = _scalar_pii_residual(V, Fraction(2, 3) * (m - 1))
    return r1, r2, r3, r4


def _scalar_pii_residual(F: RatFun, alpha: Fraction) -> RatFun:
    """Residual of P'' = 2P^3 + (2/3) y P + alpha for P = F'/F.

    With F = n/d and P = (n'd - nd')/(nd) the residual is assembled over the
    common denominator (nd)^3 and only its numerator is kept.
    """
    n, d = F.num, F.den
    x = Poly.x()
    a = n.deriv() * d - n * d.deriv()   # P = a / b
    b = n * d
    da, db = a.deriv(), b.deriv()
    # P' = (a'b - ab')/b^2 ; P'' = c/b^3 with
    c = (da.deriv() * b - a * db.deriv()) * b - (da * b - a * db) * db * 2
    res = c - a * a * a * 2 - x * a * b * b * Fraction(2, 3) - b * b * b * alpha
    return RatFun(res)


def pole_residue(m: int, box: RootBox, h: Hierarchy | None = None) -> Fraction:
    """Residue k of U_m at the pole isolated by ``box``.

    The pairing res(V_m) = -1/k is certified exactly by polynomial remainder
    against the squarefree denominator.  The returned k is exact when the
    pole is rational, otherwise a rational value within the box resolution.
    """
    e = hierarchy(m, h)
    D, N = e.U.den, e.U.num
    if sturm_count(D, box.low, box.high) != 1:
        raise HierarchyError("box does not isolate a pole of U_m")
    if D.sign_at(box.low) * D.sign_at(box.high) >= 0 and box.exact is None:
        raise HierarchyError("pole is not simple")
    dD = D.deriv()
    if box.exact is not None and dD(box.exact) == 0:
        raise HierarchyError("pole is not simple")
    # exact pairing: N_U N_V + D_U' D_V' vanishes at every root of D_U
    Dv = e.V.den
    if (N * e.V.num + dD * Dv.deriv()) % _squarefree(D) != Poly():
        raise HierarchyError(f"residue pairing k <-> -1/k fails at m={m}")
    if box.exact is not None:
        return N(box.exact) / dD(box.exact)
    y0 = box.mid
    return N(y0) / dD(y0)


def _squarefree(p: Poly) -> Poly:
    from .ratpoly import poly_gcd

    return p.monic() // poly_gcd(p, p.deriv())


@dataclass(frozen=True)
class ConfinementReport:
    zV: Fraction           # value of V_{m+1} at the pole (certified 0)
    zU: Fraction           # value of U_{m-1} at the pole (certified 0)
    signV: int             # sign of V_{m+1}' there
    signU: int             # sign of U_{m-1}' there


def _simple_zero_sign(F: RatFun, box: RootBox) -> int:
    """Certify F has a finite simple zero in box; return sign of F' there."""
    if F.den.degree > 0 and sturm_count(F.den, box.low, box.high) != 0:
        raise HierarchyError("confinement violated: pole inside box")
    if F.num.is_zero() or sturm_count(F.num, box.low, box.high) != 1:
        raise HierarchyError("confinement violated: no zero inside box")
    if box.exact is not None:
        if F.num(box.exact) != 0:
            raise HierarchyError("confinement violated: no zero at pole")
        d = F.deriv()(box.exact)
        if d == 0:
            raise HierarchyError("confinement violated: zero is not simple")
        return 1 if d > 0 else -1
    # no exact point: the zero is simple iff the numerator changes sign once
    sl = F.num.sign_at(box.low) * F.den.sign_at(box.low)
    sh = F.num.sign_at(box.high) * F.den.sign_at(box.high)
    if sl == 0 or sh == 0 or sl == sh:
        raise HierarchyError("confinement violated: zero is not simple")
    # multiplicity check on the numerator itself
    from .ratpoly import poly_gcd

    g = poly_gcd(F.num, F.num.deriv())
    if g.degree > 0 and sturm_count(g, box.low, box.high) > 0:
        raise HierarchyError("confinement violated: zero is not simple")
    return 1 if sh > sl else -1


def confinement_check(m: int, box: RootBox, h: Hierarchy | None = None) -> ConfinementReport:
    """Both V_{m+1} and U_{m-1} vanish simply at a pole of U_m."""
    e = hierarchy(m, h)
    if e.U.den.degree == 0 or sturm_count(e.U.den, box.low, box.high) != 1:
        raise HierarchyError("box does not isolate a pole of U_m")
    sV = _simple_zero_sign(hierarchy(m + 1, h).V, box)
    sU = _simple_zero_sign(hierarchy(m - 1, h).U, box)
    return ConfinementReport(Fraction(0), Fraction(0), sV, sU)
