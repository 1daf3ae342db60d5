"""Exact polynomials and rational functions over Q, with real-root isolation.

Coefficients are ``fractions.Fraction``; nothing in this module ever falls
back to floating point except the explicit float evaluation helpers.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction]


class PoleError(ZeroDivisionError):
    """Evaluation of a rational function at one of its poles."""

    def __init__(self, location):
        super().__init__(f"pole at y = {location}")
        self.location = location


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        return Fraction(c)
    return Fraction(c)


class Poly:
    """Univariate polynomial, coefficients in ascending degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Number] = ()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    # construction helpers
    @classmethod
    def const(cls, c: Number) -> "Poly":
        return cls([c])

    @classmethod
    def x(cls) -> "Poly":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({[str(c) for c in self.coeffs]})"

    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly([a[i] + (b[i] if i < len(b) else 0) for i in range(len(a))])

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return Poly.const(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = _frac(other)
            return Poly([c * a for a in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(), self
        q = [Fraction(0)] * (dq + 1)
        lead = other.coeffs[-1]
        ob = other.coeffs
        for k in range(dq, -1, -1):
            c = rem[k + len(ob) - 1] / lead
            q[k] = c
            if c:
                for j, bj in enumerate(ob):
                    rem[k + j] -= c * bj
        return Poly(q), Poly(rem[: len(ob) - 1])

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * (1 / self.lead)

    def deriv(self) -> "Poly":
        return Poly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, y):
        """Horner evaluation; exact for rational ``y``."""
        acc = 0 * y if not isinstance(y, int) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * y + c
        return acc

    def eval_float(self, y):
        """Fast double evaluation (works elementwise on numpy arrays)."""
        acc = 0.0 * y
        for c in reversed(self.coeffs):
            acc = acc * y + float(c)
        return acc

    def sign_at(self, y: Fraction) -> int:
        v = self(y)
        return (v > 0) - (v < 0)

    def scale_to_integers(self) -> tuple[list[int], int]:
        """Return (integer coefficients, common denominator)."""
        from math import lcm

        d = 1
        for c in self.coeffs:
            d = lcm(d, c.denominator)
        return [int(c * d) for c in self.coeffs], d


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd by the Euclidean algorithm (monic remainders keep sizes tame)."""
    a, b = a.monic(), b.monic()
    while not b.is_zero():
        a, b = b, (a % b).monic()
    return a.monic()


class RatFun:
    """Canonical num/den with gcd(num, den) = 1 and den monic."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, *, _canonical: bool = False):
        if den is None:
            den = Poly.const(1)
        if not _canonical:
            num, den = _canonicalize(num, den)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, c: Number) -> "RatFun":
        return cls(Poly.const(c))

    @classmethod
    def y(cls) -> "RatFun":
        return cls(Poly.x())

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_const(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    def const_value(self) -> Fraction:
        if not self.is_const():
            raise ValueError("not a constant rational function")
        return self.num.lead if not self.num.is_zero() else Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatFun):
            other = RatFun.const(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"RatFun({self.num!r} / {self.den!r})"

    def __add__(self, other) -> "RatFun":
        if not isinstance(other, RatFun):
            other = RatFun.const(other)
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den, _canonical=True)

    def __sub__(self, other) -> "RatFun":
        if not isinstance(other, RatFun):
            other = RatFun.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "RatFun":
        return RatFun.const(other) - self

    def __mul__(self, other) -> "RatFun":
        if not isinstance(other, RatFun):
            c = _frac(other)
            return RatFun(self.num * c, self.den, _canonical=True) if c else RatFun(Poly())
        # cross-cancel first to keep intermediate degrees small
        g1 = poly_gcd(self.num, other.den) if not self.num.is_zero() else Poly.const(1)
        g2 = poly_gcd(other.num, self.den) if not other.num.is_zero() else Poly.const(1)
        return RatFun((self.num // g1) * (other.num // g2), (self.den // g2) * (other.den // g1))

    __rmul__ = __mul__

    def inverse(self) -> "RatFun":
        if self.is_zero():
            raise ZeroDivisionError("inverse of the zero rational function")
        return RatFun(self.den, self.num)

    def __truediv__(self, other) -> "RatFun":
        if not isinstance(other, RatFun):
            other = RatFun.const(other)
        return self * other.inverse()

    def __rtruediv__(self, other) -> "RatFun":
        return RatFun.const(other) * self.inverse()

    def __pow__(self, n: int) -> "RatFun":
        if n < 0:
            return self.inverse() ** (-n)
        return RatFun(self.num ** n, self.den ** n, _canonical=True)

    def deriv(self) -> "RatFun":
        return ratfun_derivative(self)

    def __call__(self, y):
        return ratfun_eval(self, y)

    def eval_float(self, y):
        """Fast double evaluation, no pole checking (numpy friendly)."""
        return self.num.eval_float(y) / self.den.eval_float(y)


def _canonicalize(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    if num.is_zero():
        return Poly(), Poly.const(1)
    g = poly_gcd(num, den)
    if g.degree > 0:
        num, den = num // g, den // g
    lead = den.lead
    return num * (1 / lead), den * (1 / lead)


def ratfun_normalize(num: Poly, den: Poly) -> RatFun:
    """Canonical form of num/den: coprime, monic denominator."""
    return RatFun(num, den)


def ratfun_derivative(f: RatFun) -> RatFun:
    n, d = f.num, f.den
    return RatFun(n.deriv() * d - n * d.deriv(), d * d)


def ratfun_eval(f: RatFun, y):
    """Exact value at rational y; correctly rounded double at float y."""
    if isinstance(y, float):
        return float(ratfun_eval(f, Fraction(y)))
    y = _frac(y)
    d = f.den(y)
    if d == 0:
        raise PoleError(y)
    return f.num(y) / d


def ratfun_leading(f: RatFun) -> tuple[Fraction, int]:
    """(c, k) with f(y) = c y^k (1 + O(1/y)) as y -> infinity."""
    if f.is_zero():
        raise ValueError("leading term of the zero function")
    return f.num.lead / f.den.lead, f.num.degree - f.den.degree


# ---------------------------------------------------------------- real roots


@dataclass(frozen=True)
class RootBox:
    """Open-ish interval [low, high] isolating one distinct real root.

    ``exact`` is set when bisection happened to land on the root itself.
    """

    low: Fraction
    high: Fraction
    multiplicity: int = 1
    exact: Fraction | None = None

    @property
    def mid(self) -> Fraction:
        return self.exact if self.exact is not None else (self.low + self.high) / 2

    def __float__(self) -> float:
        return float(self.mid)

    def contains(self, y) -> bool:
        return self.low <= y <= self.high


def squarefree_decomposition(p: Poly) -> list[tuple[Poly, int]]:
    """Yun's algorithm: p = c * prod f_i^i with f_i squarefree, coprime."""
    out = []
    a = p.monic()
    b = a.deriv()
    c = poly_gcd(a, b)
    w = a // c
    i = 1
    while w.degree > 0:
        yv = poly_gcd(w, c)
        z = w // yv
        if z.degree > 0:
            out.append((z, i))
        w, c = yv, c // yv
        i += 1
    return out


def sturm_sequence(p: Poly) -> list[Poly]:
    seq = [p, p.deriv()]
    while not seq[-1].is_zero() and seq[-1].degree > 0:
        r = seq[-2] % seq[-1]
        if r.is_zero():
            break
        # positive rescaling keeps signs and sizes in check
        seq.append(-r * (1 / abs(r.lead)))
    return seq


def _sign_changes(seq: Sequence[Poly], y: Fraction) -> int:
    prev = 0
    n = 0
    for q in seq:
        s = q.sign_at(y)
        if s == 0:
            continue
        if prev and s != prev:
            n += 1
        prev = s
    return n


def _cauchy_bound(p: Poly) -> Fraction:
    lead = abs(p.lead)
    m = max((abs(c) for c in p.coeffs[:-1]), default=Fraction(0))
    b = 1 + m / lead
    # round up to a power of two so bisection midpoints stay dyadic
    k = 1
    while k < b:
        k *= 2
    return Fraction(k)


def _isolate_squarefree(f: Poly, width: Fraction) -> list[tuple[Fraction, Fraction, Fraction | None]]:
    if f.degree <= 0:
        return []
    seq = sturm_sequence(f)
    bound = _cauchy_bound(f)
    found = []
    stack = [(-bound, bound)]
    while stack:
        a, b = stack.pop()
        n = _sign_changes(seq, a) - _sign_changes(seq, b)
        if n == 0:
            continue
        if n == 1:
            found.append((a, b))
            continue
        mid = (a + b) / 2
        if f(mid) == 0:
            # carve a root-free gap around the exact root
            found.append((mid, mid))
            e = (b - a) / 4
            while True:
                lo, hi = mid - e, mid + e
                if f(lo) != 0 and f(hi) != 0 and \
                        _sign_changes(seq, lo) - _sign_changes(seq, hi) == 1:
                    break
                e /= 2
            stack.append((a, lo))
            stack.append((hi, b))
            continue
        stack.append((a, mid))
        stack.append((mid, b))
    out = []
    for a, b in found:
        if a == b:
            out.append(_exact_box(a, width))
            continue
        out.append(_refine(f, a, b, width))
    return out


def _exact_box(r: Fraction, width: Fraction):
    return (r - width / 4, r + width / 4, r)


def _refine(f: Poly, a: Fraction, b: Fraction, width: Fraction):
    """Bisect an isolating interval (a, b] of a squarefree f down to width."""
    sa, sb = f.sign_at(a), f.sign_at(b)
    if sb == 0:
        return _exact_box(b, width)
    if sa == 0:
        # root at the left endpoint belongs to a neighbouring interval; the
        # Sturm count is over (a, b], so step just inside
        raise AssertionError("unexpected root on left interval endpoint")
    while b - a > width:
        mid = (a + b) / 2
        sm = f.sign_at(mid)
        if sm == 0:
            return _exact_box(mid, width)
        if sm == sa:
            a = mid
        else:
            b = mid
    return (a, b, None)


def poly_real_roots(p: Poly, width: Number = Fraction(1, 10**12)) -> list[RootBox]:
    """Isolate every distinct real root of p in a box of width <= width."""
    if p.is_zero():
        raise ValueError("zero polynomial has no isolated roots")
    width = _frac(width)
    if width <= 0:
        raise ValueError("width must be positive")
    boxes = []
    for f, mult in squarefree_decomposition(p):
        for lo, hi, ex in _isolate_squarefree(f, width):
            boxes.append(RootBox(lo, hi, mult, ex))
    boxes.sort(key=lambda b: b.low)
    return boxes


def sturm_count(p: Poly, a: Fraction, b: Fraction) -> int:
    """Number of distinct real roots of p in (a, b]."""
    if p.is_zero():
        raise ValueError("zero polynomial")
    f = squarefree_decomposition(p)
    total = 0
    for g, _ in f:
        if g.degree <= 0:
            continue
        seq = sturm_sequence(g)
        total += _sign_changes(seq, _frac(a)) - _sign_changes(seq, _frac(b))
    return total


def ratfun_to_json(f: RatFun) -> dict:
    """Integer-coefficient arrays sharing one common denominator."""
    from math import lcm

    d = 1
    for c in f.num.coeffs + f.den.coeffs:
        d = lcm(d, c.denominator)
    return {
        "num": [str(int(c * d)) for c in f.num.coeffs],
        "den": [str(int(c * d)) for c in f.den.coeffs],
    }


def ratfun_from_json(obj: dict) -> RatFun:
    return RatFun(Poly(int(c) for c in obj["num"]), Poly(int(c) for c in obj["den"]))


def _int_poly_text(coeffs: list[int], var: str) -> str:
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        mag = abs(c)
        body = str(mag) if not mono else (mono if mag == 1 else f"{mag}*{mono}")
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        s += f" {sign} {body}"
    return s


def ratfun_format(f: RatFun, var: str = "y") -> str:
    """Readable form over a common integer denominator, e.g. (y^3 + 6)/(36*y)."""
    obj = ratfun_to_json(f)
    num = _int_poly_text([int(c) for c in obj["num"]], var)
    den = [int(c) for c in obj["den"]]
    if len(den) == 1 and den[0] == 1:
        return num
    nz = sum(1 for c in obj["num"] if int(c))
    dtext = _int_poly_text(den, var)
    if nz > 1:
        num = f"({num})"
    if sum(1 for c in den if c) > 1 or "*" in dtext:
        dtext = f"({dtext})"
    return f"{num}/{dtext}"
