"""Real-number kernel: exact rationals, exact elements of Q(sqrt d), dyadic balls.

Exact values compare and floor decidably.  Balls carry an optional ``refine``
callback that recomputes the same quantity at a higher working precision;
comparisons and floors escalate geometrically through a
:class:`PrecisionPolicy` and raise :class:`Undecidable` instead of guessing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterator, Optional

from .errors import DivisionByZero, PrecisionExhausted, Undecidable

__all__ = [
    "PrecisionPolicy", "DEFAULT_POLICY", "Real", "Rational", "Quadratic", "Ball",
    "as_real", "arith", "compare", "floor_scaled", "parse_real", "real_from_json",
    "LESS", "EQUAL", "GREATER",
]

LESS, EQUAL, GREATER = -1, 0, 1


@dataclass(frozen=True)
class PrecisionPolicy:
    initial: int = 64
    factor: int = 2
    maximum: int = 4096

    def __post_init__(self):
        if self.initial < 2 or self.initial > self.maximum:
            raise ValueError("need 2 <= initial <= maximum precision")
        if self.factor < 2:
            raise ValueError("escalation factor must be >= 2")

    def schedule(self, start: Optional[int] = None) -> Iterator[int]:
        p = max(self.initial, start or 0)
        if p > self.maximum:
            yield self.maximum
            return
        while p < self.maximum:
            yield p
            p *= self.factor
        yield self.maximum


DEFAULT_POLICY = PrecisionPolicy()


class Real:
    """Common base for the three representations."""

    is_exact = False

    def at(self, prec: int) -> "Ball":
        raise NotImplementedError

    @property
    def prec_hint(self) -> Optional[int]:
        return None

    def to_json(self) -> dict:
        raise NotImplementedError

    def __add__(self, other):
        return arith(self, other, "add")

    def __radd__(self, other):
        return arith(other, self, "add")

    def __sub__(self, other):
        return arith(self, other, "sub")

    def __rsub__(self, other):
        return arith(other, self, "sub")

    def __mul__(self, other):
        return arith(self, other, "mul")

    def __rmul__(self, other):
        return arith(other, self, "mul")

    def __truediv__(self, other):
        return arith(self, other, "div")

    def __rtruediv__(self, other):
        return arith(other, self, "div")

    def __neg__(self):
        return arith(Rational(Fraction(0)), self, "sub")

    def __abs__(self):
        return -self if compare(self, Rational(Fraction(0))) == LESS else self

    def __lt__(self, other):
        return compare(self, other) == LESS

    def __le__(self, other):
        return compare(self, other) != GREATER

    def __gt__(self, other):
        return compare(self, other) == GREATER

    def __ge__(self, other):
        return compare(self, other) != LESS

    def __float__(self):
        return float(self.at(80).center)


# --------------------------------------------------------------------------
# exact variants


@dataclass(frozen=True)
class Rational(Real):
    value: Fraction

    is_exact = True

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    @property
    def num(self) -> int:
        return self.value.numerator

    @property
    def den(self) -> int:
        return self.value.denominator

    def at(self, prec: int) -> "Ball":
        return Ball.from_fraction(self.value, prec, refine=self.at)

    def floor(self) -> int:
        return math.floor(self.value)

    def sign(self) -> int:
        return (self.value > 0) - (self.value < 0)

    def to_json(self) -> dict:
        return {"kind": "rational", "fields": {"num": self.num, "den": self.den}}

    def __str__(self):
        return str(self.value)

    def __float__(self):
        return float(self.value)


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (s, e) with d = s*s*e and e squarefree."""
    s, e, f = 1, d, 2
    while f * f <= e:
        while e % (f * f) == 0:
            e //= f * f
            s *= f
        f += 1
    return s, e


@dataclass(frozen=True)
class Quadratic(Real):
    """(p + q*sqrt(d)) / r with d > 1 squarefree, r > 0, gcd(p, q, r) = 1, q != 0."""

    p: int
    q: int
    d: int
    r: int

    is_exact = True

    @staticmethod
    def make(p: int, q: int, d: int, r: int = 1) -> Real:
        if r == 0:
            raise DivisionByZero("zero denominator")
        if d < 0:
            raise ValueError("only real quadratic fields are supported")
        s, d = _squarefree_split(d) if d > 0 else (0, 1)
        q *= s
        if d == 1:
            p, q = p + q, 0
        if q == 0:
            return Rational(Fraction(p, r))
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        return Quadratic(p // g, q // g, d, r // g)

    def triple(self) -> tuple[int, int, int]:
        return self.p, self.q, self.r

    def sign(self) -> int:
        return _qsign(self.p, self.q, self.d)

    def floor(self) -> int:
        p, q, d, r = self.p, self.q, self.d, self.r
        f = math.isqrt(q * q * d)
        # q*sqrt(d) is irrational, so p + q*sqrt(d) lies strictly inside (a, a+1)
        a = p + f if q > 0 else p - f - 1
        return a // r

    def conjugate(self) -> "Quadratic":
        return Quadratic(self.p, -self.q, self.d, self.r)

    def at(self, prec: int) -> "Ball":
        p, q, d, r = self.p, self.q, self.d, self.r
        k = prec + 8 + max(0, (abs(q) * d).bit_length())
        s = math.isqrt(q * q * d << (2 * k))
        lo_part = Fraction(s, 1 << k)
        hi_part = Fraction(s + 1, 1 << k)
        if q > 0:
            lo, hi = (p + lo_part) / r, (p + hi_part) / r
        else:
            lo, hi = (p - hi_part) / r, (p - lo_part) / r
        return Ball.from_interval(lo, hi, prec, refine=self.at)

    def to_json(self) -> dict:
        return {"kind": "quadratic", "fields": {"p": self.p, "q": self.q, "d": self.d, "r": self.r}}

    def __str__(self):
        sgn = "+" if self.q >= 0 else "-"
        return f"({self.p}{sgn}{abs(self.q)}*sqrt({self.d}))/{self.r}"


def _qsign(p: int, q: int, d: int) -> int:
    sp = (p > 0) - (p < 0)
    sq = (q > 0) - (q < 0)
    if sq == 0 or sp == sq:
        return sp or sq
    if sp == 0:
        return sq
    return sp if p * p > q * q * d else sq


def _exact_parts(x: Real) -> tuple[int, int, int]:
    if isinstance(x, Rational):
        return x.num, 0, x.den
    return x.p, x.q, x.r


def _exact_field(a: Real, b: Real) -> Optional[int]:
    """Common d for an exact operation, 1 for plain rationals, None if incompatible."""
    da = a.d if isinstance(a, Quadratic) else 1
    db = b.d if isinstance(b, Quadratic) else 1
    if da == 1 or db == 1 or da == db:
        return max(da, db)
    return None


def _exact_op(a: Real, b: Real, op: str, d: int) -> Real:
    if d == 1:
        x, y = a.value, b.value
        if op == "add":
            return Rational(x + y)
        if op == "sub":
            return Rational(x - y)
        if op == "mul":
            return Rational(x * y)
        if y == 0:
            raise DivisionByZero("division by exact zero")
        return Rational(x / y)
    p1, q1, r1 = _exact_parts(a)
    p2, q2, r2 = _exact_parts(b)
    if op == "add":
        return Quadratic.make(p1 * r2 + p2 * r1, q1 * r2 + q2 * r1, d, r1 * r2)
    if op == "sub":
        return Quadratic.make(p1 * r2 - p2 * r1, q1 * r2 - q2 * r1, d, r1 * r2)
    if op == "mul":
        return Quadratic.make(p1 * p2 + q1 * q2 * d, p1 * q2 + p2 * q1, d, r1 * r2)
    norm = p2 * p2 - q2 * q2 * d
    if norm == 0:
        raise DivisionByZero("division by exact zero")
    big_p = (p1 * p2 - q1 * q2 * d) * r2
    big_q = (q1 * p2 - p1 * q2) * r2
    return Quadratic.make(big_p, big_q, d, r1 * norm)


# --------------------------------------------------------------------------
# balls


def _shrink(mid: int, rad: int, exp: int, prec: int) -> tuple[int, int, int]:
    excess = max(abs(mid).bit_length(), rad.bit_length()) - prec
    if excess <= 0:
        return mid, rad, exp
    unit = 1 << excess
    q, rem = divmod(mid, unit)
    if 2 * rem >= unit:
        q += 1
    # rounding moved the centre by at most half a new unit
    rad = -(-rad // unit) + (1 if rem else 0)
    return q, rad, exp + excess


@dataclass(frozen=True)
class Ball(Real):
    """Closed ball [(mid - rad) * 2**exp, (mid + rad) * 2**exp]."""

    mid: int
    rad: int
    exp: int
    prec: int
    refine: Optional[Callable[[int], "Ball"]] = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.rad < 0:
            raise ValueError("ball radius must be nonnegative")

    @property
    def prec_hint(self) -> Optional[int]:
        return self.prec

    @property
    def center(self) -> Fraction:
        return Fraction(self.mid) * _pow2(self.exp)

    @property
    def radius(self) -> Fraction:
        return Fraction(self.rad) * _pow2(self.exp)

    @property
    def lower(self) -> Fraction:
        return Fraction(self.mid - self.rad) * _pow2(self.exp)

    @property
    def upper(self) -> Fraction:
        return Fraction(self.mid + self.rad) * _pow2(self.exp)

    def contains_zero(self) -> bool:
        return self.mid - self.rad <= 0 <= self.mid + self.rad

    def is_point(self) -> bool:
        return self.rad == 0

    def contains(self, value: Fraction) -> bool:
        return self.lower <= value <= self.upper

    def at(self, prec: int) -> "Ball":
        if self.refine is not None and prec > self.prec:
            return self.refine(prec)
        return self

    @staticmethod
    def from_fraction(x: Fraction, prec: int, refine=None) -> "Ball":
        x = Fraction(x)
        if x == 0:
            return Ball(0, 0, -prec, prec, refine)
        # exactly prec bits of mantissa keeps rad <= 2^(1-prec) |x|
        e = _floor_log2(abs(x)) - prec + 1
        scaled = x / _pow2(e)
        mid = round(scaled)
        rad = 0 if scaled.denominator == 1 else 1
        return Ball(mid, rad, e, prec, refine)

    @staticmethod
    def from_interval(lo: Fraction, hi: Fraction, prec: int, refine=None) -> "Ball":
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            lo, hi = hi, lo
        if lo == hi:
            return Ball.from_fraction(lo, prec, refine)
        mag = max(abs(lo), abs(hi))
        e = mag.numerator.bit_length() - mag.denominator.bit_length() - prec - 1
        unit = _pow2(e)
        c = (lo + hi) / 2
        mid = round(c / unit)
        cm = mid * unit
        spread = max(hi - cm, cm - lo) / unit
        rad = math.ceil(spread)
        mid, rad, e = _shrink(mid, rad, e, prec)
        return Ball(mid, rad, e, prec, refine)

    def to_json(self) -> dict:
        return {"kind": "ball", "fields": {"mid": self.mid, "rad": self.rad, "exp": self.exp, "prec": self.prec}}

    def __str__(self):
        return f"ball({float(self.center):.17g} +/- {float(self.radius):.3g}, {self.prec} bits)"

    def __float__(self):
        return float(self.center)


def _floor_log2(x: Fraction) -> int:
    b = x.numerator.bit_length() - x.denominator.bit_length()
    return b if x >= _pow2(b) else b - 1


def _pow2(e: int) -> Fraction:
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)


def _align(a: Ball, b: Ball):
    e = min(a.exp, b.exp)
    return (a.mid << (a.exp - e), a.rad << (a.exp - e), b.mid << (b.exp - e), b.rad << (b.exp - e), e)


def _ball_op(a: Ball, b: Ball, op: str, prec: int) -> Ball:
    if op in ("add", "sub"):
        m1, r1, m2, r2, e = _align(a, b)
        m = m1 + m2 if op == "add" else m1 - m2
        return Ball(*_shrink(m, r1 + r2, e, prec), prec)
    if op == "mul":
        m = a.mid * b.mid
        r = abs(a.mid) * b.rad + abs(b.mid) * a.rad + a.rad * b.rad
        return Ball(*_shrink(m, r, a.exp + b.exp, prec), prec)
    if b.contains_zero():
        raise PrecisionExhausted("divisor ball contains zero")
    lo1, hi1, lo2, hi2 = a.lower, a.upper, b.lower, b.upper
    quots = [lo1 / lo2, lo1 / hi2, hi1 / lo2, hi1 / hi2]
    return Ball.from_interval(min(quots), max(quots), prec)


# --------------------------------------------------------------------------
# public operations


def as_real(v) -> Real:
    if isinstance(v, Real):
        return v
    if isinstance(v, (int, Fraction)):
        return Rational(Fraction(v))
    if isinstance(v, float):
        return Rational(Fraction(v))
    if isinstance(v, str):
        return parse_real(v)
    raise TypeError(f"cannot interpret {v!r} as a real number")


def arith(a, b, op: str, policy: PrecisionPolicy = DEFAULT_POLICY) -> Real:
    """Exact when both operands are exact in a common field, otherwise a lazy ball."""
    if op not in ("add", "sub", "mul", "div"):
        raise ValueError(f"unknown operation {op!r}")
    a, b = as_real(a), as_real(b)
    if a.is_exact and b.is_exact:
        d = _exact_field(a, b)
        if d is not None:
            return _exact_op(a, b, op, d)
    if op == "div" and b.is_exact and _exact_sign(b) == 0:
        raise DivisionByZero("division by exact zero")

    hints = [h for h in (a.prec_hint, b.prec_hint) if h is not None]
    prec = max(hints) if hints else policy.initial

    def refine(p: int) -> Ball:
        return replace(_ball_op(a.at(p), b.at(p), op, p), refine=refine)

    if op != "div":
        return refine(prec)
    for p in policy.schedule(prec):
        try:
            return refine(p)
        except PrecisionExhausted:
            continue
    raise PrecisionExhausted("divisor not separated from zero at maximum precision")


def _exact_sign(x: Real) -> int:
    return x.sign()


def compare(a, b, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Return LESS, EQUAL or GREATER; EQUAL only when provable."""
    a, b = as_real(a), as_real(b)
    if a.is_exact and b.is_exact and _exact_field(a, b) is not None:
        return _exact_sign(arith(a, b, "sub"))
    hints = [h for h in (a.prec_hint, b.prec_hint) if h is not None]
    for p in policy.schedule(max(hints) if hints else None):
        diff = _ball_op(a.at(p), b.at(p), "sub", p)
        if diff.mid - diff.rad > 0:
            return GREATER
        if diff.mid + diff.rad < 0:
            return LESS
        if diff.mid == 0 and diff.rad == 0:
            return EQUAL
    raise Undecidable(f"cannot separate {a} and {b} within {policy.maximum} bits")


def floor_scaled(a, policy: PrecisionPolicy = DEFAULT_POLICY, scale=None) -> int:
    """floor(scale * a) (scale defaults to 1), certified."""
    a = as_real(a)
    if scale is not None:
        a = arith(scale, a, "mul", policy)
    if a.is_exact:
        return a.floor()
    for p in policy.schedule(a.prec_hint):
        ball = a.at(p)
        lo, hi = ball.lower, ball.upper
        f = math.floor(lo)
        if hi < f + 1:
            return f
    raise Undecidable(f"{a} is too close to an integer at {policy.maximum} bits")


# --------------------------------------------------------------------------
# text and JSON forms

_QUAD_RE = re.compile(
    r"^\(?\s*([+-]?\d+)?\s*(?:([+-])?\s*(\d+)?\s*\*?\s*sqrt\(\s*(\d+)\s*\))?\s*\)?\s*(?:/\s*(\d+))?\s*$"
)
_DEC_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _decimal_ball(text: str, policy: PrecisionPolicy) -> Ball:
    value = Fraction(text)

    def refine(p: int) -> Ball:
        return Ball.from_fraction(value, p, refine=refine)

    return refine(policy.initial)


def parse_real(text: str, policy: PrecisionPolicy = DEFAULT_POLICY) -> Real:
    """Parse "a/b", "rational:a/b", "(p+q*sqrt(d))/r", "dec:0.37", "ball:1.8" or a bare decimal."""
    s = text.strip()
    kind, _, body = s.partition(":")
    if body:
        kind = kind.lower()
        if kind in ("rational", "rat"):
            return Rational(Fraction(body.strip()))
        if kind in ("dec", "ball"):
            return _decimal_ball(body.strip(), policy)
        if kind in ("quad", "quadratic"):
            s = body.strip()
        else:
            raise ValueError(f"unknown literal kind {kind!r}")
    if re.fullmatch(r"[+-]?\d+\s*(/\s*\d+)?", s):
        return Rational(Fraction(s.replace(" ", "")))
    if "sqrt" in s:
        m = _QUAD_RE.match(s)
        if not m:
            raise ValueError(f"cannot parse quadratic literal {text!r}")
        if m.group(2) is None and m.group(3) is None:
            # "c*sqrt(d)": the leading integer is the coefficient
            p, q = 0, int(m.group(1) or 1)
        else:
            p = int(m.group(1) or 0)
            q = int(m.group(3) or 1) * (-1 if m.group(2) == "-" else 1)
        d = int(m.group(4))
        r = int(m.group(5) or 1)
        return Quadratic.make(p, q, d, r)
    if _DEC_RE.match(s):
        return _decimal_ball(s, policy)
    raise ValueError(f"cannot parse real literal {text!r}")


def real_from_json(obj: dict) -> Real:
    kind, f = obj["kind"], obj["fields"]
    if kind == "rational":
        return Rational(Fraction(f["num"], f["den"]))
    if kind == "quadratic":
        return Quadratic.make(f["p"], f["q"], f["d"], f["r"])
    if kind == "ball":
        return Ball(f["mid"], f["rad"], f["exp"], f["prec"])
    raise ValueError(f"unknown real kind {kind!r}")


def golden_ratio() -> Quadratic:
    return Quadratic.make(1, 1, 5, 2)


def ln_bounds(x: Real, prec: int = 128) -> tuple[float, float]:
    """Conservative float bounds on ln|x|; x must be provably nonzero at ``prec``."""
    b = as_real(x).at(prec)
    lo, hi = b.lower, b.upper
    if lo <= 0 <= hi:
        raise Undecidable("value not separated from zero")
    lo, hi = abs(lo), abs(hi)
    if lo > hi:
        lo, hi = hi, lo
    return _ln_fraction(lo) - 1e-12, _ln_fraction(hi) + 1e-12


def _ln_fraction(v: Fraction) -> float:
    return math.log(v.numerator) - math.log(v.denominator)
