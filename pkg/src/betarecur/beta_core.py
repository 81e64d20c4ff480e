"""Greedy beta-expansions: orbits of T(x) = beta*x mod 1, digits of x and of 1,
Parry admissibility and reconstruction of x from its digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import NotAdmissible, Undecidable
from .exactreal import (
    DEFAULT_POLICY, GREATER, LESS, Ball, PrecisionPolicy, Rational, Real, _ball_op, arith,
    as_real, compare,
)

SIMPLE_PARRY = "SimpleParry"
NOT_SIMPLE = "NotSimpleWithinDepth"
UNKNOWN = "Unknown"


@dataclass(frozen=True)
class DigitWord:
    beta: Real
    digits: tuple[int, ...]
    is_expansion_of_one: bool = False
    is_star_version: bool = False
    truncated_at: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "beta", as_real(self.beta))
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        top = ceil_beta(self.beta) - 1
        if self.is_expansion_of_one and not self.is_star_version:
            # eps_1(1, beta) = floor(beta) reaches ceil(beta) when beta is an integer
            top += 1
        bad = [d for d in self.digits if d < 0 or d > top]
        if bad:
            raise ValueError(f"digit {bad[0]} outside [0, {top}]")

    def __len__(self):
        return len(self.digits)

    def __getitem__(self, i):
        return self.digits[i]

    def text(self) -> str:
        return " ".join(map(str, self.digits))

    def to_json(self) -> dict:
        return {
            "beta": self.beta.to_json(),
            "digits": list(self.digits),
            "flags": {
                "is_expansion_of_one": self.is_expansion_of_one,
                "is_star_version": self.is_star_version,
                "truncated_at": self.truncated_at,
            },
        }

    def as_array(self) -> np.ndarray:
        return np.asarray(self.digits, dtype=np.int64)


@dataclass(frozen=True)
class ParryStatus:
    kind: str
    m: Optional[int] = None
    depth: Optional[int] = None

    def __str__(self):
        if self.kind == SIMPLE_PARRY:
            return f"SimpleParry({self.m})"
        return f"{self.kind}({self.depth})"

    def to_json(self) -> dict:
        return {"kind": self.kind, "m": self.m, "depth": self.depth}


@dataclass(frozen=True)
class Admissibility:
    status: str  # "Admissible" | "NotAdmissible" | "Unknown"
    shift: Optional[int] = None
    checked: int = 0

    def __bool__(self):
        return self.status == "Admissible"

    def __str__(self):
        if self.status == "NotAdmissible":
            return f"NotAdmissible(at shift {self.shift})"
        return self.status

    def to_json(self) -> dict:
        return {"status": self.status, "shift": self.shift, "checked": self.checked}


@lru_cache(maxsize=256)
def ceil_beta(beta: Real) -> int:
    f = floor_of(beta)
    return f if compare(beta, Rational(Fraction(f))) == 0 else f + 1


def floor_of(x: Real, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    from .exactreal import floor_scaled
    return floor_scaled(x, policy)


def _exact_pair(x: Real, beta: Real) -> bool:
    if not (x.is_exact and beta.is_exact):
        return False
    dx = getattr(x, "d", 1)
    db = getattr(beta, "d", 1)
    return dx == 1 or db == 1 or dx == db


def _check_unit_interval(x: Real, policy: PrecisionPolicy):
    if compare(x, 0, policy) == LESS or compare(x, 1, policy) != LESS:
        raise ValueError(f"x = {x} is not in [0, 1)")


def _check_beta(beta: Real, policy: PrecisionPolicy):
    if compare(beta, 1, policy) != GREATER:
        raise ValueError(f"beta = {beta} must exceed 1")


def _ball_orbit(start: Ball, beta: Ball, count: int, prec: int, stop_at_zero=False):
    """Digits of ``start`` with fixed-precision ball steps; stops at the first undecidable floor."""
    out = []
    t = start
    hit_zero = False
    for _ in range(count):
        y = arith(beta, t, "mul")
        y = Ball(y.mid, y.rad, y.exp, prec)
        lo, hi = y.lower, y.upper
        f = math.floor(lo)
        if hi >= f + 1:
            break
        out.append(f)
        t = arith(y, Rational(Fraction(f)), "sub")
        t = Ball(t.mid, t.rad, t.exp, prec)
        if stop_at_zero and t.contains_zero():
            hit_zero = True
            break
    return out, t, hit_zero


def _digits_ball(x: Real, beta: Real, n: int, policy: PrecisionPolicy, stop_at_zero=False):
    best: list[int] = []
    hit_zero = False
    for prec in policy.schedule(max(h for h in (x.prec_hint, beta.prec_hint, 0) if h is not None)):
        ds, _, hit_zero = _ball_orbit(x.at(prec), beta.at(prec), n, prec, stop_at_zero)
        if len(ds) > len(best):
            best = ds
        if len(ds) == n or hit_zero:
            return ds, True, hit_zero
    return best, False, hit_zero


def orbit_point(x, beta, n: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> Real:
    """T_beta^n(x); exact when x and beta are exact."""
    x, beta = as_real(x), as_real(beta)
    _check_beta(beta, policy)
    _check_unit_interval(x, policy)
    if _exact_pair(x, beta):
        t = x
        for _ in range(n):
            y = beta * t
            t = y - y.floor()
        return t
    ds, ok, _ = _digits_ball(x, beta, n, policy)
    if not ok:
        raise Undecidable("digit boundary in ball mode", depth=len(ds))

    # T^n x = beta^n x - sum eps_i beta^(n-i), recomputed from scratch at each precision
    def refine(p: int) -> Ball:
        b = beta.at(p)
        t = x.at(p)
        for d in ds:
            t = _ball_op(_ball_op(b, t, "mul", p), Ball(d, 0, 0, p), "sub", p)
        return replace(t, refine=refine)

    return refine(max(policy.initial, x.prec_hint or 0, beta.prec_hint or 0))


def digits(x, beta, n: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> DigitWord:
    """First n digits eps_k = floor(beta * T^(k-1) x) of the greedy expansion."""
    x, beta = as_real(x), as_real(beta)
    _check_beta(beta, policy)
    _check_unit_interval(x, policy)
    if _exact_pair(x, beta):
        out = []
        t = x
        for _ in range(n):
            y = beta * t
            f = y.floor()
            out.append(f)
            t = y - f
        return DigitWord(beta, tuple(out))
    ds, ok, _ = _digits_ball(x, beta, n, policy)
    if not ok:
        partial = DigitWord(beta, tuple(ds), truncated_at=len(ds))
        raise Undecidable(f"digit {len(ds) + 1} sits on a boundary at {policy.maximum} bits",
                          depth=len(ds), partial=partial)
    return DigitWord(beta, tuple(ds))


@dataclass(frozen=True)
class ExpansionOfOne:
    word: DigitWord
    star: DigitWord
    status: ParryStatus

    def __iter__(self):
        return iter((self.word, self.star, self.status))


def expansion_of_one(beta, n: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> ExpansionOfOne:
    """eps(1, beta) with T^0(1) = 1, the infinite expansion eps*(beta) and the Parry status."""
    beta = as_real(beta)
    _check_beta(beta, policy)
    if beta.is_exact:
        out = []
        t = Rational(Fraction(1))
        m = None
        for i in range(1, n + 1):
            y = beta * t
            f = y.floor()
            out.append(f)
            t = y - f
            if t.sign() == 0:
                m = i
                break
        if m is not None:
            word = tuple(out) + (0,) * (n - m)
            block = out[:-1] + [out[-1] - 1]
            star = tuple(block[i % m] for i in range(n))
            status = ParryStatus(SIMPLE_PARRY, m=m, depth=n)
            return ExpansionOfOne(
                DigitWord(beta, word[:n], is_expansion_of_one=True),
                DigitWord(beta, star, is_expansion_of_one=True, is_star_version=True),
                status,
            )
        word = tuple(out)
        return ExpansionOfOne(
            DigitWord(beta, word, is_expansion_of_one=True, truncated_at=n),
            DigitWord(beta, word, is_expansion_of_one=True, is_star_version=True, truncated_at=n),
            ParryStatus(NOT_SIMPLE, depth=n),
        )
    ds, ok, hit_zero = _digits_ball(Rational(Fraction(1)), beta, n, policy, stop_at_zero=True)
    if ok and not hit_zero:
        status = ParryStatus(NOT_SIMPLE, depth=n)
    else:
        # a ball touching zero cannot certify T^m(1) = 0
        status = ParryStatus(UNKNOWN, depth=len(ds))
    word = DigitWord(beta, tuple(ds), is_expansion_of_one=True, truncated_at=len(ds))
    star = DigitWord(beta, tuple(ds), is_expansion_of_one=True, is_star_version=True,
                     truncated_at=len(ds))
    return ExpansionOfOne(word, star, status)


@lru_cache(maxsize=64)
def _star_cached(beta: Real, n: int, policy: PrecisionPolicy) -> tuple[tuple[int, ...], bool]:
    e = expansion_of_one(beta, n, policy)
    complete = e.status.kind == SIMPLE_PARRY or len(e.star) >= n
    return e.star.digits, complete


def star_digits(beta, n: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> tuple[int, ...]:
    """eps*(beta) to depth n (shorter only when ball mode could not certify more)."""
    beta = as_real(beta)
    # round the depth up so repeated calls share cache entries
    size = 64
    while size < n:
        size *= 2
    return _star_cached(beta, size, policy)[0][:n]


def is_admissible(w, beta=None, depth: Optional[int] = None,
                  policy: PrecisionPolicy = DEFAULT_POLICY) -> Admissibility:
    """Parry's criterion for a finite word read as w 0^infinity.

    Every shift must be lexicographically below eps*(beta); for a finite word this
    means each shift is <= the equally long prefix of eps*.  Scanned in one pass
    with the beta-shift automaton (state = length of the active eps*-prefix match).
    """
    if isinstance(w, DigitWord):
        beta = w.beta if beta is None else beta
        ds = w.digits
    else:
        ds = tuple(w)
    beta = as_real(beta)
    if depth is not None:
        ds = ds[:depth]
    top = ceil_beta(beta) - 1
    for i, d in enumerate(ds):
        if d < 0 or d > top:
            return Admissibility("NotAdmissible", shift=i, checked=i)
    star = star_digits(beta, len(ds) + 1, policy)
    j = 0
    for i, d in enumerate(ds):
        if j >= len(star):
            return Admissibility("Unknown", checked=i)
        s = star[j]
        if d > s:
            return Admissibility("NotAdmissible", shift=i - j, checked=i)
        j = j + 1 if d == s else 0
    return Admissibility("Admissible", checked=len(ds))


def real_from_digits(w: DigitWord, beta=None, policy: PrecisionPolicy = DEFAULT_POLICY) -> Real:
    """sum eps_n beta^-n; exact for a finite word, a ball enclosing the tail when truncated."""
    beta = as_real(w.beta if beta is None else beta)
    check = is_admissible(w.digits, beta, policy=policy)
    if check.status == "NotAdmissible":
        raise NotAdmissible(f"word is not admissible: {check}", shift=check.shift)
    n = len(w.digits)
    c = ceil_beta(beta)
    if beta.is_exact:
        inv = arith(1, beta, "div", policy)
        v: Real = Rational(Fraction(0))
        for d in reversed(w.digits):
            v = arith(arith(v, d, "add", policy), inv, "mul", policy)
        if w.truncated_at is None:
            return v
        tail = arith(arith(c - 1, arith(beta, 1, "sub", policy), "div", policy),
                     _power(inv, n, policy), "mul", policy)
    else:
        v = tail = None

    def refine(p: int) -> Ball:
        if v is not None:
            lo, t = v.at(p), tail.at(p)
            if w.truncated_at is None:
                return replace(lo, refine=refine)
            return Ball.from_interval(lo.lower, lo.upper + t.upper, p, refine=refine)
        b = beta.at(p)
        inv_b = _ball_op(Ball(1, 0, 0, p), b, "div", p)
        acc = Ball(0, 0, 0, p)
        for d in reversed(w.digits):
            acc = _ball_op(_ball_op(acc, Ball(d, 0, 0, p), "add", p), inv_b, "mul", p)
        if w.truncated_at is None:
            return replace(acc, refine=refine)
        bound = _ball_op(Ball(c - 1, 0, 0, p), _ball_op(b, Ball(1, 0, 0, p), "sub", p), "div", p)
        scale = Ball(1, 0, 0, p)
        for _ in range(n):
            scale = _ball_op(scale, inv_b, "mul", p)
        t = _ball_op(bound, scale, "mul", p)
        return Ball.from_interval(acc.lower, acc.upper + t.upper, p, refine=refine)

    return refine(max(policy.initial, beta.prec_hint or 0))


def _power(x: Real, n: int, policy: PrecisionPolicy) -> Real:
    result: Real = Rational(Fraction(1))
    base = x
    while n:
        if n & 1:
            result = arith(result, base, "mul", policy)
        base = arith(base, base, "mul", policy)
        n >>= 1
    return result


def random_admissible_word(beta, length: int, rng: np.random.Generator,
                           policy: PrecisionPolicy = DEFAULT_POLICY) -> DigitWord:
    """Random walk on the beta-shift automaton; every emitted word is admissible."""
    beta = as_real(beta)
    star = star_digits(beta, length + 1, policy)
    if len(star) < length + 1:
        raise Undecidable("eps*(beta) not certified deep enough", depth=len(star))
    out = np.empty(length, dtype=np.int64)
    draws = rng.random(length)
    j = 0
    for i in range(length):
        s = star[j]
        d = int(draws[i] * (s + 1))
        out[i] = d
        j = j + 1 if d == s else 0
    return DigitWord(beta, tuple(out.tolist()), truncated_at=length)


def inverse_powers(beta: Real, count: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Floats beta^-1 .. beta^-count, each correctly rounded from a 128-bit ball."""
    inv = arith(1, beta, "div", policy)
    out = np.empty(count, dtype=np.float64)
    p = inv
    prec = 128
    for i in range(count):
        out[i] = float(p.at(prec).center)
        p = arith(p, inv, "mul", policy)
    return out
