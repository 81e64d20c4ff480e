"""Orbit recurrence analytics.

For a point given by (a prefix of) its beta-expansion, compute the depths
d(n) = -log_beta |T^n x - x|, the return-time sequences (n_k, m_k, t_k), and
finite-depth estimates of r_beta, rhat_beta, v_beta and w_1.

Depths come from the digit differences: if the expansions of T^n x and x agree
on j digits, then |T^n x - x| = beta^-j |u| with u = sum_i delta_i beta^-i.
u is first evaluated in float64 over a short window with a rigorous error
bound; entries that cannot be certified that way are redone in ball
arithmetic over growing windows.  Whatever still cannot be certified because
the data ran out is marked truncated and only gives lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .beta_core import DigitWord, ceil_beta, inverse_powers, orbit_point, real_from_digits, star_digits
from .errors import InsufficientDepth, PeriodicInput, Undecidable
from .exactreal import (
    DEFAULT_POLICY, Ball, PrecisionPolicy, Rational, Real, _ball_op, arith, as_real,
    ln_bounds,
)
from .words import ice_estimate, prefix_function, smallest_period, z_array

_FP_WINDOW_BITS = 46


# --------------------------------------------------------------------------
# periodicity


@dataclass(frozen=True)
class Periodicity:
    kind: str  # "Periodic" | "Aperiodic-to-depth" | "PreperiodicCandidate"
    period: Optional[int] = None
    preperiod: Optional[int] = None
    confirmed: bool = False

    @property
    def periodic(self) -> bool:
        return self.kind == "Periodic"

    def to_json(self) -> dict:
        return {"kind": self.kind, "period": self.period, "preperiod": self.preperiod,
                "confirmed": self.confirmed}


def detect_periodic(w, x=None, min_repeats: int = 3,
                    policy: PrecisionPolicy = DEFAULT_POLICY) -> Periodicity:
    """Smallest period of the whole word if it repeats at least ``min_repeats`` times.

    When the exact point ``x`` is supplied, T^p x = x is checked exactly and overrides
    the finite-word verdict.
    """
    ds = w.digits if isinstance(w, DigitWord) else tuple(w)
    L = len(ds)
    if L < 2:
        raise ValueError("need at least two digits")
    p = smallest_period(ds)
    if x is not None and isinstance(w, DigitWord) and as_real(x).is_exact and w.beta.is_exact:
        if p < L and as_real(x) == orbit_point(x, w.beta, p, policy):
            return Periodicity("Periodic", p, confirmed=True)
    if p * min_repeats <= L:
        return Periodicity("Periodic", p)
    # a long periodic tail: smallest period of the reversed word's prefixes.  Twice
    # the repeat count, since aperiodic words carry local cubes (Fibonacci: 3.6 powers)
    rev = ds[::-1]
    pi = prefix_function(rev)
    best = None
    for ell in range(L - 1, L // 2 - 1, -1):
        per = ell - pi[ell - 1]
        if per * 2 * min_repeats <= ell:
            best = (per, L - ell)
            break
    if best is not None:
        return Periodicity("PreperiodicCandidate", best[0], preperiod=best[1])
    return Periodicity("Aperiodic-to-depth")


# --------------------------------------------------------------------------
# distances


def orbit_distance(x, beta, n: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> Real:
    """|T^n x - x|; exact (possibly exactly 0) when x and beta are exact."""
    x, beta = as_real(x), as_real(beta)
    t = orbit_point(x, beta, n, policy)
    diff = arith(t, x, "sub", policy)
    if diff.is_exact:
        return diff if diff.sign() >= 0 else arith(0, diff, "sub")
    return abs(diff)


@dataclass
class DistanceProfile:
    """Per-n data, index n = 1..N (index 0 unused)."""

    z: np.ndarray
    J: np.ndarray          # max j >= 0 with |T^n x - x| < beta^-j (lower bound when truncated)
    d_lo: np.ndarray       # bounds on -log_beta |T^n x - x|
    d_hi: np.ndarray
    truncated: np.ndarray
    fallbacks: int = 0

    @property
    def d(self) -> np.ndarray:
        mid = (self.d_lo + self.d_hi) / 2
        return np.where(np.isfinite(self.d_hi), mid, self.d_lo)


def _window_length(beta_f: float) -> int:
    return max(8, math.ceil(_FP_WINDOW_BITS * math.log(2) / math.log(beta_f)))


def _level(q_lo: float, q_hi: float) -> Optional[int]:
    """max{l >= 0 : |u| < beta^-l} from bounds q_lo <= -log_beta|u| <= q_hi, if certain."""
    a = math.floor(q_lo - 1e-9)
    b = math.floor(q_hi + 1e-9)
    if a != b or q_lo - a < 1e-9:
        return None
    return max(a, 0)


def _ball_level(e: np.ndarray, a: int, b: int, avail: int, beta: Real, start_window: int,
                policy: PrecisionPolicy):
    """Certify the level of u = sum_i (e[a+i] - e[b+i]) beta^-(i+1) with ball arithmetic.

    Returns (level, q_lo, q_hi, truncated); on truncation level is a lower bound.
    """
    beta_f = float(beta)
    log2b = math.log2(beta_f)
    W = min(avail, max(start_window, 2))
    while True:
        prec = min(policy.maximum, max(policy.initial, int(W * log2b) + 96))
        bb = beta.at(prec)
        inv = _ball_op(Ball(1, 0, 0, prec), bb, "div", prec)
        acc = Ball(0, 0, 0, prec)
        delta = (e[a:a + W] - e[b:b + W]).tolist()
        for dv in reversed(delta):
            acc = _ball_op(_ball_op(acc, Ball(int(dv), 0, 0, prec), "add", prec), inv, "mul", prec)
        scale = Ball(1, 0, 0, prec)
        for _ in range(W):
            scale = _ball_op(scale, inv, "mul", prec)
        tail = scale.upper
        lo_s, hi_s = acc.lower, acc.upper
        if lo_s > 0:
            lo, hi = lo_s - tail, hi_s + tail
        elif hi_s < 0:
            lo, hi = -hi_s - tail, -lo_s + tail
        else:
            lo, hi = Fraction(0), max(abs(lo_s), abs(hi_s)) + tail
        hi = min(hi, Fraction(1))
        lnb_lo, lnb_hi = ln_bounds(beta, prec)
        q_lo = -_ln(hi) / lnb_lo if hi < 1 else 0.0
        if lo > 0:
            q_hi = -_ln(lo) / lnb_lo
            q_lo = -_ln(hi) / lnb_hi if hi < 1 else 0.0
            level = _level_exact(lo, hi, bb, prec)
            if level is not None:
                return level, q_lo, q_hi, False
        if W >= avail:
            q_hi = -_ln(lo) / lnb_lo if lo > 0 else math.inf
            return max(0, math.floor(q_lo - 1e-9)), q_lo, q_hi, True
        W = min(avail, 2 * W)


def _ln(v: Fraction) -> float:
    return math.log(v.numerator) - math.log(v.denominator)


def _level_exact(lo: Fraction, hi: Fraction, bb: Ball, prec: int) -> Optional[int]:
    """l with beta^-(l+1) <= lo and hi < beta^-l, checked against ball powers of beta."""
    guess = max(0, math.floor(-_ln(hi) / math.log(float(bb.center))))
    for l in (guess - 1, guess, guess + 1):
        if l < 0:
            continue
        p_l = Ball(1, 0, 0, prec)
        inv = _ball_op(Ball(1, 0, 0, prec), bb, "div", prec)
        for _ in range(l):
            p_l = _ball_op(p_l, inv, "mul", prec)
        p_next = _ball_op(p_l, inv, "mul", prec)
        if hi < p_l.lower and p_next.upper <= lo:
            return l
    return None


def distance_profile(word: DigitWord, N: Optional[int] = None, policy: PrecisionPolicy = DEFAULT_POLICY,
                     float_path: bool = True) -> DistanceProfile:
    e = word.as_array()
    M = len(e)
    N = M - 1 if N is None else min(N, M - 1)
    beta = word.beta
    beta_f = float(beta)
    L = min(_window_length(beta_f), M)
    z_all = np.asarray(z_array(e.tolist()), dtype=np.int64)
    ns = np.arange(1, N + 1)
    z = z_all[1:N + 1]
    start_a = ns + z
    start_b = z
    J = np.zeros(N + 1, dtype=np.int64)
    d_lo = np.zeros(N + 1)
    d_hi = np.full(N + 1, np.inf)
    trunc = np.zeros(N + 1, dtype=bool)
    z_out = np.zeros(N + 1, dtype=np.int64)
    z_out[1:] = z

    ended = start_a >= M
    avail = np.where(ended, 0, M - start_a)
    Lr = np.minimum(L, avail)
    pad = np.concatenate([e, np.zeros(L + 1, dtype=np.int64)])
    cols = np.arange(L)
    ia = np.minimum(start_a, M)[:, None] + cols
    ib = start_b[:, None] + cols
    delta = (pad[ia] - pad[ib]).astype(np.float64)
    delta[cols[None, :] >= Lr[:, None]] = 0.0
    B = inverse_powers(beta, L, policy)
    u = delta @ B
    mag = np.abs(delta) @ B
    tail = np.where(Lr > 0, B[np.maximum(Lr - 1, 0)] * (1 + 1e-12), 1.0)
    err = tail + (L + 4) * 2.0 ** -52 * mag + 1e-300
    au = np.abs(u)
    lnb = math.log(beta_f)
    fallbacks = 0
    for idx in range(N):
        n = idx + 1
        j = int(z[idx])
        if ended[idx]:
            J[n] = j
            d_lo[n] = j
            trunc[n] = True
            continue
        lo = au[idx] - err[idx]
        hi = min(au[idx] + err[idx], 1.0)
        level = None
        if float_path and lo > 0:
            q_lo = -math.log(hi) / lnb * (1 - 1e-12) if hi < 1 else 0.0
            q_hi = -math.log(lo) / lnb * (1 + 1e-12)
            level = _level(q_lo, q_hi)
        if level is not None:
            J[n] = j + level
            d_lo[n], d_hi[n] = j + q_lo, j + q_hi
            continue
        fallbacks += 1
        lev, q_lo, q_hi, was_trunc = _ball_level(e, n + j, j, int(avail[idx]), beta, 2 * L, policy)
        J[n] = j + lev
        d_lo[n], d_hi[n] = j + q_lo, j + q_hi
        trunc[n] = was_trunc
    return DistanceProfile(z_out, J, d_lo, d_hi, trunc, fallbacks)


# --------------------------------------------------------------------------
# match sequences


@dataclass
class Pair:
    k: int
    n: int
    m: int
    t: int
    m_truncated: bool = False
    t_truncated: bool = False

    @property
    def complete(self) -> bool:
        return not (self.m_truncated or self.t_truncated)

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "m": self.m, "t": self.t,
                "m_truncated": self.m_truncated, "t_truncated": self.t_truncated}


@dataclass
class MatchTable:
    word: DigitWord
    N: int
    profile: DistanceProfile
    primed: list[tuple[int, int, bool]]
    pairs: list[Pair]
    horizon: int
    case_tags: dict = field(default_factory=dict)

    @property
    def beta(self) -> Real:
        return self.word.beta

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "horizon": self.horizon,
            "primed_count": len(self.primed),
            "pairs": [p.to_json() for p in self.pairs],
            "fallbacks": self.profile.fallbacks,
            "case_tags": {str(k): v for k, v in self.case_tags.items()},
        }

    def depth_csv(self) -> str:
        prof = self.profile
        rows = ["n,J,d_lo,d_hi,truncated"]
        for n in range(1, self.N + 1):
            rows.append(f"{n},{prof.J[n]},{prof.d_lo[n]:.12g},{prof.d_hi[n]:.12g},{int(prof.truncated[n])}")
        return "\n".join(rows) + "\n"


def _as_word(x, beta, N: Optional[int], policy: PrecisionPolicy) -> DigitWord:
    if isinstance(x, DigitWord):
        return x
    from .beta_core import digits as expand
    if N is None:
        raise ValueError("depth N is required when x is a real number")
    return expand(x, beta, N, policy)


def match_sequences(x, beta=None, N: Optional[int] = None, policy: PrecisionPolicy = DEFAULT_POLICY,
                    check_periodic: bool = True, float_path: bool = True) -> MatchTable:
    """Primed pairs (n'_k, m'_k) with m' read off the metric depths, the record
    subsequence (n_k, m_k) with m_k - n_k strictly increasing, and t_k."""
    word = _as_word(x, beta, N, policy)
    M = len(word)
    if M < 2:
        raise InsufficientDepth("need at least two digits")
    if check_periodic and detect_periodic(word).periodic:
        raise PeriodicInput("word is purely periodic to the available depth")
    N = M - 1 if N is None else min(N, M - 1)
    prof = distance_profile(word, N, policy, float_path=float_path)
    e = word.digits
    primed = []
    for n in range(1, N + 1):
        if e[n] == e[0]:
            primed.append((n, n + int(prof.J[n]), bool(prof.truncated[n])))
    pairs: list[Pair] = []
    best = -1
    for n, m, tr in primed:
        if m - n > best:
            t = n + int(prof.z[n])
            pairs.append(Pair(len(pairs) + 1, n, m, t, m_truncated=tr, t_truncated=t >= M))
            best = m - n
            if tr:
                # later records cannot be ordered against a lower bound
                break
    # r-hat only needs d(n) bounded, not the exact level J
    open_idx = np.nonzero(~np.isfinite(prof.d_hi[1:]))[0]
    horizon = int(open_idx[0]) if len(open_idx) else N
    return MatchTable(word, N, prof, primed, pairs, horizon)


# --------------------------------------------------------------------------
# estimators


@dataclass
class Estimate:
    value: float
    lo: float
    hi: float
    infinite: bool = False
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        if self.infinite:
            return {"value": "inf", "lo": "inf", "hi": "inf", "infinite": True, **self.detail}
        return {"value": self.value, "lo": self.lo, "hi": self.hi, "infinite": False, **self.detail}


INFINITE = Estimate(math.inf, math.inf, math.inf, infinite=True)


def r_estimate(table: Optional[MatchTable], tail: bool = False) -> Estimate:
    """max (m_k - n_k)/n_k over completed pairs; a finite-depth stand-in for the limsup.

    With ``tail`` only the upper half k >= ceil(K/2) of the completed pairs counts.
    """
    if table is None:
        return INFINITE
    done = [p for p in table.pairs if p.complete]
    if tail:
        done = done[(len(done) - 1) // 2:]
    if not done:
        return Estimate(0.0, 0.0, 0.0, detail={"pairs": 0})
    best = max(done, key=lambda p: Fraction(p.m - p.n, p.n))
    v = (best.m - best.n) / best.n
    return Estimate(v, v, v, detail={"pairs": len(done), "argmax_k": best.k, "n": best.n, "m": best.m})


def rhat_estimate(table: Optional[MatchTable], n_min: Optional[int] = None) -> Estimate:
    """min over N0 in [n_min, horizon] of max_{n <= N0} d(n) / N0, plus the
    liminf-over-pairs cross-check (m_k - n_k)/n_{k+1}."""
    if table is None:
        return INFINITE
    H = table.horizon
    if H < 1:
        return Estimate(0.0, 0.0, 0.0, detail={"window": [0, 0]})
    lo_n = n_min if n_min is not None else max(1, math.ceil(H / 4))
    lo_n = min(max(lo_n, 1), H)
    prof = table.profile
    n0 = np.arange(1, H + 1)
    run_lo = np.maximum.accumulate(prof.d_lo[1:H + 1])
    run_hi = np.maximum.accumulate(prof.d_hi[1:H + 1])
    run_mid = np.maximum.accumulate(prof.d[1:H + 1])
    w = slice(lo_n - 1, H)
    ratio_lo = run_lo[w] / n0[w]
    ratio_hi = run_hi[w] / n0[w]
    ratio_mid = run_mid[w] / n0[w]
    arg = int(np.argmin(ratio_mid)) + lo_n
    cross = None
    done = [p for p in table.pairs if p.complete]
    terms = [(a.m - a.n) / b.n for a, b in zip(done, done[1:]) if lo_n <= b.n <= H]
    if terms:
        cross = min(terms)
    elif len(done) >= 2:
        cross = (done[-2].m - done[-2].n) / done[-1].n
    return Estimate(float(ratio_mid.min()), float(ratio_lo.min()), float(ratio_hi.min()),
                    detail={"window": [lo_n, H], "argmin_N0": arg, "pairs_liminf": cross})


def v_estimate(word: DigitWord, N: Optional[int] = None, policy: PrecisionPolicy = DEFAULT_POLICY) -> Estimate:
    """max over n <= N of (-log_beta T^n x)/n, read off zero runs in the digits."""
    e = word.as_array()
    M = len(e)
    N = M - 1 if N is None else min(N, M - 1)
    beta_f = float(word.beta)
    L = min(_window_length(beta_f), M)
    B = inverse_powers(word.beta, L, policy)
    nz = np.flatnonzero(e)
    best, arg = 0.0, None
    lnb = math.log(beta_f)
    for n in range(1, N + 1):
        k = np.searchsorted(nz, n)
        if k >= len(nz):
            break  # only zeros left in the data: T^n x is unresolved
        start = int(nz[k])
        run = start - n
        seg = e[start:start + L]
        val = float(seg @ B[:len(seg)])
        depth = run - math.log(val) / lnb
        if depth / n > best:
            best, arg = depth / n, n
    return Estimate(best, best, best, detail={"argmax_n": arg})


def continued_fraction(x: Real, max_terms: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> list[int]:
    """Partial quotients of x (exact arithmetic when x is exact; stops at an uncertified floor)."""
    from .exactreal import floor_scaled
    out = []
    y = as_real(x)
    for _ in range(max_terms):
        try:
            a = floor_scaled(y, policy)
        except Undecidable:
            break
        out.append(a)
        frac = arith(y, a, "sub", policy)
        if frac.is_exact and frac.sign() == 0:
            break
        try:
            y = arith(1, frac, "div", policy)
        except Exception:
            break
    return out


def w1_estimate(x: Real, log_q_max: float, policy: PrecisionPolicy = DEFAULT_POLICY) -> Estimate:
    """Tail maximum of -log||q_k x|| / log q_k over convergents with log q_k <= log_q_max.

    The tail is the upper half of the available convergents, standing in for the
    limsup.  Rational x is flagged (``rational_input``) and reported as NaN.
    """
    x = as_real(x)
    if isinstance(x, Rational):
        return Estimate(math.nan, math.nan, math.nan, detail={"rational_input": True})
    qs = []
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    terms = continued_fraction(x, 100000 if x.is_exact else 4096, policy)
    for a in terms:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        if q > 1:
            if math.log(q) > log_q_max:
                break
            qs.append(q)
    vals = []
    for qk in qs:
        prod = arith(qk, x, "mul", policy)
        from .exactreal import floor_scaled
        nearest = floor_scaled(arith(prod, Rational(Fraction(1, 2)), "add", policy), policy)
        dist = arith(prod, nearest, "sub", policy)
        if dist.is_exact and dist.sign() == 0:
            break
        try:
            lo, hi = ln_bounds(dist, max(policy.initial, int(4 * math.log2(qk)) + 64))
        except Undecidable:
            break
        vals.append(-((lo + hi) / 2) / math.log(qk))
    if not vals:
        return Estimate(math.nan, math.nan, math.nan, detail={"convergents": 0})
    start = len(vals) // 2
    tail = vals[start:]
    best = max(tail)
    return Estimate(best, min(tail), best, detail={"convergents": len(vals), "window_start": start + 1})


# --------------------------------------------------------------------------
# lemma verifier


@dataclass
class LemmaCase:
    k: int
    n: int
    m: int
    t: int
    case: Optional[str]
    matches: list[str]
    observation_ok: Optional[bool]
    boundary: bool
    violation: bool

    def to_json(self) -> dict:
        return {"k": self.k, "n": self.n, "m": self.m, "t": self.t, "case": self.case,
                "matches": self.matches, "observation_ok": self.observation_ok,
                "t_equals_m_plus_1": self.boundary, "t_exceeds_m_plus_1": self.violation}


def verify_lemma_cases(table: MatchTable, k: int, star: Optional[Sequence[int]] = None,
                       policy: PrecisionPolicy = DEFAULT_POLICY) -> LemmaCase:
    """Decide which of the three digit identities holds for pair k.

    (i)   t >= m:  eps_1..eps_m = eps_1..eps_n eps_1..eps_{m-n}
    (ii)  t < m:   eps_{t+1} = eps_{t-n+1} - 1 and eps_{t+2..m} = eps*_{1..m-t-1}
    (iii) t < m:   eps_{t+1} = eps_{t-n+1} + 1 and eps_{t+2..m} = 0
    The side conditions are checked on the copied prefix: in (ii) the digits
    eps_{t-n+2..m-n} vanish and eps_{t-n+1} > 0; in (iii) they follow eps* and
    eps_{t-n+1} < ceil(beta) - 1.
    """
    pair = table.pairs[k - 1]
    if not pair.complete:
        raise InsufficientDepth(f"pair {k} is truncated")
    e = table.word.digits
    n, m, t = pair.n, pair.m, pair.t
    if star is None:
        star = star_digits(table.beta, max(m - t + 1, 1), policy)
    z = t - n
    matches = []
    obs = None
    if t >= m:
        if list(e[:m]) == list(e[:n]) + list(e[:m - n]):
            matches.append("i")
    else:
        tail = list(e[t + 1:m])
        if e[t] == e[z] - 1 and tail == list(star[:m - t - 1]):
            matches.append("ii")
        if e[t] == e[z] + 1 and all(d == 0 for d in tail):
            matches.append("iii")
        copied = list(e[z + 1:m - n])
        top = ceil_beta(table.beta) - 1
        if e[t] < e[z]:
            obs = e[z] > 0 and all(d == 0 for d in copied)
        else:
            obs = e[z] < top and copied == list(star[:m - t - 1])
    case = matches[0] if len(matches) == 1 else None
    return LemmaCase(k, n, m, t, case, matches, obs, boundary=(t == m + 1), violation=(t > m + 1))


def lemma_survey(table: MatchTable, policy: PrecisionPolicy = DEFAULT_POLICY) -> list[LemmaCase]:
    star = None
    done = [p for p in table.pairs if p.complete]
    if done:
        star = star_digits(table.beta, max(p.m - p.t + 1 for p in done), policy)
    out = [verify_lemma_cases(table, p.k, star, policy) for p in done]
    table.case_tags = {c.k: c.case for c in out}
    return out


# --------------------------------------------------------------------------
# reports


@dataclass
class ExponentReport:
    r: Estimate
    rhat: Estimate
    v: Estimate
    w1: Estimate
    ice_minus_1: float
    icehat_minus_1: float
    depth: int
    n_min: Optional[int]
    horizon: int
    periodicity: Periodicity
    table: Optional[MatchTable] = None

    @property
    def periodic(self) -> bool:
        return self.periodicity.periodic

    def to_json(self) -> dict:
        def num(v):
            return "inf" if math.isinf(v) else (None if math.isnan(v) else v)
        return {
            "r": self.r.to_json(),
            "rhat": self.rhat.to_json(),
            "v": self.v.to_json(),
            "w1": self.w1.to_json(),
            "ice_minus_1": num(self.ice_minus_1),
            "icehat_minus_1": num(self.icehat_minus_1),
            "depth": self.depth,
            "n_min": self.n_min,
            "horizon": self.horizon,
            "periodicity": self.periodicity.to_json(),
            "table": self.table.to_json() if self.table is not None else None,
        }


def exponent_report(source, beta=None, N: Optional[int] = None, n_min: Optional[int] = None,
                    policy: PrecisionPolicy = DEFAULT_POLICY, x: Optional[Real] = None,
                    with_w1: bool = True) -> ExponentReport:
    """All finite-depth exponent estimates for one point.

    ``source`` is a DigitWord or an exact/ball real (expanded to depth N).
    """
    word = _as_word(source, beta, N, policy)
    if x is None and not isinstance(source, DigitWord):
        x = as_real(source)
    per = detect_periodic(word, x=x, policy=policy)
    depth = len(word)
    if per.periodic:
        return ExponentReport(INFINITE, INFINITE, Estimate(math.nan, math.nan, math.nan),
                              Estimate(math.nan, math.nan, math.nan), math.inf, math.inf,
                              depth, n_min, 0, per)
    table = match_sequences(word, N=N, policy=policy, check_periodic=False)
    ice = ice_estimate(word.digits)
    w1 = Estimate(math.nan, math.nan, math.nan, detail={"skipped": True})
    if with_w1:
        log_q_max = depth * math.log(float(word.beta))
        if x is not None:
            w1 = w1_estimate(x, log_q_max, policy)
        else:
            # the word only pins x down to about beta^-depth, so stay well inside that
            prec = int(depth * math.log2(float(word.beta))) + 64
            approx = real_from_digits(DigitWord(word.beta, word.digits), policy=policy).at(prec).center
            w1 = _w1_rational_prefix(Rational(approx), log_q_max / 3)
    return ExponentReport(
        r_estimate(table), rhat_estimate(table, n_min), v_estimate(word, N, policy), w1,
        ice.ice - 1.0, ice.icehat - 1.0, depth, n_min, table.horizon, per, table,
    )


def _w1_rational_prefix(point: Rational, log_q_max: float) -> Estimate:
    """w_1 from the convergents of a rational approximation, below its resolution."""
    v = point.value
    vals = []
    p_prev, p, q_prev, q = 1, 0, 0, 1
    num, den = v.numerator, v.denominator
    while den:
        a = num // den
        num, den = den, num - a * den
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        if q <= 1:
            continue
        if math.log(q) > log_q_max:
            break
        frac = q * v
        dist = abs(frac - round(frac))
        if dist == 0:
            break
        vals.append(-_ln(Fraction(dist)) / math.log(q))
    if not vals:
        return Estimate(math.nan, math.nan, math.nan, detail={"convergents": 0})
    start = len(vals) // 2
    tail = vals[start:]
    best = max(tail)
    return Estimate(best, min(tail), best, detail={"convergents": len(vals), "window_start": start + 1})
