"""Combinatorics on words: characteristic Sturmian words, reversed continued
fractions, the f_k morphism, prefix-period tables and initial critical exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

Quotients = Union[Sequence[int], Callable[[int], int]]


def _quotient_getter(s: Quotients) -> Callable[[int], int]:
    """1-based accessor; finite sequences raise IndexError when exhausted."""
    if callable(s):
        return s
    seq = list(s)

    def get(k: int) -> int:
        if k < 1 or k > len(seq):
            raise IndexError(f"partial quotient s_{k} not supplied")
        return seq[k - 1]

    return get


@dataclass
class SturmianSpec:
    quotients: Quotients
    alphabet: tuple[str, str] = ("a", "b")
    name: str = ""

    def s(self, k: int) -> int:
        v = _quotient_getter(self.quotients)(k)
        if v < 1:
            raise ValueError(f"partial quotient s_{k} = {v} must be >= 1")
        return v

    def slope(self, depth: int = 40) -> Fraction:
        """Convergent [0; s_1, ..., s_depth] of the slope."""
        v = Fraction(0)
        ks = []
        for k in range(1, depth + 1):
            try:
                ks.append(self.s(k))
            except IndexError:
                break
        for q in reversed(ks):
            v = 1 / (q + v)
        return v

    def quotient_list(self, count: int) -> list[int]:
        out = []
        for k in range(1, count + 1):
            try:
                out.append(self.s(k))
            except IndexError:
                break
        return out


def fibonacci_spec() -> SturmianSpec:
    return SturmianSpec(lambda k: 1, name="fibonacci")


def sturmian_word(spec: SturmianSpec, length: int) -> str:
    """Length-``length`` prefix of W_phi via W_{k+1} = W_k^{s_{k+1}} W_{k-1}."""
    if length < 1:
        raise ValueError("length must be >= 1")
    a, b = spec.alphabet
    prev = b
    cur = b * (spec.s(1) - 1) + a
    k = 1
    while len(cur) < length:
        s_next = spec.s(k + 1)
        if len(cur) * s_next >= length:
            # the remaining prefix is covered by copies of W_k alone
            reps = -(-length // len(cur))
            return (cur * reps)[:length]
        prev, cur = cur, cur * s_next + prev
        k += 1
    return cur[:length]


def standard_words(spec: SturmianSpec, count: int) -> list[str]:
    """W_0, ..., W_count (fully materialised; intended for small indices)."""
    a, b = spec.alphabet
    ws = [b, b * (spec.s(1) - 1) + a]
    for k in range(1, count):
        ws.append(ws[k] * spec.s(k + 1) + ws[k - 1])
    return ws[: count + 1]


@dataclass
class SigmaReport:
    values: list[Fraction]
    running_max: Fraction
    window_start: int
    argmax: int
    prefix_max: list[Fraction] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "values": [float(v) for v in self.values],
            "running_max": float(self.running_max),
            "running_max_exact": f"{self.running_max.numerator}/{self.running_max.denominator}",
            "window_start": self.window_start,
            "argmax": self.argmax,
        }


def _reversed_cf_pairs(columns: Iterable):
    """Numerator/denominator of [s_k; ..., s_1] for successive s_k.

    v_k = s_k + 1/v_{k-1} gives p_k = s_k p_{k-1} + q_{k-1}, q_k = p_{k-1}; the
    pairs stay coprime.  Works on ints and elementwise on numpy arrays.
    """
    p, q = 1, 0
    for col in columns:
        p, q = col * p + q, p
        yield p, q


def reversed_cf_values(s: Quotients, K: int) -> list[Fraction]:
    """[s_k; s_{k-1}, ..., s_1] for k = 1..K as exact rationals."""
    get = _quotient_getter(s)
    return [Fraction(p, q) for p, q in _reversed_cf_pairs(get(k) for k in range(1, K + 1))]


def reversed_cf_batch(S) -> tuple:
    """Vectorized values for the rows of an (M, K) integer array of quotients.

    Returns (num, den), each (M, K); int64 when the continuants provably fit,
    Python ints in object arrays otherwise.
    """
    import numpy as np

    S = np.asarray(S)
    if S.ndim != 2 or S.size and S.min() < 1:
        raise ValueError("expected a 2-D array of positive partial quotients")
    M, K = S.shape
    bits = K * math.log2(int(S.max()) + 1) if S.size else 0
    dtype = np.int64 if bits < 62 else object
    num = np.empty((M, K), dtype=dtype)
    den = np.empty((M, K), dtype=dtype)
    cols = (S[:, k].astype(dtype) for k in range(K))
    for k, (p, q) in enumerate(_reversed_cf_pairs(cols)):
        num[:, k] = p
        den[:, k] = q
    return num, den


def sigma_phi(s: Quotients, K: int, window_start: Optional[int] = None) -> SigmaReport:
    """Reversed continued-fraction values and their finite-depth limsup.

    ``running_max`` is the maximum over the tail window k in [window_start, K]
    (default ceil(K/2)), which stands in for the limsup; ``prefix_max`` keeps the
    plain running maxima over k <= 1..K.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    values = reversed_cf_values(s, K)
    start = window_start if window_start is not None else max(1, math.ceil(K / 2))
    tail = values[start - 1:]
    best = max(tail)
    argmax = start + tail.index(best)
    prefix = []
    m = values[0]
    for v in values:
        m = max(m, v)
        prefix.append(m)
    return SigmaReport(values, best, start, argmax, prefix)


def psi_omega_exceptional(K: int) -> dict[int, tuple[int, int]]:
    """Indices 2^k - h (k >= 2, 0 <= h < k) up to K, mapped to (k, h)."""
    out = {}
    k = 2
    while 2 ** k - (k - 1) <= K:
        for h in range(k):
            idx = 2 ** k - h
            if idx <= K:
                out[idx] = (k, h)
        k += 1
    return out


def psi_omega_quotients(psi: Callable[[int], int], omega: Callable[[int], int], K: int) -> list[int]:
    """s_{2^k} = 5, s_{2^k - h} = psi(h) for 1 <= h < k, all other indices omega(l)."""
    if K < 1:
        raise ValueError("K must be >= 1")
    special = psi_omega_exceptional(K)
    out = []
    for ell in range(1, K + 1):
        if ell in special:
            _, h = special[ell]
            v = 5 if h == 0 else psi(h)
            if h and v not in (3, 4):
                raise ValueError(f"psi({h}) = {v} not in {{3, 4}}")
        else:
            v = omega(ell)
            if v not in (1, 2):
                raise ValueError(f"omega({ell}) = {v} not in {{1, 2}}")
        out.append(v)
    return out


def anchored_values(quotients: Sequence[int], kmax: int) -> list[Fraction]:
    """[s_{2^k}; s_{2^k - 1}, ..., s_{2^k - k + 1}] for k = 2..kmax: the psi-determined block."""
    out = []
    for k in range(2, kmax + 1):
        block = [quotients[2 ** k - h - 1] for h in range(k)]
        v = Fraction(block[-1])
        for q in reversed(block[:-1]):
            v = q + 1 / v
        out.append(v)
    return out


def apply_morphism_fk(w: str, k: int, alphabet: tuple[str, str] = ("a", "b")) -> str:
    """f_k(a) = 0^k, f_k(b) = 0^(k-1) 1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    a, b = alphabet
    img = {a: "0" * k, b: "0" * (k - 1) + "1"}
    try:
        return "".join(img[c] for c in w)
    except KeyError as exc:
        raise ValueError(f"letter {exc.args[0]!r} not in alphabet {alphabet}") from None


def to_digits(w: str) -> tuple[int, ...]:
    return tuple(int(c) for c in w)


# --------------------------------------------------------------------------
# periodicity


def z_array(w: Sequence) -> list[int]:
    """z[i] = length of the longest common prefix of w and w[i:]; z[0] = len(w)."""
    n = len(w)
    z = [0] * n
    if n == 0:
        return z
    z[0] = n
    l = r = 0
    for i in range(1, n):
        if i < r:
            zi = min(r - i, z[i - l])
        else:
            zi = 0
        while i + zi < n and w[zi] == w[i + zi]:
            zi += 1
        z[i] = zi
        if i + zi > r:
            l, r = i, i + zi
    return z


def prefix_function(w: Sequence) -> list[int]:
    pi = [0] * len(w)
    k = 0
    for i in range(1, len(w)):
        while k and w[i] != w[k]:
            k = pi[k - 1]
        if w[i] == w[k]:
            k += 1
        pi[i] = k
    return pi


@dataclass
class PeriodTable:
    """p[n] = length of the longest prefix of w having period n (1-based n)."""

    length: int
    p: list[int]

    def __getitem__(self, n: int) -> int:
        return self.p[n - 1]

    def to_csv(self) -> str:
        rows = ["n,p"] + [f"{n},{v}" for n, v in enumerate(self.p, start=1)]
        return "\n".join(rows) + "\n"


def period_prefix_table(w: Sequence) -> PeriodTable:
    if len(w) < 1:
        raise ValueError("word must be nonempty")
    z = z_array(w)
    L = len(w)
    p = [n + z[n] for n in range(1, L)] + [L]
    return PeriodTable(L, p)


@dataclass
class IceEstimate:
    ice: float
    icehat: float
    argmax: int
    window: tuple[int, int]
    infinite: bool = False

    def to_json(self) -> dict:
        return {
            "ice": None if self.infinite else self.ice,
            "icehat": None if self.infinite else self.icehat,
            "argmax": self.argmax,
            "window": list(self.window),
            "infinite": self.infinite,
        }


def smallest_period(w: Sequence) -> int:
    L = len(w)
    return L - prefix_function(w)[-1] if L else 0


def ice_estimate(w: Sequence, n_min: Optional[int] = None, table: Optional[PeriodTable] = None,
                 min_repeats: int = 3, n_from: int = 1) -> IceEstimate:
    """Finite-depth initial critical exponent and its uniform variant.

    ice_N = max p[n]/n over n <= |w|/2, skipping n whose period runs into the end
    of the data (those p[n] are only lower bounds).  icehat_N = 1 + min over N0 in
    the window of max_{n <= N0} (p[n] - n)/N0, the window running from n_min
    (default ceil(N/4)) to the last N0 before a period reaches the end.  The word
    is flagged infinite when it repeats its smallest period at least
    ``min_repeats`` times.  ``n_from`` restricts ice_N to n >= n_from.
    """
    L = len(w)
    if L < 2:
        raise ValueError("word must have length >= 2")
    table = table or period_prefix_table(w)
    p = table.p
    per = smallest_period(w)
    if per * min_repeats <= L:
        return IceEstimate(math.inf, math.inf, per, (1, L), infinite=True)
    best, arg = 1.0, max(1, n_from)
    for n in range(max(1, n_from), L // 2 + 1):
        if p[n - 1] == L:
            continue
        r = p[n - 1] / n
        if r > best:
            best, arg = r, n
    horizon = L - 1
    for n in range(1, L):
        if p[n - 1] == L:
            horizon = n - 1
            break
    horizon = max(horizon, 1)
    lo = n_min if n_min is not None else max(1, math.ceil(horizon / 4))
    lo = min(lo, horizon)
    run = 0
    hat = math.inf
    for n0 in range(1, horizon + 1):
        run = max(run, p[n0 - 1] - n0)
        if n0 >= lo:
            hat = min(hat, run / n0)
    return IceEstimate(best, 1.0 + hat, arg, (lo, horizon))


def brute_force_period_prefix(w: Sequence, n: int) -> int:
    """O(L) check of the longest prefix with period n (test oracle)."""
    L = len(w)
    i = 0
    while i + n < L and w[i] == w[i + n]:
        i += 1
    return min(L, i + n)


@dataclass
class FibonacciCheck:
    k: int
    length_ok: bool
    prefix_ok: bool
    commutation_ok: bool
    words: dict

    @property
    def ok(self) -> bool:
        return self.length_ok and self.prefix_ok and self.commutation_ok

    def to_json(self) -> dict:
        return {"k": self.k, "length_ok": self.length_ok, "prefix_ok": self.prefix_ok,
                "commutation_ok": self.commutation_ok, "words": self.words}


def swap_last_two(w: str) -> str:
    if len(w) < 2:
        return w
    return w[:-2] + w[-1] + w[-2]


def fibonacci_numbers(n: int) -> list[int]:
    f = [0, 1]
    while len(f) <= n:
        f.append(f[-1] + f[-2])
    return f


def fibonacci_identities(k: int) -> FibonacciCheck:
    """|W_k| = F_{k+1}; W_phi starts with W_k W_k W'_{k-1}; W_k W'_{k-1} = W_{k-1} W_k."""
    if k < 2:
        raise ValueError("k must be >= 2")
    spec = fibonacci_spec()
    ws = standard_words(spec, k)
    wk, wk1 = ws[k], ws[k - 1]
    F = fibonacci_numbers(k + 2)
    primed = swap_last_two(wk1)
    lead = wk + wk + primed
    ref = sturmian_word(spec, len(lead))
    return FibonacciCheck(
        k,
        length_ok=len(wk) == F[k + 1],
        prefix_ok=ref == lead,
        commutation_ok=wk + primed == wk1 + wk,
        words={"W_k": wk, "W_k-1": wk1, "W'_k-1": primed, "prefix": ref},
    )
