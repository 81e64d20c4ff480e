import math
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest

from betarecur.beta_core import DigitWord, random_admissible_word
from betarecur.errors import PeriodicInput
from betarecur.exactreal import PrecisionPolicy, Quadratic, Rational, golden_ratio
from betarecur.recurrence import (
    detect_periodic, distance_profile, exponent_report, lemma_survey, match_sequences, orbit_distance,
    r_estimate, rhat_estimate, v_estimate, w1_estimate,
)
from betarecur.words import apply_morphism_fk, fibonacci_spec, sturmian_word, to_digits

getcontext().prec = 400
PHI = golden_ratio()
INV_PHI = Quadratic.make(-1, 1, 5, 2)
DEC_BETA = {"2": Decimal(2), "phi": (1 + Decimal(5).sqrt()) / 2, "3/2": Decimal(3) / 2}


def fib_binary(n):
    return DigitWord(2, to_digits(apply_morphism_fk(sturmian_word(fibonacci_spec(), n), 1)))


def suffix_values(ds, beta):
    """S[n] = sum_i eps_{n+i} beta^-i for the finite word, in 400-digit decimals."""
    S = [Decimal(0)] * (len(ds) + 1)
    for n in range(len(ds) - 1, -1, -1):
        S[n] = (ds[n] + S[n + 1]) / beta
    return S


def oracle_levels(ds, beta, c):
    """Certified J(n) = max{j : |T^n x - x| < beta^-j}, None when the data cannot decide it."""
    M = len(ds)
    S = suffix_values(ds, beta)
    out = {}
    for n in range(1, M):
        err = 2 * beta ** (-(M - n)) * c / (beta - 1)
        diff = abs(S[n] - S[0])
        lo, hi = diff - err, diff + err
        if lo <= 0:
            out[n] = None
            continue
        j = int(math.floor(-float(hi.ln() / beta.ln())))
        # nudge j to the right level against exact powers
        while beta ** -(j + 1) > hi:
            j += 1
        while beta ** -j <= lo and j > 0:
            j -= 1
        ok = beta ** -(j + 1) <= lo and hi < beta ** -j
        out[n] = j if ok else None
    return out


def test_orbit_distance_examples():
    third = Fraction(1, 3)
    assert orbit_distance(third, 2, 1) == Rational(Fraction(1, 3))
    assert orbit_distance(third, 2, 2) == Rational(Fraction(0))
    assert orbit_distance(Fraction(1, 7), 2, 3) == Rational(Fraction(0))


def test_first_primed_index_on_fibonacci_word():
    w = fib_binary(200)
    assert w.digits[:10] == (0, 1, 0, 0, 1, 0, 1, 0, 0, 1)
    table = match_sequences(w)
    scan = [n for n in range(1, len(w)) if w.digits[n] == w.digits[0]]
    assert table.primed[0][0] == scan[0] == 2
    assert [p[0] for p in table.primed] == scan[:len(table.primed)]


@pytest.mark.parametrize("name,c,seed", [("2", 2, 1), ("phi", 2, 2), ("3/2", 2, 3), ("phi", 2, 4)])
def test_levels_against_decimal_oracle(name, c, seed):
    beta = {"2": 2, "phi": PHI, "3/2": Fraction(3, 2)}[name]
    w = random_admissible_word(beta, 500, np.random.default_rng(seed))
    prof = distance_profile(w)
    oracle = oracle_levels(w.digits, DEC_BETA[name], c)
    checked = 0
    for n in range(1, len(w) - 100):
        j = oracle[n]
        if j is None:
            continue
        if prof.truncated[n]:
            assert prof.J[n] <= j
        else:
            assert prof.J[n] == j, n
            checked += 1
    assert checked > 300


def test_sandwich_on_random_golden_words():
    rng = np.random.default_rng([42, 7])
    for _ in range(100):
        w = random_admissible_word(PHI, 2000, rng)
        table = match_sequences(w)
        prof = table.profile
        for n, m, tr in table.primed:
            if tr:
                continue
            J = m - n
            assert prof.d_lo[n] >= J - 1e-9 and prof.d_hi[n] <= J + 1 + 1e-9
        for a, b in zip(table.pairs, table.pairs[1:]):
            assert b.n > a.n and b.m - b.n > a.m - a.n


def test_inverse_golden_ratio_has_no_returns():
    table = match_sequences(INV_PHI, PHI, 100)
    assert table.primed == [] and table.pairs == []
    assert r_estimate(table).value == 0.0


def test_periodic_input_is_infinite():
    w = DigitWord(2, (0, 1) * 50)
    with pytest.raises(PeriodicInput):
        match_sequences(w)
    rep = exponent_report(w)
    assert rep.r.infinite and rep.rhat.infinite
    assert exponent_report(Fraction(1, 7), 2, 60).periodicity.confirmed


def test_lacunary_word_rhat_small():
    ds = [0] * 4000
    pos, gap = 0, 10
    while pos < len(ds):
        ds[pos] = 1
        pos += gap + 1
        gap *= 10
    table = match_sequences(DigitWord(2, tuple(ds)))
    est = rhat_estimate(table, n_min=100)
    assert est.value < 0.05


def test_no_repetition_gives_r_zero():
    # eps_1 = 1 never recurs
    w = DigitWord(3, (2,) + (0, 1) * 10 + (1, 0, 0) * 10)
    assert r_estimate(match_sequences(w)).value == 0.0


def test_fibonacci_exponents():
    table = match_sequences(fib_binary(5000))
    r = r_estimate(table)
    rhat = rhat_estimate(table, n_min=1250)
    assert abs(r.value - (1 + math.sqrt(5)) / 2) < 0.05
    assert abs(rhat.value - 1.0) < 0.05
    assert rhat.lo <= rhat.value <= rhat.hi


def test_detect_periodic_examples():
    assert detect_periodic((0, 1) * 10).kind == "Periodic"
    assert detect_periodic((0, 1) * 10).period == 2
    assert detect_periodic(fib_binary(3000)).kind == "Aperiodic-to-depth"
    pre = detect_periodic((1, 0, 0) + (1, 0) * 10)
    assert pre.kind == "PreperiodicCandidate" and pre.period == 2


def test_w1_examples():
    est = w1_estimate(INV_PHI, 200.0)
    assert abs(est.value - 1.0) < 0.05
    assert w1_estimate(Rational(Fraction(1, 2)), 50.0).detail["rational_input"]


def test_v_matches_run_length_oracle():
    ds = []
    k = 1
    while len(ds) < 3000:
        ds += [1] + [0] * k
        k *= 2
    w = DigitWord(2, tuple(ds[:3000]))
    est = v_estimate(w)
    best = 0.0
    S = suffix_values(w.digits, Decimal(2))
    for n in range(1, len(ds[:3000]) - 1):
        if not any(w.digits[n:]):
            break
        best = max(best, float(-S[n].ln() / Decimal(2).ln()) / n)
    assert abs(est.value - best) < 1e-6


def test_lemma_cases_exhaustive_in_base_two():
    rng = np.random.default_rng([42, 3])
    for _ in range(30):
        table = match_sequences(random_admissible_word(2, 2000, rng))
        for case in lemma_survey(table):
            assert len(case.matches) == 1, case
            assert not case.violation


def test_lemma_survey_on_fibonacci():
    cases = lemma_survey(match_sequences(fib_binary(3000)))
    assert cases and all(c.case is not None and not c.violation for c in cases)


def test_integer_identity_corrected_form():
    for g in (2, 3):
        for q in range(1, 31):
            for p in range(q):
                x = Fraction(p, q)
                for n in range(1, 13):
                    d = orbit_distance(x, g, n).value
                    y = (g ** n - 1) * x
                    norm = min(y - math.floor(y), math.ceil(y) - y)
                    assert d in (norm, 1 - norm)
                    if d <= Fraction(1, 2):
                        assert d == norm


def test_depths_stable_under_doubled_precision():
    w = random_admissible_word(PHI, 600, np.random.default_rng(9))
    a = distance_profile(w)
    b = distance_profile(w, policy=PrecisionPolicy(128, 2, 8192), float_path=False)
    for n in range(1, len(w) - 1):
        if a.truncated[n] or b.truncated[n]:
            continue
        assert a.J[n] == b.J[n]
        assert b.d_lo[n] <= a.d_hi[n] + 1e-9 and a.d_lo[n] <= b.d_hi[n] + 1e-9


def test_depth_csv_and_json():
    table = match_sequences(fib_binary(300))
    lines = table.depth_csv().splitlines()
    assert lines[0] == "n,J,d_lo,d_hi,truncated" and len(lines) == table.N + 1
    assert table.to_json()["pairs"][0]["k"] == 1
