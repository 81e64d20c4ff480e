import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betarecur.words import (
    SturmianSpec, anchored_values, apply_morphism_fk, brute_force_period_prefix, fibonacci_identities,
    fibonacci_spec, ice_estimate, period_prefix_table, psi_omega_quotients, reversed_cf_batch,
    reversed_cf_values, sigma_phi, standard_words, sturmian_word, to_digits,
)

FIB21 = "abaababaabaababaababa"


def naive_period_prefix(w, n):
    """Longest prefix having period n, by testing every prefix length from the top."""
    for length in range(len(w), n - 1, -1):
        if all(w[i] == w[i + n] for i in range(length - n)):
            return length
    return n


def cf_value(terms):
    v = Fraction(terms[-1])
    for t in reversed(terms[:-1]):
        v = t + 1 / v
    return v


def test_sturmian_examples():
    assert sturmian_word(fibonacci_spec(), 21) == FIB21
    assert sturmian_word(SturmianSpec([1]), 1) == "a"
    assert sturmian_word(SturmianSpec([2, 1]), 3) == "bab"
    assert standard_words(SturmianSpec([2, 1]), 2) == ["b", "ba", "bab"]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=12, max_size=12), st.integers(1, 200), st.integers(0, 200))
def test_prefix_stability(qs, a, extra):
    spec = SturmianSpec(qs)
    short = sturmian_word(spec, a)
    assert sturmian_word(spec, a + extra).startswith(short)


def test_standard_words_follow_recursion():
    spec = SturmianSpec(lambda k: 1 + k % 3)
    ws = standard_words(spec, 8)
    for k in range(1, 8):
        assert ws[k + 1] == ws[k] * spec.s(k + 1) + ws[k - 1]
    assert sturmian_word(spec, len(ws[8])) == ws[8]


def test_sigma_examples():
    assert sigma_phi([7], 1).values[0] == 7
    golden = (1 + math.sqrt(5)) / 2
    # the tail max is 10946/6765, the first window value above the limit
    assert abs(float(sigma_phi(lambda k: 1, 40).running_max) - golden) < 1e-8
    assert abs(float(sigma_phi(lambda k: 2, 50).running_max) - (1 + math.sqrt(2))) < 1e-9


def test_sigma_exhaustive_small():
    # every quotient sequence of length <= 6 over 1..5 against direct CF evaluation
    for K in range(1, 7):
        S = np.array(list(itertools.product(range(1, 6), repeat=K)), dtype=np.int64)
        num, den = reversed_cf_batch(S)
        for row in range(0, len(S), max(1, len(S) // 300)):
            s = S[row].tolist()
            vals = reversed_cf_values(s, K)
            for k in range(1, K + 1):
                expect = cf_value(s[:k][::-1])
                assert vals[k - 1] == expect
                assert Fraction(int(num[row, k - 1]), int(den[row, k - 1])) == expect


def test_reversed_cf_batch_uses_python_ints_when_large():
    S = np.full((2, 80), 7, dtype=np.int64)
    num, den = reversed_cf_batch(S)
    assert num.dtype == object
    assert Fraction(num[0, -1], den[0, -1]) == reversed_cf_values([7] * 80, 80)[-1]
    with pytest.raises(ValueError):
        reversed_cf_batch(np.zeros((1, 3), dtype=np.int64))


def test_psi_omega_examples():
    for psi, omega in [(lambda h: 3, lambda l: 1), (lambda h: 4, lambda l: 2), (lambda h: 3 + h % 2, lambda l: 1 + l % 2)]:
        s = psi_omega_quotients(psi, omega, 8)
        assert s[3] == 5 and s[7] == 5
    s = psi_omega_quotients(lambda h: 3, lambda l: 1, 16)
    assert s[16 - 1] == 5 and s[15 - 1] == 3 and s[14 - 1] == 3 and s[13 - 1] == 3 and s[12 - 1] == 1
    with pytest.raises(ValueError):
        psi_omega_quotients(lambda h: 2, lambda l: 1, 8)
    with pytest.raises(ValueError):
        psi_omega_quotients(lambda h: 3, lambda l: 3, 8)


def test_anchored_values_ignore_omega():
    a = psi_omega_quotients(lambda h: 3, lambda l: 1, 2 ** 10)
    b = psi_omega_quotients(lambda h: 3, lambda l: 2, 2 ** 10)
    assert a != b
    assert anchored_values(a, 10) == anchored_values(b, 10)
    assert anchored_values(a, 3) == [cf_value([5, 3]), cf_value([5, 3, 3])]


def test_morphism_examples():
    assert apply_morphism_fk("ab", 1) == "01"
    assert apply_morphism_fk("ab", 2) == "0001"
    assert apply_morphism_fk("b", 3) == "001"
    assert to_digits("0101") == (0, 1, 0, 1)
    with pytest.raises(ValueError):
        apply_morphism_fk("ac", 2)


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="ab", max_size=60), st.integers(1, 6))
def test_morphism_length_and_blocks(w, k):
    img = apply_morphism_fk(w, k)
    assert len(img) == k * len(w)
    for i, c in enumerate(w):
        block = img[k * i:k * (i + 1)]
        assert block == ("0" * k if c == "a" else "0" * (k - 1) + "1")


def test_period_table_examples():
    assert period_prefix_table("aaaa")[1] == 4
    t = period_prefix_table("abab")
    assert t[2] == 4 and t[1] == 1
    fib = period_prefix_table(FIB21)
    assert fib[5] == 11 == naive_period_prefix(FIB21, 5)
    assert fib.to_csv().splitlines()[:2] == ["n,p", "1,1"]


def test_period_table_exhaustive_up_to_16():
    for L in range(1, 17):
        for letters in itertools.product("ab", repeat=L):
            w = "".join(letters)
            p = period_prefix_table(w).p
            for n in range(1, L + 1):
                assert p[n - 1] == naive_period_prefix(w, n)


def test_period_table_random_long_words():
    rng = np.random.default_rng(11)
    for _ in range(100):
        L = int(rng.integers(17, 300))
        w = "".join(rng.choice(list("abc"), size=L, p=[0.6, 0.3, 0.1]))
        p = period_prefix_table(w).p
        for n in range(1, L + 1):
            assert p[n - 1] == brute_force_period_prefix(w, n) == naive_period_prefix(w, n)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="abc", min_size=1, max_size=80))
def test_period_table_invariants(w):
    L = len(w)
    p = period_prefix_table(w).p
    for n in range(1, L + 1):
        v = p[n - 1]
        assert v >= n
        assert all(w[i] == w[i + n] for i in range(v - n))
        assert v == L or w[v - n] != w[v]


def test_ice_examples():
    assert ice_estimate("ab" * 20).infinite
    assert ice_estimate("abcdefghij").ice == 1.0
    fib = sturmian_word(fibonacci_spec(), 10000)
    est = ice_estimate(fib)
    assert not est.infinite
    assert abs(est.ice - (3 + math.sqrt(5)) / 2) < 0.05
    assert est.icehat <= est.ice


def test_fibonacci_identities():
    for k in range(3, 9):
        chk = fibonacci_identities(k)
        assert chk.ok, chk.to_json()
    assert fibonacci_identities(4).words["W_k"] == "abaab"
    chk = fibonacci_identities(3)
    assert chk.words["W_k"] + chk.words["W'_k-1"] == "ababa"
    # W_2 W_2 W'_1 = "ababa" is not a prefix of the Fibonacci word ("abaab")
    two = fibonacci_identities(2)
    assert two.length_ok and not two.prefix_ok
    assert two.words["prefix"] == "abaab"
