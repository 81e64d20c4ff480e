"""Experiment harness behind the command line.

Every ``cmd_*`` function takes an :class:`ExperimentConfig`, returns a
``(report, exit_code)`` pair and never prints.  Reports are plain dicts that
serialize deterministically through :func:`dump_report`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .beta_core import (
    DigitWord, digits, expansion_of_one, is_admissible, random_admissible_word, star_digits,
)
from .errors import (
    AdmissibilityFailed, ConfigError, DepthTooLarge, InsufficientDepth, PeriodicInput, Undecidable,
)
from .exactreal import GREATER, PrecisionPolicy, Real, compare, parse_real
from .recurrence import (
    detect_periodic, exponent_report, lemma_survey, match_sequences, r_estimate, rhat_estimate,
)
from .words import (
    SturmianSpec, apply_morphism_fk, fibonacci_identities, ice_estimate, period_prefix_table,
    psi_omega_quotients, sigma_phi, sturmian_word, to_digits,
)

SCHEMA = "beta-recur/1"
EXIT_OK, EXIT_FALSIFIED, EXIT_UNDECIDABLE, EXIT_CONFIG = 0, 2, 3, 4
MAX_QUOTIENTS = 2 ** 20


@dataclass
class ExperimentConfig:
    beta: str = "2"
    x: Optional[str] = None
    digits: Optional[str] = None
    slope: Optional[str] = None
    k: int = 1
    n: int = 5000
    n_min: Optional[int] = None
    prec_init: int = 64
    prec_max: int = 4096
    fmt: str = "json"
    seed: int = 0
    size: int = 100
    workers: int = 1
    tol_r: float = 0.05
    tol_rhat: float = 0.05
    rhat_bound: float = 1.1
    ice_slack: float = 0.1
    quotients: int = 50
    g: int = 2
    rhat0: str = "1/2"
    n_max: int = 24
    survivor_budget: int = 4_000_000

    def validate(self) -> "ExperimentConfig":
        if self.n < 16:
            raise ConfigError("depth N must be at least 16")
        if self.k < 1:
            raise ConfigError("morphism index k must be >= 1")
        if self.fmt not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.size < 0 or self.workers < 1:
            raise ConfigError("size must be >= 0 and workers >= 1")
        if self.n_min is not None and self.n_min < 1:
            raise ConfigError("N_min must be >= 1")
        try:
            self.policy
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    @property
    def policy(self) -> PrecisionPolicy:
        return PrecisionPolicy(self.prec_init, 2, self.prec_max)

    def beta_value(self) -> Real:
        beta = _parse(self.beta, self.policy, "beta")
        try:
            above = compare(beta, 1, self.policy) == GREATER
        except Undecidable:
            above = False
        if not above:
            raise ConfigError(f"beta {self.beta!r} must be provably greater than 1")
        return beta

    def to_json(self) -> dict:
        return asdict(self)


def _parse(text: str, policy: PrecisionPolicy, what: str) -> Real:
    try:
        return parse_real(text, policy)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {what} {text!r}: {exc}") from None


# --------------------------------------------------------------------------
# slopes


def parse_slope(text: str) -> SturmianSpec:
    """const:c, list:s1,s2,..., periodic:p1,...,pr or psiomega:<psi>;<omega>.

    For psiomega each side is an integer (constant map) or "alt" (alternating
    3,4 for psi and 1,2 for omega).
    """
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "const":
            c = int(body)
            if c < 1:
                raise ValueError
            return SturmianSpec(lambda k: c, name=text)
        if kind == "list":
            return SturmianSpec([int(v) for v in body.split(",")], name=text)
        if kind == "periodic":
            block = [int(v) for v in body.split(",")]
            return SturmianSpec(lambda k: block[(k - 1) % len(block)], name=text)
        if kind == "psiomega":
            psi_s, omega_s = (part.strip() for part in body.split(";"))
            psi = (lambda h: 3 if h % 2 else 4) if psi_s == "alt" else _const(int(psi_s))
            omega = (lambda l: 1 if l % 2 else 2) if omega_s == "alt" else _const(int(omega_s))
            return SturmianSpec(_lazy_psi_omega(psi, omega), name=text)
    except ValueError:
        pass
    raise ConfigError(f"cannot parse slope {text!r}")


def _const(v: int) -> Callable[[int], int]:
    return lambda _i: v


def _lazy_psi_omega(psi, omega) -> Callable[[int], int]:
    cache: list[int] = []

    def get(k: int) -> int:
        if k > MAX_QUOTIENTS:
            raise IndexError(f"quotient index {k} above cap {MAX_QUOTIENTS}")
        if k > len(cache):
            size = min(MAX_QUOTIENTS, max(64, 2 * k))
            cache[:] = psi_omega_quotients(psi, omega, size)
        return cache[k - 1]

    return get


def _words_needed(spec: SturmianSpec, length: int) -> int:
    """Index k of the first standard word with |W_k| >= length."""
    prev, cur, k = 1, spec.s(1), 1
    while cur < length:
        k += 1
        prev, cur = cur, cur * spec.s(k) + prev
    return k


# --------------------------------------------------------------------------
# reports


def _clean(v):
    if isinstance(v, float):
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return _clean(float(v))
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def dump_report(report: dict) -> str:
    payload = {"schema": SCHEMA, **report}
    return json.dumps(_clean(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def parse_digits(text: str) -> tuple[int, ...]:
    """"0 1 0 1", "0,1,0,1" or the compact "0101"."""
    body = text.replace(",", " ").split()
    try:
        if len(body) == 1:
            return tuple(int(c) for c in body[0])
        return tuple(int(c) for c in body)
    except ValueError:
        raise ConfigError(f"cannot parse digits {text!r}") from None


def _point_word(cfg: ExperimentConfig) -> tuple[DigitWord, Optional[Real], dict]:
    """The digit word for --x, --digits or --slope/--k, plus the exact point if known."""
    beta = cfg.beta_value()
    if cfg.x is not None:
        x = _parse(cfg.x, cfg.policy, "x")
        return digits(x, beta, cfg.n, cfg.policy), x, {"source": "x", "x": cfg.x}
    if cfg.digits is not None:
        ds = parse_digits(cfg.digits)
        return DigitWord(beta, ds, truncated_at=len(ds)), None, {"source": "digits"}
    if cfg.slope is not None:
        spec = parse_slope(cfg.slope)
        letters = sturmian_word(spec, -(-cfg.n // cfg.k))
        v = to_digits(apply_morphism_fk(letters, cfg.k))[: cfg.n]
        return DigitWord(beta, v, truncated_at=cfg.n), None, {"source": "slope", "slope": cfg.slope, "k": cfg.k}
    raise ConfigError("one of --x, --digits or --slope is required")


def cmd_expand(cfg: ExperimentConfig) -> tuple[dict, int]:
    cfg.validate()
    beta = cfg.beta_value()
    if cfg.x is None:
        raise ConfigError("--x is required")
    x = _parse(cfg.x, cfg.policy, "x")
    exp1 = expansion_of_one(beta, min(cfg.n, 64), cfg.policy)
    code = EXIT_OK
    try:
        word = digits(x, beta, cfg.n, cfg.policy)
        status = "complete"
    except Undecidable as exc:
        word = exc.partial
        status = "partial"
        code = EXIT_UNDECIDABLE
    adm = is_admissible(word, beta, policy=cfg.policy)
    report = {
        "command": "expand",
        "beta": beta.to_json(),
        "x": x.to_json(),
        "requested_depth": cfg.n,
        "certified_depth": len(word),
        "status": status,
        "digits": word.text(),
        "admissible": adm.to_json(),
        "parry": exp1.status.to_json(),
    }
    if adm.status == "NotAdmissible":
        code = EXIT_FALSIFIED
    return report, code


def cmd_exponents(cfg: ExperimentConfig) -> tuple[dict, int]:
    cfg.validate()
    word, x, src = _point_word(cfg)
    rep = exponent_report(word, n_min=cfg.n_min, policy=cfg.policy, x=x)
    out = {"command": "exponents", "beta": word.beta.to_json(), "input": src, "report": rep.to_json()}
    if cfg.fmt == "csv" and rep.table is not None:
        out["csv"] = rep.table.depth_csv()
    return out, EXIT_OK


def cmd_sturmian(cfg: ExperimentConfig) -> tuple[dict, int]:
    cfg.validate()
    spec = parse_slope(cfg.slope or "const:1")
    w = sturmian_word(spec, cfg.n)
    K = min(cfg.quotients, MAX_QUOTIENTS)
    quot = spec.quotient_list(K)
    sig = sigma_phi(quot, len(quot))
    ice = ice_estimate(w, n_min=cfg.n_min)
    out = {
        "command": "sturmian",
        "slope": cfg.slope or "const:1",
        "length": cfg.n,
        "prefix": w[:200],
        "quotients": quot,
        "sigma": sig.to_json(),
        "ice": ice.to_json(),
    }
    if spec.name in ("const:1", "") or cfg.slope in (None, "const:1"):
        out["fibonacci_identities"] = [fibonacci_identities(k).to_json() for k in range(2, 9)]
    if cfg.fmt == "csv":
        out["csv"] = period_prefix_table(w).to_csv()
    return out, EXIT_OK


def cmd_admissible(cfg: ExperimentConfig) -> tuple[dict, int]:
    cfg.validate()
    if cfg.digits is None:
        raise ConfigError("--digits is required")
    word, _, _ = _point_word(ExperimentConfig(**{**asdict(cfg), "x": None, "slope": None}))
    adm = is_admissible(word, word.beta, policy=cfg.policy)
    code = EXIT_OK if adm.status != "Unknown" else EXIT_UNDECIDABLE
    return {"command": "admissible", "beta": word.beta.to_json(), "length": len(word),
            "result": adm.to_json()}, code


def _lemma_block(table) -> dict:
    cases = lemma_survey(table)
    counts = {"i": 0, "ii": 0, "iii": 0, "none": 0, "several": 0}
    for c in cases:
        if c.case:
            counts[c.case] += 1
        elif c.matches:
            counts["several"] += 1
        else:
            counts["none"] += 1
    return {
        "pairs_checked": len(cases),
        "case_counts": counts,
        "observation_failures": sum(1 for c in cases if c.observation_ok is False),
        "t_equals_m_plus_1": sum(c.boundary for c in cases),
        "t_exceeds_m_plus_1": sum(c.violation for c in cases),
        "cases": [c.to_json() for c in cases],
    }


def cmd_verify_lemma(cfg: ExperimentConfig) -> tuple[dict, int]:
    cfg.validate()
    word, _, src = _point_word(cfg)
    table = match_sequences(word, policy=cfg.policy)
    block = _lemma_block(table)
    bad = block["case_counts"]["none"] + block["case_counts"]["several"] + block["t_exceeds_m_plus_1"]
    return {"command": "verify-lemma", "input": src, "beta": word.beta.to_json(), **block}, (
        EXIT_FALSIFIED if bad else EXIT_OK)


def cmd_theorem1(cfg: ExperimentConfig) -> tuple[dict, int]:
    """Sturmian point f_k(W_phi) read in base beta: r against sigma_phi, r-hat against 1."""
    cfg.validate()
    beta = cfg.beta_value()
    spec = parse_slope(cfg.slope or "const:1")
    letters = sturmian_word(spec, -(-cfg.n // cfg.k))
    v = to_digits(apply_morphism_fk(letters, cfg.k))[: cfg.n]
    star = star_digits(beta, cfg.n + 1, cfg.policy)
    if max(v) > star[0]:
        raise AdmissibilityFailed("digit above eps*_1(beta)", shift=v.index(max(v)))
    adm = is_admissible(v, beta, policy=cfg.policy)
    if adm.status == "NotAdmissible":
        raise AdmissibilityFailed(f"f_{cfg.k}(W) is not admissible at shift {adm.shift}; try a larger k",
                                  shift=adm.shift)
    word = DigitWord(beta, v, truncated_at=cfg.n)
    rep = exponent_report(word, n_min=cfg.n_min, policy=cfg.policy, with_w1=False)
    K = _words_needed(spec, len(letters))
    sig = sigma_phi(spec.quotient_list(K), K)
    target = float(sig.running_max)
    # limsup targets: compare on the upper halves, away from start-up effects of f_k
    r_tail = r_estimate(rep.table, tail=True)
    rhat = rep.rhat.value
    ice_w = ice_estimate(letters, n_from=-(-len(letters) // 16))
    ice_v = ice_estimate(v, n_from=-(-len(v) // 16))
    checks = {
        "r_matches_sigma": abs(r_tail.value - target) <= cfg.tol_r,
        "rhat_matches_1": abs(rhat - 1.0) <= cfg.tol_rhat,
        "ice_preserved": abs(ice_w.ice - ice_v.ice) <= cfg.tol_r,
    }
    out = {
        "command": "theorem1",
        "beta": beta.to_json(),
        "slope": spec.name or "const:1",
        "k": cfg.k,
        "depth": cfg.n,
        "admissible": adm.to_json(),
        "sigma": {"value": target, "K": K, "window_start": sig.window_start},
        "r": rep.r.to_json(),
        "r_tail": r_tail.to_json(),
        "rhat": rep.rhat.to_json(),
        "ice_minus_1": rep.ice_minus_1,
        "icehat_minus_1": rep.icehat_minus_1,
        "ice_letters_tail": ice_w.ice,
        "ice_digits_tail": ice_v.ice,
        "tolerances": {"r": cfg.tol_r, "rhat": cfg.tol_rhat},
        "checks": checks,
        "passed": all(checks.values()),
    }
    return out, EXIT_OK if out["passed"] else EXIT_FALSIFIED


# --------------------------------------------------------------------------
# dimension scan


@dataclass
class DimScanResult:
    g: int
    rhat0: Fraction
    n_min: int
    counts: list[int]
    slopes: list[Optional[float]]
    target: float
    constrained_from: int

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "rhat0": self.rhat0,
            "n_min": self.n_min,
            "counts": self.counts,
            "slopes": self.slopes,
            "target": self.target,
            "constrained_from": self.constrained_from,
            "note": "upper box-counting proxy from cylinder counts; heuristic, not a Hausdorff dimension",
        }


def dimension_scan(g: int, rhat0, n_max: int, n_min: int = 1, budget: int = 4_000_000) -> DimScanResult:
    """Count length-n words whose prefix periods meet the finite-scale r-hat constraint.

    A word survives at length n when, for every N0 in [n_min, n] whose test
    N0 + ceil(rhat0*N0) <= n is decidable from n letters, some n' <= N0 has the
    prefix of length n' + ceil(rhat0*N0) with period n'.  The constraint set is
    prefix-closed, so survivors are grown letter by letter and pruned.
    """
    if g not in (2, 3):
        raise ConfigError("base g must be 2 or 3")
    if n_max > 30:
        raise DepthTooLarge(f"n_max = {n_max} above the enumeration bound 30")
    r0 = Fraction(rhat0)
    if not 0 < r0 <= 1:
        raise ConfigError("rhat0 must lie in (0, 1]")
    words = np.zeros((1, 0), dtype=np.int8)
    match = np.zeros((1, 0), dtype=np.int16)  # match[:, q-1] = lcp(w, w[q:])
    done = n_min - 1
    counts: list[int] = []
    first = None
    for n in range(1, n_max + 1):
        cnt = len(words)
        words = np.hstack([np.repeat(words, g, axis=0),
                           np.tile(np.arange(g, dtype=np.int8), cnt)[:, None]])
        match = np.repeat(match, g, axis=0)
        pos = n - 1
        if pos:
            match = np.hstack([match, np.zeros((cnt * g, 1), dtype=np.int16)])
            q = np.arange(1, n)
            active = match == (pos - q)
            same = words[:, [pos]] == words[:, pos - q]
            match += (active & same).astype(np.int16)
        while True:
            N0 = done + 1
            c = math.ceil(r0 * N0)
            if N0 + c > n:
                break
            if first is None:
                first = n
            keep = (match[:, :N0] >= c).any(axis=1) if N0 <= match.shape[1] else np.zeros(len(words), bool)
            words, match = words[keep], match[keep]
            done = N0
        counts.append(int(len(words)))
        if len(words) > budget:
            raise DepthTooLarge(f"{len(words)} survivors at n = {n} exceed the budget {budget}")
        if not len(words):
            counts.extend([0] * (n_max - n))
            break
    slopes = [math.log(s) / (n * math.log(g)) if s else None for n, s in enumerate(counts, start=1)]
    target = float(((1 - r0) / (1 + r0)) ** 2)
    return DimScanResult(g, r0, n_min, counts, slopes, target, first or n_max)


def cmd_dimension_scan(cfg: ExperimentConfig) -> tuple[dict, int]:
    try:
        r0 = Fraction(cfg.rhat0)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse rhat0 {cfg.rhat0!r}") from None
    res = dimension_scan(cfg.g, r0, cfg.n_max, cfg.n_min or 1, cfg.survivor_budget)
    law = all(b <= cfg.g * a for a, b in zip(res.counts, res.counts[1:]))
    out = {"command": "dimension-scan", "result": res.to_json(), "count_law_holds": law}
    if cfg.fmt == "csv":
        rows = ["n,S,slope"] + [f"{n},{s},{'' if sl is None else f'{sl:.12g}'}"
                                for n, (s, sl) in enumerate(zip(res.counts, res.slopes), start=1)]
        out["csv"] = "\n".join(rows) + "\n"
    return out, EXIT_OK if law else EXIT_FALSIFIED


# --------------------------------------------------------------------------
# corpus


def corpus_item(beta: Real, n: int, seed: int, index: int, policy: PrecisionPolicy,
                n_min: Optional[int] = None) -> dict:
    """Invariant checks for one random admissible point (deterministic in seed, index)."""
    rng = np.random.default_rng([seed, index])
    try:
        w = random_admissible_word(beta, n, rng, policy)
    except Undecidable as exc:
        return {"index": index, "status": "undecidable", "reason": str(exc)}
    per = detect_periodic(w)
    if per.periodic:
        return {"index": index, "status": "periodic", "period": per.period}
    try:
        table = match_sequences(w, policy=policy, check_periodic=False)
    except (InsufficientDepth, PeriodicInput) as exc:
        return {"index": index, "status": "skipped", "reason": str(exc)}
    r = r_estimate(table)
    rh = rhat_estimate(table, n_min)
    ice = ice_estimate(w.digits)
    block = _lemma_block(table)
    block.pop("cases")
    sandwich = _sandwich_ok(table)
    return {
        "index": index,
        "status": "ok",
        "r": r.value,
        "rhat": rh.value,
        "rhat_hi": rh.hi,
        "ice_minus_1": ice.ice - 1.0,
        "horizon": table.horizon,
        "pairs": len(table.pairs),
        "sandwich_ok": sandwich,
        **block,
    }


def _sandwich_ok(table) -> bool:
    """beta^-(J+1) <= |T^n x - x| < beta^-J on every complete primed entry, via the d bounds."""
    prof = table.profile
    for n, m, tr in table.primed:
        if tr:
            continue
        J = m - n
        if not (prof.d_lo[n] > J - 1e-9 and prof.d_hi[n] <= J + 1 + 1e-9):
            return False
    return True


def _corpus_worker(args):
    beta_text, n, seed, index, pinit, pmax, n_min = args
    policy = PrecisionPolicy(pinit, 2, pmax)
    return corpus_item(parse_real(beta_text, policy), n, seed, index, policy, n_min)


def run_corpus(beta_text: str, n: int, size: int, seed: int, policy: PrecisionPolicy,
               workers: int = 1, n_min: Optional[int] = None) -> list[dict]:
    jobs = [(beta_text, n, seed, i, policy.initial, policy.maximum, n_min) for i in range(size)]
    if workers > 1 and size > 1:
        from multiprocessing import Pool
        with Pool(workers) as pool:
            items = pool.map(_corpus_worker, jobs)
    else:
        items = [_corpus_worker(j) for j in jobs]
    return sorted(items, key=lambda d: d["index"])


def summarize_corpus(items: list[dict], rhat_bound: float, ice_slack: float) -> dict:
    ok = [d for d in items if d["status"] == "ok"]
    summary = {
        "size": len(items),
        "analyzed": len(ok),
        "undecidable": sum(d["status"] == "undecidable" for d in items),
        "periodic": sum(d["status"] == "periodic" for d in items),
        "max_rhat": max((d["rhat"] for d in ok), default=None),
        "rhat_violations": sum(d["rhat"] > rhat_bound for d in ok),
        "ice_violations": sum(d["r"] < d["ice_minus_1"] - ice_slack for d in ok),
        "lemma_no_case": sum(d["case_counts"]["none"] for d in ok),
        "lemma_several_cases": sum(d["case_counts"]["several"] for d in ok),
        "lemma_pairs": sum(d["pairs_checked"] for d in ok),
        "t_equals_m_plus_1": sum(d["t_equals_m_plus_1"] for d in ok),
        "t_exceeds_m_plus_1": sum(d["t_exceeds_m_plus_1"] for d in ok),
        "observation_failures": sum(d["observation_failures"] for d in ok),
        "sandwich_failures": sum(not d["sandwich_ok"] for d in ok),
    }
    falsified = {
        "rhat_bound": summary["rhat_violations"] > 0,
        "ice_inequality": summary["ice_violations"] > 0,
        "lemma_cases": summary["lemma_no_case"] + summary["lemma_several_cases"] > 0,
        "lemma_bound": summary["t_exceeds_m_plus_1"] > 0,
        "sandwich": summary["sandwich_failures"] > 0,
    }
    summary["falsified"] = falsified
    summary["passed"] = not any(falsified.values())
    return summary


def cmd_corpus(cfg: ExperimentConfig) -> tuple[dict, int]:
    cfg.validate()
    cfg.beta_value()
    items = run_corpus(cfg.beta, cfg.n, cfg.size, cfg.seed, cfg.policy, cfg.workers, cfg.n_min)
    summary = summarize_corpus(items, cfg.rhat_bound, cfg.ice_slack)
    out = {"command": "corpus", "beta": cfg.beta, "depth": cfg.n, "seed": cfg.seed,
           "summary": summary, "items": items}
    if not summary["passed"]:
        return out, EXIT_FALSIFIED
    if summary["undecidable"]:
        return out, EXIT_UNDECIDABLE
    return out, EXIT_OK
