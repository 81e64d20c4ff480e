"""Command line front end: ``betarecur <command> [flags]``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import lab
from .errors import AdmissibilityFailed, ConfigError, DepthTooLarge, PeriodicInput, Undecidable

COMMANDS = {
    "expand": lab.cmd_expand,
    "exponents": lab.cmd_exponents,
    "sturmian": lab.cmd_sturmian,
    "admissible": lab.cmd_admissible,
    "verify-lemma": lab.cmd_verify_lemma,
    "theorem1": lab.cmd_theorem1,
    "dimension-scan": lab.cmd_dimension_scan,
    "corpus": lab.cmd_corpus,
}

HELP = {
    "expand": "digits of x in base beta with admissibility and Parry status",
    "exponents": "finite-depth r, r-hat, v, w1 and ice estimates",
    "sturmian": "characteristic Sturmian prefix, sigma values and period table",
    "admissible": "Parry admissibility of a digit word",
    "verify-lemma": "classify every complete return pair into the three digit cases",
    "theorem1": "Sturmian point f_k(W) in base beta against sigma and 1",
    "dimension-scan": "survivor counts for the finite-scale r-hat constraint",
    "corpus": "invariant checks over random admissible points",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="betarecur", description="Beta-expansions and recurrence exponents.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--beta", default="2", help='base: "2", "3/2", "(1+sqrt(5))/2", "ball:1.8"')
        p.add_argument("--x", help='point in [0,1): "rational:2/3", "dec:0.37", quadratic literal')
        p.add_argument("--digits", help='digit word, "0 1 0 1" or "0101"')
        p.add_argument("--slope", help="const:c, list:..., periodic:..., psiomega:<psi>;<omega>")
        p.add_argument("--k", type=int, default=1, help="morphism index for f_k")
        p.add_argument("--n", type=int, default=5000, help="depth N (word length)")
        p.add_argument("--nmin", type=int, default=None, help="window start N_min")
        p.add_argument("--prec-init", type=int, default=64)
        p.add_argument("--prec-max", type=int, default=4096)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--size", type=int, default=100, help="corpus size")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--tol", type=float, default=0.05, help="theorem1 tolerance for r and r-hat")
        p.add_argument("--quotients", type=int, default=50, help="number of partial quotients K")
        p.add_argument("--g", type=int, default=2, help="dimension-scan base")
        p.add_argument("--rhat0", default="1/2", help="dimension-scan threshold")
        p.add_argument("--nmax", type=int, default=24, help="dimension-scan depth")
        p.add_argument("--out", help="write the report here instead of stdout")
    return parser


def config_from_args(args: argparse.Namespace) -> lab.ExperimentConfig:
    return lab.ExperimentConfig(
        beta=args.beta, x=args.x, digits=args.digits, slope=args.slope, k=args.k, n=args.n,
        n_min=args.nmin, prec_init=args.prec_init, prec_max=args.prec_max, fmt=args.format,
        seed=args.seed, size=args.size, workers=args.workers, tol_r=args.tol, tol_rhat=args.tol,
        quotients=min(args.quotients, lab.MAX_QUOTIENTS), g=args.g, rhat0=args.rhat0, n_max=args.nmax,
    )


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cmd = COMMANDS[args.command]
    try:
        cfg = config_from_args(args)
        report, code = cmd(cfg)
    except (ConfigError, DepthTooLarge) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return lab.EXIT_CONFIG
    except (AdmissibilityFailed, PeriodicInput) as exc:
        report = {"command": args.command, "error": type(exc).__name__, "message": str(exc),
                  "shift": getattr(exc, "shift", None)}
        _emit(lab.dump_report(report), args.out)
        return lab.EXIT_FALSIFIED
    except Undecidable as exc:
        report = {"command": args.command, "error": "Undecidable", "message": str(exc), "depth": exc.depth}
        _emit(lab.dump_report(report), args.out)
        return lab.EXIT_UNDECIDABLE
    if cfg.fmt == "csv" and "csv" in report:
        _emit(report["csv"], args.out)
    else:
        report.pop("csv", None)
        _emit(lab.dump_report(report), args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
