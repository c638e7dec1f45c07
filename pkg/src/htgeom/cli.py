"""Command-line interface.

Exit codes: 0 success, 1 failed verification, 2 malformed input or flags,
3 refused precondition, 4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from . import boundary as bd
from . import dynamics as dy
from . import io
from . import similarity as sm
from . import verify as vf
from .algebra import Field
from .errors import (
    ConvergenceError,
    DomainError,
    FieldMismatchError,
    NumericalDegeneracyError,
    PreconditionError,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_REFUSED = 3
EXIT_NONCONVERGENCE = 4


@dataclass(frozen=True)
class RunConfig:
    field: Field = Field.COMPLEX
    rank: int = 2
    tol: float = 1e-10
    seed: int = 42
    max_word_len: int | None = None
    out: str | None = None
    fmt: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.rank < 2:
            raise ValueError("rank must be at least 2")
        if self.field is Field.OCTONION and self.rank != 2:
            raise ValueError("field O forces rank 2")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_word_len is not None and self.max_word_len < 1:
            raise ValueError("max word length must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if self.fmt not in (None, "csv", "json"):
            raise ValueError("format is csv or json")


class _UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--field", default=None, help="R, C, H or O (default C)")
    p.add_argument("--rank", type=int, default=None, help="n >= 2 (default 2; O forces 2)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--max-word-len", type=int, default=None)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    p.add_argument("--jobs", type=int, default=1, help="worker threads for orbit expansion")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="htgeom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the identity battery")
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("orbit", parents=[common], help="orbit point cloud of a generator set")
    p.add_argument("input")
    p.add_argument("--dedup-tol", type=float, default=1e-9)
    p.add_argument("--cap", type=int, default=100_000)
    p.add_argument("--no-inverses", action="store_true")

    p = sub.add_parser("limitset", parents=[common], help="limit set estimate of a generator set")
    p.add_argument("input")
    p.add_argument("--cluster-radius", type=float, default=1e-3)
    p.add_argument("--contraction", type=float, default=1e-2)
    p.add_argument("--no-inverses", action="store_true")

    p = sub.add_parser("iwasawa", parents=[common], help="KAN decomposition of a matrix")
    p.add_argument("input")

    p = sub.add_parser("fixedpoint", parents=[common], help="fixed point of a similarity")
    p.add_argument("input")
    p.add_argument("--max-iter", type=int, default=100_000)

    p = sub.add_parser("discreteness", parents=[common], help="non-discreteness witness for <f, g>")
    p.add_argument("input")
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-n", type=int, default=40)

    p = sub.add_parser("halfspace", parents=[common], help="classify the visibility half-space of a center")
    p.add_argument("input")
    return parser


def _config(args) -> RunConfig:
    field = Field.parse(args.field) if args.field not in (None, "all") else Field.COMPLEX
    rank = args.rank if args.rank is not None else 2
    return RunConfig(field, rank, args.tol, args.seed, args.max_word_len, args.out, args.fmt, args.jobs)


def _json_only(cfg: RunConfig) -> None:
    if cfg.fmt == "csv":
        raise _UsageError("this command writes JSON only")


# --------------------------------------------------------------------------
# Commands: each returns (text, summary, exit code)

def cmd_verify(cfg: RunConfig, args) -> tuple[str, str, int]:
    _json_only(cfg)
    fields = None if args.field in (None, "all") else [cfg.field]
    results = vf.run_battery(fields, n=cfg.rank, samples=args.samples, seed=cfg.seed, tol=cfg.tol)
    ok = all(r.passed for r in results)
    lines = [r.line() for r in results]
    lines += ["", "octonion multiplication table (row * column):"] + vf.octonion_table_lines()
    lines.append(f"{'ALL PASS' if ok else 'FAILURES'}: {sum(r.passed for r in results)}/{len(results)} identities")
    summary = "\n".join(lines) + "\n"
    doc = {"passed": ok, "results": [r.to_json() for r in results],
           "octonion_table": vf.alg.multiplication_table(Field.OCTONION)}
    return io.dumps_json(doc), summary, EXIT_OK if ok else EXIT_FAILED


def cmd_orbit(cfg: RunConfig, args, doc: dict) -> tuple[str, str, int]:
    gens = io.parse_generator_set(doc, cfg.field, cfg.rank)
    cloud = dy.orbit(gens, max_word_len=cfg.max_word_len or 5, dedup_tol=args.dedup_tol, cap=args.cap,
                     include_inverses=not args.no_inverses, jobs=cfg.jobs)
    if cfg.fmt == "json":
        text = io.dumps_json(cloud.to_json())
    else:
        text = io.dumps_csv(cloud.header(), cloud.rows())
    summary = f"orbit: {len(cloud)} points, truncated={cloud.truncated}\n"
    return text, summary, EXIT_OK


def cmd_limitset(cfg: RunConfig, args, doc: dict) -> tuple[str, str, int]:
    gens = io.parse_generator_set(doc, cfg.field, cfg.rank)
    report = dy.limit_set_estimate(gens, max_word_len=cfg.max_word_len or 10,
                                   cluster_radius=args.cluster_radius, contraction=args.contraction,
                                   include_inverses=not args.no_inverses)
    if cfg.fmt == "csv":
        width = len(report.evidence[0].point.coords()) if report.evidence else 0
        header = [f"x{i}" for i in range(width)] + ["word_length", "word", "lambda"]
        rows = ([format(float(v) + 0.0, ".17g") for v in e.point.coords()]
                + [str(e.word_length), e.word, format(e.lam, ".17g")] for e in report.evidence)
        text = io.dumps_csv(header, rows)
    else:
        text = io.dumps_json(report.to_json())
    flag = " (low confidence)" if report.low_confidence else ""
    summary = (f"limit set: {report.classification}{flag}, contains infinity={report.contains_infinity}, "
               f"{report.words_explored} words\n")
    return text, summary, EXIT_OK


def cmd_iwasawa(cfg: RunConfig, args, doc: dict) -> tuple[str, str, int]:
    _json_only(cfg)
    g = io.parse_group_elem(doc)
    res = bd.iwasawa(g)
    return io.dumps_json(res.to_json()), f"iwasawa: t = {res.t:.17g}\n", EXIT_OK


def cmd_fixedpoint(cfg: RunConfig, args, doc: dict) -> tuple[str, str, int]:
    _json_only(cfg)
    f = io.parse_similarity(doc, cfg.field, cfg.rank)
    p = sm.fixed_point(f, tol=cfg.tol, max_iter=args.max_iter)
    out = {
        "fixed_point": p.to_json(),
        "lambda": f.lam,
        "residual": sm.point_gap(sm.apply(f, p), p),
        "attracting": "fixed_point" if f.lam < 1.0 else "infinity",
        "repelling": "infinity" if f.lam < 1.0 else "fixed_point",
    }
    return io.dumps_json(out), f"fixed point: {p.coords().tolist()}\n", EXIT_OK


def cmd_discreteness(cfg: RunConfig, args, doc: dict) -> tuple[str, str, int]:
    _json_only(cfg)
    f = io.parse_similarity(doc, cfg.field, cfg.rank, key="f")
    g = io.parse_similarity(doc, cfg.field, cfg.rank, key="g")
    report = sm.discreteness_witness(f, g, eps=args.eps, max_n=args.max_n)
    code = EXIT_REFUSED if report.status == "refused" else EXIT_OK
    detail = f" at pair {report.pair}" if report.pair else f": {report.reason}"
    summary = f"discreteness witness: {report.status}{detail}\n"
    return io.dumps_json(report.to_json()), summary, code


def cmd_halfspace(cfg: RunConfig, args, doc: dict) -> tuple[str, str, int]:
    _json_only(cfg)
    beta = io.parse_point(doc, cfg.field, cfg.rank, key="beta")
    kind = sm.halfspace_classify(beta)
    return io.dumps_json(kind.to_json()), f"half-space: {kind.to_json()['kind']}\n", EXIT_OK


COMMANDS = {
    "orbit": cmd_orbit,
    "limitset": cmd_limitset,
    "iwasawa": cmd_iwasawa,
    "fixedpoint": cmd_fixedpoint,
    "discreteness": cmd_discreteness,
    "halfspace": cmd_halfspace,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else EXIT_PARSE
    try:
        cfg = _config(args)
        if args.command == "verify":
            text, summary, code = cmd_verify(cfg, args)
        else:
            doc = io.load_json(args.input)
    except (_UsageError, OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.command != "verify":
        try:
            text, summary, code = COMMANDS[args.command](cfg, args, doc)
        except _UsageError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        except (PreconditionError, DomainError) as exc:
            print(f"refused: {exc}", file=sys.stderr)
            return EXIT_REFUSED
        except (ConvergenceError, NumericalDegeneracyError) as exc:
            print(f"did not converge: {exc}", file=sys.stderr)
            return EXIT_NONCONVERGENCE
        except (FieldMismatchError, KeyError, TypeError, ValueError) as exc:
            print(f"error: malformed input: {exc}", file=sys.stderr)
            return EXIT_PARSE
    if cfg.out is None:
        sys.stdout.write(summary if args.command == "verify" else text)
    else:
        io.emit(text, cfg.out)
        sys.stdout.write(summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
