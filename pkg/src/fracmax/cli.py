"""Command-line front end.

Subcommands: ``eval`` (one or more points), ``field`` (derivative field on
a grid), ``verify`` (numerical checks), ``corpus`` (seeded corpus file)
and ``continuity`` (one perturbation experiment).

Exit codes: 0 success (for ``verify``: every selected check passed), 1
evaluation failure or a failed check, 2 bad usage.  Every output carries
the tool version, a configuration hash, the seed and a description of
the computed quantity; CSV files carry them as leading ``#`` lines.
Files are written atomically, and commands that write a file write a
JSON and a CSV version side by side.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from ._parallel import JOBS_ENV, default_jobs
from ._serialize import atomic_write, config_hash, dumps
from ._validation import OPS, check_beta, check_op, parse_grid
from .corpus import NAMES, Corpus, load_function, named_profile
from .derivative import CSV_COLUMNS, derivative_field
from .geometry import QuadratureConfig, QuadratureError
from .maximal import (
    SolverConfig,
    SolverError,
    centered_values,
    mI_values,
    noncentered_values,
    truncated_values,
)
from .profile import PiecewiseLinearProfile
from .verify import (
    CHECK_IDS,
    ContinuityExperiment,
    VerifyConfig,
    report_envelope,
    rows_to_csv,
    run_checks,
    run_continuity,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DESCRIPTIONS = {
    "centered": "centered fractional maximal function sup_r r^beta avg_B(x,r) |f|",
    "noncentered": "non-centered fractional maximal function: sup over balls whose closure contains x",
    "truncated": "truncated fractional maximal function: centered sup over r >= eps",
    "mI": "restricted fractional maximal function: centered sup over r <= |x|/4",
    "field": "derivative of the centered fractional maximal function: r^beta avg_B grad|f| . x/|x| at the smallest good radius",
    "corpus": "seeded corpus of piecewise-linear profiles",
}

# keys of a config file that are not command flags
_NESTED = ("solver", "quad")
# flags that do not change any output and stay out of the hash
_UNHASHED = ("out", "jobs", "config", "command", "format")


class UsageError(ValueError):
    """Bad command-line input (exit code 2)."""


@dataclasses.dataclass
class RunConfig:
    """Resolved parameters of one command: flags over config file over defaults."""

    command: str
    params: dict
    seed: int
    format: str = "json"
    out: Optional[str] = None
    solver: SolverConfig = dataclasses.field(default_factory=SolverConfig)

    def hashed(self) -> dict:
        keep = {k: v for k, v in self.params.items() if k not in _UNHASHED}
        return {"command": self.command, "params": keep, "seed": self.seed, "solver": dataclasses.asdict(self.solver)}

    @property
    def config_hash(self) -> str:
        return config_hash(self.hashed())

    def header(self, description: str) -> dict:
        return {
            "tool": "fracmax",
            "version": __version__,
            "command": self.command,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "paper_ref": description,
        }


# ---------------------------------------------------------------------------
# parser


def _add_function_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fn", choices=NAMES, help="named function")
    g.add_argument("--profile", help="profile JSON file with knots, values and optional half_line")
    p.add_argument("--d", type=int, default=1, help="dimension (radial functions for d > 1)")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--exploratory", action="store_true", help="allow 1 <= beta < d")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="64-bit seed recorded in every output")
    p.add_argument("--config", help="JSON file of option values; command-line flags take precedence")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="format printed to stdout")
    p.add_argument("--out", help="output path; the JSON and CSV versions are written side by side")
    p.add_argument("--jobs", type=int, default=None, help=f"worker processes (default ${JOBS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracmax", description="Fractional maximal functions of piecewise-linear functions.")
    ap.add_argument("--version", action="version", version=f"fracmax {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="maximal function value and good radii at points")
    _add_function_args(p)
    p.add_argument("--t", type=float, action="append", help="evaluation point (repeatable)")
    p.add_argument("--op", choices=OPS, default="centered")
    p.add_argument("--eps", type=float, help="truncation radius for --op truncated")
    _add_common(p)

    p = sub.add_parser("field", help="derivative field on a grid")
    _add_function_args(p)
    p.add_argument("--grid", default="-3:3:601", help="start:stop:count")
    p.add_argument("--no-fd", dest="fd", action="store_false", help="skip the finite-difference column")
    _add_common(p)

    p = sub.add_parser("verify", help="run numerical checks")
    p.add_argument("--checks", default=",".join(CHECK_IDS), help="comma-separated check ids: " + ", ".join(CHECK_IDS))
    p.add_argument("--beta", type=float, action="append", help="restrict to these beta values (repeatable)")
    p.add_argument("--dims", help="comma-separated dimensions, e.g. 1,2,3,5")
    p.add_argument("--exploratory", action="store_true", help="also run 1 <= beta < d where supported (reported separately)")
    _add_common(p)

    p = sub.add_parser("corpus", help="write a seeded corpus")
    p.add_argument("--n", type=int, default=20, help="number of random profiles")
    p.add_argument("--radial", action="store_true", help="half-line profiles for radial functions")
    p.add_argument("--no-named", dest="named", action="store_false", help="omit the named functions")
    p.add_argument("--knots", default="4:24", help="min:max knot count")
    _add_common(p)

    p = sub.add_parser("continuity", help="one continuity experiment")
    _add_function_args(p)
    p.add_argument("--family", choices=("additive_bump", "dilation"), default="additive_bump")
    p.add_argument("--schedule", default="1,2,4,8,16,32,64", help="comma-separated j values")
    p.add_argument("--cutoff", type=float, default=4.0, help="radius b of the norm domain")
    p.add_argument("--points", type=int, default=4001, help="grid points on the norm domain")
    _add_common(p)
    return ap


def _subparser(ap: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in ap._subparsers._group_actions:  # argparse keeps subparsers here
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


_VALUE_FLAGS = ("--grid", "--t", "--beta", "--eps", "--cutoff")


def _join_negative(argv: Sequence[str]) -> list:
    """``--grid -1:1:21`` to ``--grid=-1:1:21`` so argparse does not read a flag."""
    out, i = [], 0
    argv = list(argv)
    while i < len(argv):
        a = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if a in _VALUE_FLAGS and len(nxt) > 1 and nxt[0] == "-" and (nxt[1].isdigit() or nxt[1] == "."):
            out.append(f"{a}={nxt}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def _parse(argv: Sequence[str]) -> tuple:
    """Parse flags, folding in a ``--config`` file; returns ``(args, nested)``."""
    argv = _join_negative(argv)
    ap = build_parser()
    args = ap.parse_args(argv)
    nested: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        sp = _subparser(ap, args.command)
        dests = {a.dest for a in sp._actions} - {"help", "config"}
        extra = {"verify"} if args.command == "verify" else set()
        unknown = sorted(set(data) - dests - set(_NESTED) - extra)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        nested = {k: data.pop(k) for k in list(data) if k in _NESTED or k in extra}
        sp.set_defaults(**data)
        args = ap.parse_args(argv)
    return args, nested


def _solver(nested: dict) -> SolverConfig:
    try:
        quad = QuadratureConfig(**nested.get("quad", {}))
        return SolverConfig(**dict(nested.get("solver", {}), quad=quad))
    except TypeError as exc:
        raise UsageError(f"bad solver/quad settings: {exc}") from None


def _function(args):
    if args.fn is None and args.profile is None:
        raise UsageError("give --fn or --profile")
    try:
        return load_function(args.fn, args.profile, args.d)
    except OSError as exc:
        raise UsageError(f"cannot read profile: {exc}") from None


# ---------------------------------------------------------------------------
# output


def _with_header(csv_text: str, header: dict) -> str:
    lines = [f"# {k}: {v}" for k, v in header.items()]
    return "\n".join(lines) + "\n" + csv_text


def _emit(rc: RunConfig, doc: dict, csv_text: str, stdout_doc: Optional[dict] = None) -> None:
    """Write JSON and CSV side by side when ``--out`` is given; print the chosen format."""
    json_text = dumps(doc)
    csv_full = _with_header(csv_text, {k: doc[k] for k in ("tool", "version", "config_hash", "seed", "paper_ref") if k in doc})
    if rc.out:
        stem, ext = os.path.splitext(rc.out)
        stem = stem if ext.lower() in (".json", ".csv") else rc.out
        atomic_write(stem + ".json", json_text)
        atomic_write(stem + ".csv", csv_full)
    text = csv_full if rc.format == "csv" else (dumps(stdout_doc) if stdout_doc is not None and rc.out else json_text)
    sys.stdout.write(text)


def _stderr_failures(failures: list, command: str) -> None:
    sys.stderr.write(json.dumps({"command": command, "passed": not failures, "failures": failures}) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args, rc: RunConfig) -> int:
    f = _function(args)
    b = check_beta(args.beta, args.d, args.exploratory)
    op = check_op(args.op, args.eps)
    if not args.t:
        raise UsageError("give at least one --t")
    pts = np.asarray(args.t, dtype=float)
    if args.d > 1 and np.any(pts < 0):
        raise UsageError("radial points need t >= 0")
    if op == "mI" and np.any(pts == 0):
        raise UsageError("the restricted operator needs t != 0")
    if op == "centered":
        res = centered_values(f, pts, b, rc.solver)
    elif op == "truncated":
        res = truncated_values(f, pts, b, args.eps, rc.solver)
    elif op == "mI":
        res = mI_values(f, pts, b, rc.solver)
    else:
        res = noncentered_values(f, pts, b, rc.solver)
    rows = []
    for r in res:
        if op == "noncentered":
            rows.append({"t": r.point, "value": r.value, "radii": [] if r.degenerate else [r.r_opt], "smallest": None if r.degenerate else r.r_opt,
                         "center": r.s_opt, "boundary_contact": r.boundary_contact, "cap_hit": r.cap_hit, "degenerate": r.degenerate})
        else:
            rows.append({"t": r.point, "value": r.value, "radii": list(r.radii), "smallest": None if r.degenerate else r.smallest,
                         "unique_radius": r.unique_radius, "degenerate": r.degenerate})
    doc = dict(rc.header(DESCRIPTIONS[op]), d=args.d, beta=args.beta, op=op, results=rows)
    if op == "truncated":
        doc["eps"] = args.eps
    _emit(rc, doc, rows_to_csv(rows))
    return EXIT_OK


def cmd_field(args, rc: RunConfig) -> int:
    f = _function(args)
    b = check_beta(args.beta, args.d, args.exploratory)
    grid = parse_grid(args.grid)
    if args.d > 1 and np.any(grid < 0):
        raise UsageError("radial grids need start >= 0")
    fld = derivative_field(f, b, grid, rc.solver, with_fd=args.fd)
    rows = [s.to_dict() for s in fld.samples]
    doc = dict(rc.header(DESCRIPTIONS["field"]), d=args.d, beta=args.beta, q=b.q, lq_norm=fld.lq_norm, n=len(rows), columns=list(CSV_COLUMNS), samples=rows)
    summary = {k: v for k, v in doc.items() if k != "samples"}
    _emit(rc, doc, fld.to_csv(), summary)
    return EXIT_OK


def _verify_config(args, rc: RunConfig, nested: dict) -> VerifyConfig:
    over = dict(nested.get("verify", {}))
    fields = {f.name for f in dataclasses.fields(VerifyConfig)}
    unknown = sorted(set(over) - fields)
    if unknown:
        raise UsageError(f"unknown verify setting(s): {', '.join(unknown)}")
    for k, v in list(over.items()):
        if isinstance(v, list):
            over[k] = tuple(v)
    over["seed"] = rc.seed
    over["solver"] = rc.solver
    over["exploratory"] = bool(args.exploratory or over.get("exploratory", False))
    if args.beta:
        over["betas"] = tuple(args.beta)
    if args.dims:
        try:
            over["dims"] = tuple(int(x) for x in args.dims.split(","))
        except ValueError:
            raise UsageError(f"--dims must be comma-separated integers, got {args.dims!r}") from None
    try:
        return VerifyConfig(**over)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_verify(args, rc: RunConfig, nested: dict) -> int:
    ids = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = [c for c in ids if c not in CHECK_IDS]
    if not ids or unknown:
        raise UsageError(f"unknown check id(s) {', '.join(unknown) or '(none given)'}; choose from {', '.join(CHECK_IDS)}")
    cfg = _verify_config(args, rc, nested)
    reports = run_checks(ids, cfg, jobs=args.jobs)
    doc = report_envelope(reports, cfg)
    doc = dict(rc.header("; ".join(r.paper_ref for r in reports)), **{k: v for k, v in doc.items() if k not in ("tool", "version", "seed")})
    doc["verify_config_hash"] = doc.pop("config_hash")
    doc["config_hash"] = rc.config_hash
    rows = [row for r in reports for row in r.csv_rows()]
    summary = {k: v for k, v in doc.items() if k != "reports"}
    summary["checks"] = [{"check_id": r.check_id, "passed": r.passed, "n_samples": r.n_samples, "max_residual": r.max_residual, "max_ratio": r.max_ratio, "bound": r.bound} for r in reports]
    _emit(rc, doc, rows_to_csv(rows), summary)
    _stderr_failures(doc["failures"], "verify")
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def cmd_corpus(args, rc: RunConfig) -> int:
    try:
        lo, hi = (int(x) for x in args.knots.split(":"))
    except ValueError:
        raise UsageError(f"--knots must be min:max, got {args.knots!r}") from None
    if not 2 <= lo <= hi:
        raise UsageError("--knots needs 2 <= min <= max")
    corpus = Corpus(seed=rc.seed, n_random=args.n, radial=args.radial, include_named=args.named, knot_range=(lo, hi))
    entries = [e.to_dict() for e in corpus]
    doc = dict(rc.header(DESCRIPTIONS["corpus"]), n=len(entries), radial=args.radial, entries=entries)
    rows = [{"name": e["name"], "knots": e["knots"], "values": e["values"], "half_line": e.get("half_line", False)} for e in entries]
    _emit(rc, doc, rows_to_csv(rows), {k: v for k, v in doc.items() if k != "entries"})
    return EXIT_OK


def cmd_continuity(args, rc: RunConfig) -> int:
    b = check_beta(args.beta, args.d, args.exploratory)
    if args.profile is not None:
        with open(args.profile, encoding="utf-8") as fh:
            base = PiecewiseLinearProfile.from_json(fh.read())
        name = os.path.splitext(os.path.basename(args.profile))[0]
    else:
        name = args.fn or "tent"
        base = named_profile(name)
    if args.d > 1 and not base.half_line:
        base = base.restrict_half_line()
    try:
        schedule = tuple(float(x) for x in args.schedule.split(","))
    except ValueError:
        raise UsageError(f"--schedule must be comma-separated numbers, got {args.schedule!r}") from None
    schedule = tuple(int(j) if float(j).is_integer() else j for j in schedule)
    try:
        exp = ContinuityExperiment(base, args.family, schedule, args.cutoff, b.beta, args.d, name=name, n_points=args.points)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = run_continuity(exp, VerifyConfig(seed=rc.seed, solver=rc.solver), jobs=args.jobs)
    doc = dict(rc.header(rep.paper_ref), report=rep.to_dict(), passed=rep.passed)
    _emit(rc, doc, rep.to_csv())
    _stderr_failures(rep.failures(), "continuity")
    return EXIT_OK if rep.passed else EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, nested = _parse(argv)
    except SystemExit as exc:  # argparse: --help/--version exit 0, usage errors exit 2
        return int(exc.code or 0)
    except UsageError as exc:
        sys.stderr.write(f"fracmax: error: {exc}\n")
        return EXIT_USAGE
    try:
        if args.jobs is not None and args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if args.jobs is None:
            args.jobs = default_jobs()
        if not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        solver = _solver(nested)
        params = {k: v for k, v in vars(args).items()}
        rc = RunConfig(args.command, params, args.seed, args.format, args.out, solver)
        if args.command == "eval":
            return cmd_eval(args, rc)
        if args.command == "field":
            return cmd_field(args, rc)
        if args.command == "verify":
            return cmd_verify(args, rc, nested)
        if args.command == "corpus":
            return cmd_corpus(args, rc)
        return cmd_continuity(args, rc)
    except UsageError as exc:
        sys.stderr.write(f"fracmax: error: {exc}\n")
        return EXIT_USAGE
    except (SolverError, QuadratureError, RuntimeError, FloatingPointError) as exc:
        sys.stderr.write(f"fracmax: evaluation failed: {exc}\n")
        return EXIT_FAIL
    except (ValueError, TypeError, OSError) as exc:
        sys.stderr.write(f"fracmax: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
