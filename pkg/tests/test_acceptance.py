"""Acceptance criteria AC1-AC10 at full size.

Each criterion prints one ``PASS``/``FAIL`` line.  Run with ``pytest -s``
or directly with ``python3 -m tests.test_acceptance``.
"""

import contextlib
import io
import json
import math
import os
import tempfile
import time

import pytest

from fracmax.cli import main as cli_main
from fracmax.corpus import tent
from fracmax.maximal import Beta, centered_value
from fracmax.verify import (
    TOL_CONSTANT,
    TOL_GOOD_BALL,
    TOL_IDENTITY,
    TOL_TWO_OPTIMIZERS,
    VerifyConfig,
    check_continuity,
    check_good_ball,
    check_identities,
    check_key_relation,
    check_lemma_bounds,
    check_luiro_fd,
    check_operators,
    check_radii_comparability,
    check_sobolev_1d,
    sobolev_constant,
)

CFG = VerifyConfig()
EXPLICIT_PARTS = ("lemmas.factor4", "lemmas.boundary_point", "lemmas.gradient_average", "lemmas.truncated_lipschitz")
EMPIRICAL_PARTS = ("lemmas.level_set", "lemmas.annulus_average")
DETERMINISM_CHECKS = "identities,good_ball,radii,luiro_fd"


def ac1():
    t0 = time.perf_counter()
    rep = check_identities(CFG)
    secs = time.perf_counter() - t0
    dims = sorted({s["d"] for s in rep.samples})
    tentcase = rep.summary["tent_case"]
    ok = (
        rep.n_samples == 200
        and dims == [1, 2, 3, 5]
        and rep.max_residual <= TOL_IDENTITY
        and secs < 120
        and abs(tentcase["lhs"] - 0.25) <= 1e-12
        and abs(tentcase["rhs"] - 0.25) <= 1e-12
    )
    return ok, f"n={rep.n_samples} d={dims} max_residual={rep.max_residual:.2e} (tol {TOL_IDENTITY:g}) runtime={secs:.1f}s tent {tentcase['lhs']:g}={tentcase['rhs']:g}"


def ac2():
    rep = check_good_ball(CFG)
    ok = rep.n_samples == 100 and rep.max_residual <= TOL_GOOD_BALL
    return ok, f"n={rep.n_samples} good balls={rep.summary['n_radii_total']} max_rel_residual={rep.max_residual:.2e} (tol {TOL_GOOD_BALL:g})"


def ac3():
    rep = check_sobolev_1d(CFG)
    used = [s for s in rep.samples if not s.get("skipped")]
    betas = sorted({s["beta"] for s in used})
    worst = max(s["ratio"] / sobolev_constant(s["beta"]) for s in used)
    per_beta = {b: max(s["ratio"] for s in used if s["beta"] == b) for b in betas}
    ok = (
        betas == [0.1, 0.25, 0.5, 0.75, 0.9]
        and all(sum(1 for s in used if s["beta"] == b) == 200 for b in betas)
        and all(s["ratio"] <= sobolev_constant(s["beta"]) for s in used)
        and abs(sobolev_constant(0.5) - 67.882) < 5e-4
    )
    emp = " ".join(f"{b:g}:{v:.4f}" for b, v in per_beta.items())
    return ok, f"n={len(used)} max ratio/C={worst:.2e}; empirical max ratio by beta {emp}; C(1/2)={sobolev_constant(0.5):.3f}"


def ac4():
    rep = check_luiro_fd(CFG)
    s = rep.summary
    dims = sorted(int(d) for d in s["by_d"])
    ok = s["median_rel_dev"] <= 1e-3 and s["p95_rel_dev"] <= 1e-2 and dims == [1, 2, 3]
    return ok, f"clean n={rep.n_samples} d={dims} median={s['median_rel_dev']:.2e} (tol 1e-3) p95={s['p95_rel_dev']:.2e} (tol 1e-2)"


def ac5():
    rep = check_operators(CFG)
    s = rep.summary
    ok = (
        rep.n_samples >= 500
        and s["sandwich_violations"] == 0
        and s["monotone_violations"] == 0
        and s["covariance_violations"] == 0
        and rep.max_residual <= 1e-6
    )
    return ok, (
        f"n={rep.n_samples} sandwich/monotone/covariance violations="
        f"{s['sandwich_violations']}/{s['monotone_violations']}/{s['covariance_violations']} max covariance dev={rep.max_residual:.2e} (tol 1e-6)"
    )


def ac6():
    rep = check_radii_comparability(CFG)
    s = rep.summary
    ok = rep.n_samples >= 300 and not rep.violations and rep.max_ratio <= 1.0 + TOL_CONSTANT
    return ok, (
        f"pairs={rep.n_samples} violations={len(rep.violations)} max r-ratio/bound={rep.max_ratio:.3f}; "
        f"statement-exponent discrepancies logged={s['statement_exponent_violations']}"
    )


def ac7():
    rep = check_lemma_bounds(CFG)
    parts = {p.check_id: p for p in rep.parts}
    explicit_ok = all(not parts[k].violations and parts[k].max_ratio <= 1 + TOL_CONSTANT and parts[k].n_samples > 0 for k in EXPLICIT_PARTS)
    empirical_ok = all(
        parts[k].n_samples > 0 and math.isfinite(parts[k].summary["empirical_constant"]) and parts[k].summary["relative_change"] <= 0.10
        for k in EMPIRICAL_PARTS
    )
    exp = " ".join(f"{k.split('.')[1]}={parts[k].max_ratio:.6f}(n={parts[k].n_samples})" for k in EXPLICIT_PARTS)
    emp = " ".join(
        f"{k.split('.')[1]}={parts[k].summary['empirical_constant']:.4f}(n={parts[k].n_samples},change={parts[k].summary['relative_change']:.1e})"
        for k in EMPIRICAL_PARTS
    )
    return explicit_ok and empirical_ok, f"lhs/bound {exp}; empirical {emp}"


def ac8():
    rep = check_key_relation(CFG)
    s = rep.summary
    clean = [x for x in rep.samples if x.get("clean") and not x.get("skipped")]
    ineq_ok = all(x["ok"] for x in clean)
    ok = rep.n_samples > 0 and s["sign_match_fraction"] >= 0.99 and ineq_ok and sorted({x["d"] for x in clean}) == [2, 3]
    return ok, f"clean n={rep.n_samples} cases={s['cases']} sign match={s['sign_match_fraction']:.3f} (need 0.99) max excess={rep.max_residual:.2e} (tol {TOL_TWO_OPTIMIZERS:g})"


def ac9():
    rep = check_continuity(CFG)
    fams = sorted({(p.params["function"], p.params["family"]) for p in rep.parts})
    additive_exact = all(p.summary["w11_decreasing"] for p in rep.parts)
    ok = rep.passed and len(fams) == 4 and additive_exact
    ratios = " ".join(f"{p.check_id.split('.', 1)[1]}={p.max_residual:.3f}" for p in rep.parts)
    return ok, f"Delta_last/Delta_first {ratios} (need <= 0.05, tail decreasing; W11 decay exact)"


def ac10():
    with tempfile.TemporaryDirectory() as tmp:
        blobs = []
        for k in range(2):
            stem = os.path.join(tmp, f"run{k}")
            with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
                code = cli_main(["verify", "--checks", DETERMINISM_CHECKS, "--seed", "20261014", "--out", stem])
            with open(stem + ".json", "rb") as a, open(stem + ".csv", "rb") as b:
                blobs.append((code, a.read(), b.read()))
    same = blobs[0] == blobs[1]
    passed_run = blobs[0][0] == 0 and json.loads(blobs[0][1])["passed"]
    v = centered_value(tent(), 0.0, Beta(0.5, 1)).value
    dev = abs(v - (2 / 3) ** 1.5)
    return same and passed_run and dev <= 1e-6, f"verify {DETERMINISM_CHECKS} --seed 20261014 twice byte-identical={same}; tent M(0)={v:.12f} |dev|={dev:.1e} (tol 1e-6)"


CRITERIA = [("AC1", ac1), ("AC2", ac2), ("AC3", ac3), ("AC4", ac4), ("AC5", ac5), ("AC6", ac6), ("AC7", ac7), ("AC8", ac8), ("AC9", ac9), ("AC10", ac10)]


def _line(name, ok, msg):
    return f"{name} {'PASS' if ok else 'FAIL'}: {msg}"


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_acceptance(name, fn, capsys):
    ok, msg = fn()
    with capsys.disabled():
        print("\n" + _line(name, ok, msg))
    assert ok, msg


if __name__ == "__main__":
    results = []
    for name, fn in CRITERIA:
        ok, msg = fn()
        print(_line(name, ok, msg), flush=True)
        results.append(ok)
    raise SystemExit(0 if all(results) else 1)
