import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracmax.corpus import named_profile, tent
from fracmax.profile import PiecewiseLinearProfile, evaluate
from fracmax.verify import (
    CHECK_IDS,
    IMPLEMENTATION_BUG,
    ContinuityExperiment,
    ExceptionalSet,
    VerifyConfig,
    _explicit_part,
    check_sobolev_1d,
    report_envelope,
    run_checks,
    run_continuity,
    sobolev_constant,
    tent_identity_case,
)

from .conftest import FAST


@pytest.fixture(scope="module")
def fast_reports():
    return {r.check_id: r for r in run_checks(CHECK_IDS, FAST)}


@pytest.mark.parametrize("check_id", CHECK_IDS)
def test_check_passes_small(fast_reports, check_id):
    rep = fast_reports[check_id]
    assert rep.passed, rep.failures()
    assert rep.paper_ref
    assert rep.n_samples > 0
    json.loads(rep.to_json())
    rep.to_csv()


def test_envelope(fast_reports):
    env = report_envelope(list(fast_reports.values()), FAST)
    assert env["passed"] and env["failures"] == []
    assert env["config_hash"] == FAST.hash


def test_reports_are_deterministic():
    a = run_checks(["identities", "radii"], FAST)
    b = run_checks(["identities", "radii"], FAST)
    assert [r.to_json() for r in a] == [r.to_json() for r in b]
    c = run_checks(["identities"], dataclasses.replace(FAST, seed=1))
    assert c[0].to_json() != a[0].to_json()


def test_parallel_matches_serial():
    a = run_checks(["good_ball"], FAST, jobs=1)[0]
    b = run_checks(["good_ball"], FAST, jobs=2)[0]
    assert a.to_json() == b.to_json()


def test_unknown_check():
    with pytest.raises(ValueError, match="unknown check"):
        run_checks(["nope"], FAST)


def test_config_validation():
    with pytest.raises(ValueError):
        VerifyConfig(betas=(1.2,))
    assert VerifyConfig().hash == VerifyConfig().hash
    assert VerifyConfig(seed=1).hash != VerifyConfig().hash


def test_sobolev_constant_value():
    assert sobolev_constant(0.5) == pytest.approx(67.882, abs=1e-3)
    rep = check_sobolev_1d(dataclasses.replace(FAST, betas=(0.5,), n_sobolev=2))
    assert rep.bound == pytest.approx(sobolev_constant(0.5), rel=1e-12)
    assert rep.passed


def test_tent_identity():
    case = tent_identity_case()
    for side in ("center", "outer", "inner"):
        assert case[f"lhs_{side}"] == pytest.approx(0.25, abs=1e-12)
        assert case[f"rhs_{side}"] == pytest.approx(0.25, abs=1e-12)
    assert case["residual"] <= 1e-12


def test_explicit_violation_adds_note():
    samples = [{"index": 0, "excess": 0.5, "ok": False}, {"index": 1, "excess": -0.1, "ok": True}]
    rep = _explicit_part("lemmas.factor4", samples, "excess", "ok", {})
    assert not rep.passed and rep.violations == [0]
    assert IMPLEMENTATION_BUG in rep.notes
    assert rep.max_ratio == pytest.approx(1.5)
    ok = _explicit_part("lemmas.factor4", samples[1:], "excess", "ok", {})
    assert ok.passed and ok.notes == []


def test_continuity_constant_family_has_zero_delta():
    zero_bump = PiecewiseLinearProfile([-0.5, 0.25, 1.0], [0.0, 0.0, 0.0])
    exp = ContinuityExperiment(tent(), "additive_bump", (1, 2, 4, 8), 2.0, bump=zero_bump, n_points=101)
    rep = run_continuity(exp, FAST)
    # the zero bump only inserts knots, so Delta is at rounding level
    assert all(r["delta"] <= 1e-12 and r["w11_distance"] == 0.0 for r in rep.samples)


def test_continuity_decays():
    exp = ContinuityExperiment(named_profile("plateau"), "dilation", (1, 2, 4, 8, 16, 32, 64), 4.0, n_points=401)
    rep = run_continuity(exp, FAST)
    assert rep.passed
    d = [r["delta"] for r in rep.samples]
    assert d[-1] < d[0]


def test_continuity_validation():
    with pytest.raises(ValueError):
        ContinuityExperiment(tent(), "shift")
    with pytest.raises(ValueError):
        ContinuityExperiment(tent(), schedule=(1, 2, 2, 4))


@settings(max_examples=60, deadline=None)
@given(
    vals=st.lists(st.floats(0.0, 3.0), min_size=3, max_size=8),
    level=st.floats(0.05, 2.0),
    probe=st.lists(st.floats(-0.5, 1.5), min_size=1, max_size=30),
)
def test_exceptional_set_membership(vals, level, probe):
    vals = [0.0] + vals + [0.0]
    g = PiecewiseLinearProfile(np.linspace(0.0, 1.0, len(vals)), vals)
    es = ExceptionalSet.from_profile(g, 0.0, 1.0, level)
    t = np.asarray(probe)
    gv = evaluate(g, t)
    direct = (t >= 0) & (t <= 1) & (gv >= level / 2) & (gv <= 2 * level)
    got = es.contains(t)
    # points within rounding of a level crossing may fall either way
    near = (np.abs(gv - level / 2) < 1e-9) | (np.abs(gv - 2 * level) < 1e-9)
    assert np.all((got == direct) | near)
    assert es.measure() <= 1.0 + 1e-12


def test_exceptional_set_integrals():
    g = PiecewiseLinearProfile([0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
    es = ExceptionalSet.from_profile(g, 0.0, 2.0, 1.0)
    # {1/2 <= g <= 2} = [1/4, 7/4], slope 2 throughout
    assert es.measure() == pytest.approx(1.5)
    assert es.slope_integral(g) == pytest.approx(3.0)
    assert ExceptionalSet.from_profile(g, 0.0, 2.0, 0.0).measure() == 0.0
