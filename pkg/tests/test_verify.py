import pytest

from fmr.errors import InvalidInputError
from fmr.formal import MultiplierSystem, build_formal_ring
from fmr.verify import (
    CHECK_IDS,
    IN_SCOPE_RESULTS,
    VerifyContext,
    compile_report,
    report_from_json,
    run_checks,
)


def _ctx(fmr):
    return VerifyContext(fmr)


def test_single_check_pass(t2_z2):
    rep = run_checks(_ctx(t2_z2), ids=["Cor-9.3"])
    assert rep.checks[0].outcome == "pass"
    assert rep.summary == {"pass": 1, "fail": 0, "not_applicable": 0}


def test_cor22_not_applicable_over_z6(z6):
    K = build_formal_ring(z6, MultiplierSystem.all_ones(2, z6))
    rep = run_checks(_ctx(K), ids=["Cor-2.2"])
    check = rep.checks[0]
    assert check.outcome == "not-applicable"
    assert check.unmet == ["component-factor-rings-indecomposable"]


def test_full_run_t3_z2(t3_z2):
    rep = run_checks(_ctx(t3_z2))
    assert rep.summary["fail"] == 0
    by_id = {c.id: c for c in rep.checks}
    assert by_id["Thm-2.1-a1"].outcome == "pass"
    assert by_id["Thm-9.1"].outcome == "pass"
    assert by_id["Cor-9.3"].outcome == "pass"
    assert by_id["Cor-10.5"].outcome == "not-applicable"


def test_full_run_m2_z2(m2_z2):
    rep = run_checks(_ctx(m2_z2))
    assert rep.summary["fail"] == 0
    by_id = {c.id: c for c in rep.checks}
    assert by_id["Cor-10.5"].outcome == "pass"
    assert by_id["Thm-6.3-1"].outcome == "pass"
    assert by_id["Thm-6.3-2"].outcome == "pass"
    assert by_id["Prop-7.1"].outcome == "pass"


def test_unsupported_id(z2):
    K = build_formal_ring(z2, MultiplierSystem.all_ones(2, z2))
    with pytest.raises(InvalidInputError) as exc:
        run_checks(_ctx(K), ids=["Thm-0.0"])
    assert "Thm-0.0" in str(exc.value)
    assert "Cor-9.3" in str(exc.value)


def test_empty_id_set(t2_z2):
    rep = run_checks(_ctx(t2_z2), ids=[])
    assert rep.checks == []
    doc = compile_report(rep, "json")
    assert report_from_json(doc).summary == rep.summary


def test_report_determinism_and_roundtrip(t2_z3):
    ctx = _ctx(t2_z3)
    rep1 = run_checks(ctx)
    rep2 = run_checks(ctx)
    doc1 = compile_report(rep1, "json")
    doc2 = compile_report(rep2, "json")
    assert doc1 == doc2
    back = report_from_json(doc1)
    assert compile_report(back, "json") == doc1
    text = compile_report(rep1, "text")
    assert "summary:" in text


def test_unknown_format(t2_z2):
    rep = run_checks(_ctx(t2_z2), ids=["Lem-3.3"])
    with pytest.raises(InvalidInputError):
        compile_report(rep, "yaml")


def test_coverage_manifest_complete():
    covered = {cid for ids in IN_SCOPE_RESULTS.values() for cid in ids}
    assert covered == set(CHECK_IDS)
    for label, ids in IN_SCOPE_RESULTS.items():
        assert ids, label


def test_fail_path_has_witness(z3):
    # an artificial failing check must carry a witness; exercise via a
    # instance where one theorem hypothesis is deliberately broken by
    # patching the registry is out of scope, so assert the invariant on the
    # recorded checks instead
    K = build_formal_ring(z3, MultiplierSystem.all_zero(2, z3))
    rep = run_checks(_ctx(K))
    for c in rep.checks:
        if c.outcome == "fail":
            assert c.witnesses
        if c.outcome == "not-applicable":
            assert c.unmet
    assert rep.summary["fail"] == 0


def test_blocked_psi_checks(blocked_z3):
    ctx = VerifyContext(blocked_z3, cap=2_000_000)
    rep = run_checks(
        ctx, ids=["Lem-5.1", "Lem-5.2", "Lem-6.2", "Prop-7.1", "Cor-7.2", "Cor-7.3"]
    )
    assert rep.summary["fail"] == 0
    assert rep.summary["pass"] == 6
