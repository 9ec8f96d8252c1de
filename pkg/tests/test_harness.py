import json

import pytest

from paradox_lab import dsl, harness
from paradox_lab.logic import AgentId

PR = harness.bundled_path("pr_box.exp").read_text(encoding="utf-8")
FR = harness.bundled_path("fr_quantum.exp").read_text(encoding="utf-8")
PR_ENTRIES = "1/2 0 0 1/2 1/2 0 0 1/2 1/2 0 0 1/2 0 1/2 1/2 0"


def run_text(source, **kwargs):
    return harness.run_experiment(dsl.load(source, "test.exp"), source, **kwargs)


def test_reports_are_byte_identical():
    assert harness.run("pr_box.exp").to_json() == harness.run("pr_box.exp").to_json()
    assert harness.run("fr_quantum.exp").to_text() == harness.run("fr_quantum.exp").to_text()


def test_json_report_schema():
    data = json.loads(harness.run("pr_box.exp").to_json())
    assert data["schema"] == harness.REPORT_SCHEMA
    assert set(data) == {"schema", "experiment", "digest", "flags", "physics", "logic", "exit_status"}
    assert set(data["physics"]) == {"theory", "initial", "steps", "assertions", "superglue", "boxes"}
    assert data["logic"]["replay_ok"] is True
    cert = data["logic"]["certificates"][3]
    assert cert["agent"] == "W" and cert["kind"] == "cycle"
    assert {"index", "rule", "premises", "conclusion", "trust_edge", "note"} == set(cert["derivation"][0])


def test_digest_depends_on_flags():
    assert harness.run("pr_box.exp").digest != harness.run("pr_box.exp", depth=5).digest


def test_viewpoint_rule_for_pr_boxes():
    boxes = {tuple(b["agents"]): b["holders"] for b in harness.run("pr_box.exp").physics.boxes}
    assert boxes == {
        ("A", "B"): ["A", "B"],
        ("A", "W"): ["A"],
        ("B", "U"): ["B", "U"],
        ("U", "W"): ["U", "W"],
    }


def test_effective_state_assertion_and_superglue_flags():
    physics = harness.run("pr_box.exp").physics
    assert all(a["ok"] for a in physics.assertions)
    # the PR box is the fine-tuned p = q = 1/2 case: no supergluing
    assert [s["verdict"] for s in physics.superglue] == ["separable-as-split"] * 2


def test_inline_pr_state_matches_builtin():
    inline = run_text(PR.replace("P, R = pr_box", f"P, R = state (2,2)(2,2): {PR_ENTRIES}"))
    builtin = harness.run("pr_box.exp")
    assert [c.statement() for c in inline.certificates] == [c.statement() for c in builtin.certificates]


def test_swap_flip_model_still_finds_the_paradox():
    report = run_text(PR.replace("update copy", "update swap-flip"))
    assert len(report.certificates) == 4


def test_local_state_is_consistent():
    # both parties always answer 0
    local = " ".join(["1 0 0 0"] * 4)
    report = run_text(PR.replace("P, R = pr_box", f"P, R = state (2,2)(2,2): {local}"))
    assert report.exit_status == harness.EXIT_CONSISTENT


def test_signalling_state_is_a_physics_error():
    signalling = "1/2 0 1/2 0 1/2 0 1/2 0 0 1/2 0 1/2 0 1/2 0 1/2"
    with pytest.raises(harness.PhysicsError) as info:
        run_text(PR.replace("P, R = pr_box", f"P, R = state (2,2)(2,2): {signalling}"))
    assert info.value.code == "E_SIGNALLING"


def test_impossible_selection_is_a_physics_error():
    with pytest.raises(harness.PhysicsError) as info:
        run_text(FR.replace("SELECT u=ok w=ok", "SELECT a=0 b=1"))
    assert info.value.code == "E_IMPOSSIBLE_BRANCH"


def test_post_selection_only_reaches_the_last_agent():
    setup = harness.build_setup(dsl.load(FR))
    holders = {f.agent.name for f, rule in setup.kb.given.items() if rule == "post-selection"}
    assert holders == {"W"}


def test_quantum_certificate_is_wigners_atoms():
    (cert,) = harness.run("fr_quantum.exp").certificates
    assert cert.agent == AgentId("W", 4) and cert.kind == "atoms"
    assert cert.statement() == "K_W[(w=fail) & (w=ok)]"


def test_explain_pr_ursula_sees_a_pr_box_with_bob():
    text = harness.explain("pr_box.exp", 3, "U")
    assert "effective box with B" in text and "PR box X~Y = a~ xor b" in text


def test_explain_initial_state_verbatim():
    text = harness.explain("pr_box.exp", 0)
    assert "1/2 0/1 0/1 1/2 | 1/2 0/1 0/1 1/2 | 1/2 0/1 0/1 1/2 | 0/1 1/2 1/2 0/1" in text


def test_explain_bob_prepares_a_box_for_ursula():
    text = harness.explain("fr_quantum.exp", 2, "B")
    assert "if b=0: U sees [P(u=fail)=1, P(u=ok)=0]" in text
    assert "if b=1: U sees [P(u=fail)=1/2, P(u=ok)=1/2]" in text


def test_explain_rejects_bad_time_and_agent():
    with pytest.raises(ValueError):
        harness.explain("pr_box.exp", 7)
    with pytest.raises(ValueError):
        harness.explain("pr_box.exp", 1, "Z")


def test_selftest_all_passes():
    ok, lines = harness.selftest(["all"])
    assert ok and all(line.startswith("PASS") for line in lines)


def test_closure_dump_query():
    report = run_text(PR.replace("QUERY find-contradiction", "QUERY closure-dump"))
    assert report.closure_dump and "K_W (b~=0 => b~=1)" in report.closure_dump


def test_bundled_golden_trace_matches_the_test_copy():
    from pathlib import Path

    test_copy = Path(__file__).parent / "golden" / "pr_box_wigner.trace"
    assert harness.bundled_path("pr_box_wigner.trace").read_text() == test_copy.read_text()
