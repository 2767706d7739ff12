"""Acceptance criteria 1 to 10, each with its runtime bound.

Run directly (``python3 tests/test_acceptance.py``) or through pytest; either
way the terminal summary prints one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import itertools
import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from pondguard import DATA_DIR
from pondguard.cli import main
from pondguard.evidence import (
    AlarpBand,
    EvidencePayload,
    HashConflict,
    HazardGroup,
    NodeKind,
    alarp_band,
    attach_evidence,
    default_cae_skeleton,
    derive_seed,
    load_graph,
)
from pondguard.pond_sim import Outcome, load_scenario, run_episode
from pondguard.rbr_engine import ThrustCommand, deliberate
from pondguard.rule_dsl import compile_decision_tree, load, parse, partition_percepts
from pondguard.safety_kernel import ChannelReading, GuardState, guard_step, power_gate, vote_1oo2
from pondguard.verifier import (
    EnvAbstraction,
    EnvSpec,
    build_state_space,
    check,
    parse_properties,
    parse_property,
    replay,
)

from oracles import brute_force_holds
from rulegen import random_program, split_facts

RESPOND = "respond : G( voted_trip -> F<=2 (action=stop | action=reverse | action=turn_away) )"
CONTACT = "contact_stop : G( contact -> X action=stop )"


@contextmanager
def within(seconds: float):
    t0 = time.perf_counter()
    yield
    elapsed = time.perf_counter() - t0
    assert elapsed < seconds, f"took {elapsed:.2f} s, bound {seconds} s"


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    """Report files shared by criteria 6, 8 and 10."""
    return {"dir": tmp_path_factory.mktemp("evidence")}


def test_criterion_01_voter_truth_table():
    with within(1.0):
        for ta, ha, tb, hb in itertools.product((False, True), repeat=4):
            a, b = ChannelReading(ta, ha), ChannelReading(tb, hb)
            # fail-safe 1oo2: a channel trips the vote if it trips or cannot vouch for itself
            expected = (ta or not ha) or (tb or not hb)
            assert vote_1oo2(a, b) is expected
            if (ta and ha) or (tb and hb):
                assert vote_1oo2(a, b)


def test_criterion_02_alarp_boundaries():
    with within(1.0):
        assert alarp_band(1.999) is AlarpBand.BELOW_2
        assert alarp_band(2.0) is AlarpBand.BAND_2_TO_20
        assert alarp_band(20.0) is AlarpBand.BAND_2_TO_20
        assert alarp_band(20.001) is AlarpBand.ABOVE_20


def test_criterion_03_guard_latch_property():
    rng = np.random.default_rng(2024)
    cmd = ThrustCommand(0.6, -0.3)
    zero = ThrustCommand(0.0, 0.0)
    with within(5.0):
        for _ in range(10_000):
            n = int(rng.integers(1, 60))
            contact = rng.random(n) < 0.15
            trip = rng.random(n) < 0.10
            reset = rng.random(n) < 0.25
            g = GuardState()
            must_hold = False  # a contact has been seen and no qualifying reset since
            latch_events = 0
            for t in range(n):
                was_latched = g.latched
                g = guard_step(g, bool(contact[t]), bool(trip[t]), bool(reset[t]))
                if contact[t]:
                    must_hold = True
                elif must_hold and reset[t] and not trip[t]:
                    must_hold = False
                if must_hold:
                    assert power_gate(g, cmd) == zero
                if g.latched and not was_latched:
                    latch_events += 1
                if was_latched and not g.latched:
                    assert reset[t] and not contact[t]
            assert g.demand_count == latch_events


def test_criterion_04_decision_tree_oracle():
    checked = 0
    seed = 0
    with within(30.0):
        while checked < 25:
            rs = parse(random_program(seed))
            seed += 1
            space = partition_percepts(rs)
            if len(space) > 10_000:
                continue
            tree = compile_decision_tree(rs)
            for cell in space:
                rep = space.representative(cell)
                b, p = split_facts(rep)
                assert tree(rep) == deliberate(b, p, rs).action, (seed - 1, cell)
            checked += 1
    assert checked == 25


def _fixture_rulesets():
    yield "baseline", load(DATA_DIR / "baseline.rbr")
    yield "no_avoid", load(DATA_DIR / "no_avoid.rbr")
    yield "blind", load(DATA_DIR / "blind.rbr")
    yield "contact_stop", parse("rule stop_on_contact: when contact do stop\nrule cruise: when always do hold_course")


def test_criterion_05_checker_matches_brute_force():
    props = parse_properties((DATA_DIR / "collision.prop").read_text()) + [
        parse_property(RESPOND),
        parse_property("latch : G( voted_trip -> X trip_latched )"),
        parse_property("wdt : G( !(wdt>2) )"),
        parse_property("nn : G( voted_trip & !contact -> X X (action=turn_away | action=stop) )"),
    ]
    graphs = cexes = 0
    with within(60.0):
        for name, rs in _fixture_rulesets():
            for deadline in (2, 3, 5, 20):
                for transitions in ("continuous", "free"):
                    env = EnvAbstraction.from_ruleset(rs, EnvSpec(wdt_deadline=deadline, transitions=transitions))
                    g = build_state_space(rs, env)
                    if len(g) > 5000:
                        continue
                    graphs += 1
                    for p in props:
                        v = check(g, p)
                        assert v.holds == brute_force_holds(g, p), (name, deadline, transitions, p.name)
                        if not v.holds:
                            cexes += 1
                            assert replay(v.counterexample, rs).valid
    assert graphs >= 24 and cexes > 0


def test_criterion_06_bounded_response(artifacts):
    out = artifacts["dir"] / "verify_baseline.json"
    with within(10.0):
        rs = load(DATA_DIR / "baseline.rbr")
        g = build_state_space(rs, EnvAbstraction.from_ruleset(rs))
        for text in (RESPOND, CONTACT):
            assert check(g, parse_property(text)).holds, text
        mutant = rs.without("avoid")
        gm = build_state_space(mutant, EnvAbstraction.from_ruleset(mutant))
        v = check(gm, parse_property(RESPOND))
        assert not v.holds and replay(v.counterexample, mutant).valid
        assert main(["verify", str(DATA_DIR / "baseline.rbr"), str(DATA_DIR / "collision.prop"),
                     "--report", str(out)]) == 0
    artifacts["verify"] = out


def test_criterion_07_watchdog_escalation():
    cfg = load_scenario(DATA_DIR / "watchdog_scenario.json")
    rs = load(DATA_DIR / "blind.rbr")
    with within(10.0):
        for i in range(100):
            res = run_episode(cfg.with_seed(derive_seed(77, i)), rs)
            assert all(r.action == "hold_course" for r in res.records)
            first_trip = next(r.tick for r in res.records if r.voted_trip)
            escalations = [r.tick for r in res.records if r.wdt_escalation]
            assert escalations == [first_trip + cfg.controller.wdt_deadline], i
            assert res.outcome is Outcome.GUARD_STOP
            assert not any(r.collision for r in res.records)


def test_criterion_08_campaigns(artifacts):
    base_out = artifacts["dir"] / "campaign_baseline.json"
    degr_out = artifacts["dir"] / "campaign_degraded.json"
    rules = str(DATA_DIR / "baseline.rbr")
    with within(300.0):
        code = main(["campaign", str(DATA_DIR / "baseline_scenario.json"), rules,
                     "--episodes", "1000", "--seed", "0", "--report", str(base_out)])
        base = json.loads(base_out.read_text())
        assert code == 0
        assert base["episodes"] == 1000 and base["collisions"] == 0
        assert base["ci95"][1] <= 0.00383

        main(["campaign", str(DATA_DIR / "degraded_scenario.json"), rules,
              "--episodes", "200", "--seed", "0", "--report", str(degr_out)])
        degr = json.loads(degr_out.read_text())
        assert degr["collisions"] == 0
        assert degr["outcome_counts"].get("guard_stop", 0) >= 0.95 * 200
    artifacts["campaign"] = base_out
    artifacts["demands"] = degr_out


def test_criterion_09_determinism(tmp_path, monkeypatch, capsys):
    scenario = str(DATA_DIR / "degraded_scenario.json")
    rules = str(DATA_DIR / "baseline.rbr")
    with within(60.0):
        traces = []
        for k in range(2):
            out = tmp_path / f"trace{k}.csv"
            main(["sim", scenario, rules, "--seed", "42", "--trace", str(out)])
            traces.append(out.read_bytes())
        assert traces[0] == traces[1] and len(traces[0]) > 1000

        reports = []
        for k, threads in enumerate(("1", "1", "2", "3")):
            monkeypatch.setenv("PONDGUARD_THREADS", threads)
            out = tmp_path / f"campaign{k}.json"
            main(["campaign", scenario, rules, "--episodes", "24", "--seed", "9", "--report", str(out)])
            reports.append(out.read_bytes())
        assert len(set(reports)) == 1
    capsys.readouterr()


def _regenerate_reports(artifacts) -> None:
    d = artifacts["dir"]
    rules = str(DATA_DIR / "baseline.rbr")
    main(["verify", rules, str(DATA_DIR / "collision.prop"), "--report", str(d / "verify_baseline.json")])
    for key, scenario in (("campaign", "baseline"), ("demands", "degraded")):
        out = d / f"campaign_{scenario}.json"
        main(["campaign", str(DATA_DIR / f"{scenario}_scenario.json"), rules, "--episodes", "20",
              "--report", str(out)])
        artifacts[key] = out
    artifacts["verify"] = d / "verify_baseline.json"


def test_criterion_10_cae_pipeline(artifacts, tmp_path, capsys):
    if not {"verify", "campaign", "demands"} <= set(artifacts):
        _regenerate_reports(artifacts)  # running alone: smaller stand-ins, outside the time bound
    with within(5.0):
        g = default_cae_skeleton()
        assert g.root == "C1"
        hazards = [g.node(c) for c in g.node("C1").children]
        assert len(hazards) == 4 and {h.hazard_group for h in hazards} == set(HazardGroup)
        branches = [g.node(c) for c in g.node("C-collision").children]
        assert [b.kind for b in branches] == [NodeKind.ARGUMENT, NodeKind.ARGUMENT]

        cae = tmp_path / "cae.json"
        code = main(["report", str(cae), "--init",
                     "--attach", f"E-verify-collision={artifacts['verify']}",
                     "--attach", f"E-campaign-collision={artifacts['campaign']}",
                     "--attach", f"E-guard-demands={artifacts['demands']}"])
        assert code == 0 and load_graph(cae).complete()

        # perturb one report by a single byte and re-attach
        perturbed = tmp_path / "campaign_perturbed.json"
        data = bytearray(artifacts["campaign"].read_bytes())
        data[-1] ^= 0x01
        perturbed.write_bytes(bytes(data))
        with pytest.raises(HashConflict):
            attach_evidence(load_graph(cae), "E-campaign-collision", EvidencePayload.for_file(perturbed))
        assert main(["report", str(cae), "--attach", f"E-campaign-collision={perturbed}"]) == 1
    capsys.readouterr()


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
