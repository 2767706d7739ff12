from __future__ import annotations

import json

import pytest

from pondguard import DATA_DIR
from pondguard.rbr_engine import Percept
from pondguard.rule_dsl import ActionKind, load, parse
from pondguard.verifier import (
    Counterexample,
    EnvAbstraction,
    EnvSpec,
    Inconclusive,
    LimitExceeded,
    Limits,
    PropertySyntaxError,
    ReplayMismatch,
    build_state_space,
    check,
    parse_properties,
    parse_property,
    replay,
    report_json,
)
from pondguard.verifier.props import ActionIs, Flag, Globally, Implies, Next, POr, Within

from oracles import bfs_distances, brute_force_holds, contact_stop_reachable, holds

CONTACT_STOP = "rule stop_on_contact: when contact do stop\nrule cruise: when always do hold_course"
# frozen from oracles.contact_stop_reachable (hand-written semantics, deadline 20)
CONTACT_STOP_STATES = 184

EXTRA_PROPS = """
latch_follows_trip : G( voted_trip -> X trip_latched )
never_hold_after_contact : G( contact -> X !action=hold_course )
stop_within_one : G( contact -> F<=1 action=stop )
wdt_short : G( !(wdt>2) )
always_cruise : G( action=hold_course )
double_next : G( voted_trip & !contact -> X X (action=turn_away | action=reverse | action=stop) )
"""


def _props():
    return parse_properties((DATA_DIR / "collision.prop").read_text()) + parse_properties(EXTRA_PROPS)


def _graph(rules, **spec):
    rs = rules if not isinstance(rules, str) else parse(rules)
    return rs, build_state_space(rs, EnvAbstraction.from_ruleset(rs, EnvSpec(**spec)))


# -- exploration ------------------------------------------------------------------


def test_single_cell_fixed_point():
    rs = parse("rule only: when always do hold_course")
    g = build_state_space(rs, EnvAbstraction.single_cell())
    assert len(g) == 1 and g.transitions == 1 and g.succ[0] == (0,)


def test_state_count_matches_brute_force_oracle():
    assert len(contact_stop_reachable()) == CONTACT_STOP_STATES
    _, g = _graph(CONTACT_STOP, transitions="free", channel_faults=False)
    assert len(g.env) == 4
    assert len(g) == CONTACT_STOP_STATES


def test_oracle_states_match_exactly():
    _, g = _graph(CONTACT_STOP, transitions="free", channel_faults=False)
    mine = set()
    for s in g.states:
        p = g.env.percepts[s.env_cell]
        mine.add((p.contact, p.voted_trip, s.beliefs.trip_latched, s.beliefs.ticks_since_trip,
                  s.last_action.kind.value, s.beliefs.last_action.kind.value, s.wdt_armed, s.wdt_counter))
    assert mine == contact_stop_reachable()


def test_limit_exceeded_states():
    rs = parse(CONTACT_STOP)
    with pytest.raises(LimitExceeded) as err:
        build_state_space(rs, EnvAbstraction.from_ruleset(rs), Limits(max_states=1))
    assert err.value.kind == "states"
    assert len(err.value.graph) == 1 and not err.value.graph.complete


def test_limit_exceeded_depth():
    rs = parse(CONTACT_STOP)
    with pytest.raises(LimitExceeded) as err:
        build_state_space(rs, EnvAbstraction.from_ruleset(rs), Limits(max_depth=1))
    assert err.value.kind == "depth"


def test_env_transition_relation_is_total_and_continuous(baseline_rules):
    env = EnvAbstraction.from_ruleset(baseline_rules)
    assert all(env.successors)
    assert all(p.distance >= 0 for p in env.percepts)
    dist = sorted({p.distance for p in env.percepts})
    assert dist[-1] > env.clear_threshold  # a band beyond the latch-clearing cut
    for i, succ in enumerate(env.successors):
        here = dist.index(env.percepts[i].distance)
        assert all(abs(dist.index(env.percepts[j].distance) - here) <= 1 for j in succ)
    with pytest.raises(ValueError):
        EnvAbstraction((), (Percept(),), ((),), (0,))


def test_env_from_json(data_dir, baseline_rules):
    spec = EnvSpec.model_validate_json((data_dir / "verify_env.json").read_text())
    assert spec == EnvSpec()
    with pytest.raises(ValueError):
        EnvSpec.model_validate({"bogus": 1})


def test_exploration_is_deterministic(baseline_rules):
    env = EnvAbstraction.from_ruleset(baseline_rules, EnvSpec(wdt_deadline=4))
    a = build_state_space(baseline_rules, env)
    b = build_state_space(baseline_rules, env)
    assert a.states == b.states and a.succ == b.succ
    mutant = baseline_rules.without("avoid")
    ga, gb = build_state_space(mutant, env), build_state_space(mutant, env)
    prop = parse_properties((DATA_DIR / "collision.prop").read_text())[0]
    va, vb = check(ga, prop), check(gb, prop)
    assert (va.states_explored, va.transitions) == (vb.states_explored, vb.transitions)
    assert va.counterexample == vb.counterexample


# -- checking ---------------------------------------------------------------------


def test_single_state_verdicts():
    rs = parse("rule only: when always do hold_course")
    g = build_state_space(rs, EnvAbstraction.single_cell())
    ok = check(g, parse_property("p : G( action=hold_course )"))
    assert ok.holds and ok.counterexample is None
    bad = check(g, parse_property("p : G( action=stop )"))
    assert not bad.holds and len(bad.counterexample) == 1


def test_baseline_properties_hold(baseline_rules):
    g = build_state_space(baseline_rules, EnvAbstraction.from_ruleset(baseline_rules))
    for p in parse_properties((DATA_DIR / "collision.prop").read_text()):
        assert check(g, p).holds, p.name


def test_mutation_flips_bounded_response(baseline_rules):
    mutant = baseline_rules.without("avoid")
    g = build_state_space(mutant, EnvAbstraction.from_ruleset(mutant))
    respond, contact = parse_properties((DATA_DIR / "collision.prop").read_text())
    v = check(g, respond)
    assert not v.holds
    cex = v.counterexample
    assert cex.steps[cex.violation_index].percept.voted_trip
    assert replay(cex, mutant).valid
    assert check(g, contact).holds


@pytest.mark.parametrize("deadline", [2, 3, 5])
@pytest.mark.parametrize("rules", ["baseline", "no_avoid", "blind", "contact_stop"])
def test_verdicts_match_brute_force(rules, deadline):
    rs = parse(CONTACT_STOP) if rules == "contact_stop" else load(DATA_DIR / f"{rules}.rbr")
    for spec in (dict(wdt_deadline=deadline), dict(wdt_deadline=deadline, transitions="free")):
        g = build_state_space(rs, EnvAbstraction.from_ruleset(rs, EnvSpec(**spec)))
        assert len(g) <= 5000
        for p in _props():
            v = check(g, p)
            assert v.holds == brute_force_holds(g, p), (rules, spec, p.name)
            if not v.holds:
                assert replay(v.counterexample, rs).valid


def test_state_property_counterexample_is_minimal():
    rs = load(DATA_DIR / "no_avoid.rbr")
    for deadline in (2, 3, 6):
        g = build_state_space(rs, EnvAbstraction.from_ruleset(rs, EnvSpec(wdt_deadline=deadline)))
        dist = bfs_distances(g)
        for text in ("p : G( !(wdt>0) )", "p : G( !trip_latched )", "p : G( !(contact & voted_trip) )"):
            prop = parse_property(text)
            v = check(g, prop)
            violating = [i for i, s in enumerate(g.states) if not holds(prop.formula.body, [(s, g.percept(i))], 0)]
            assert not v.holds
            assert len(v.counterexample) - 1 == min(dist[i] for i in violating)


def test_inconclusive_on_truncated_graph(baseline_rules):
    env = EnvAbstraction.from_ruleset(baseline_rules)
    with pytest.raises(LimitExceeded) as err:
        build_state_space(baseline_rules, env, Limits(max_states=50))
    prop = parse_properties((DATA_DIR / "collision.prop").read_text())[0]
    with pytest.raises(Inconclusive):
        check(err.value.graph, prop)


def test_truncated_graph_can_still_refute():
    rs = parse("rule only: when always do hold_course")
    env = EnvAbstraction.from_ruleset(rs)
    with pytest.raises(LimitExceeded) as err:
        build_state_space(rs, env, Limits(max_states=2))
    v = check(err.value.graph, parse_property("p : G( action=stop )"))
    assert not v.holds


# -- replay -----------------------------------------------------------------------


def test_replay_against_other_ruleset_mismatches(baseline_rules):
    mutant = baseline_rules.without("avoid")
    g = build_state_space(mutant, EnvAbstraction.from_ruleset(mutant))
    v = check(g, parse_properties((DATA_DIR / "collision.prop").read_text())[0])
    with pytest.raises(ReplayMismatch):
        replay(v.counterexample, baseline_rules)


def test_replay_empty_trace():
    prop = parse_property("p : G( action=stop )")
    cex = Counterexample(prop, (), 0, None)
    with pytest.raises(ReplayMismatch) as err:
        replay(cex, parse(CONTACT_STOP))
    assert err.value.step == 0


# -- properties and reports -------------------------------------------------------


def test_property_parser_shapes():
    p = parse_property("r : G( voted_trip -> F<=2 (action=stop | action=reverse) )")
    response = POr(ActionIs(ActionKind.STOP), ActionIs(ActionKind.REVERSE))
    assert p.formula == Globally(Implies(Flag("voted_trip"), Within(2, response)))
    q = parse_property("s : G( contact -> X action=stop )")
    assert isinstance(q.formula.body.right, Next)
    assert parse_property(str(p)) == p


@pytest.mark.parametrize(
    "text, line",
    [
        ("ok : G( contact )\nbad : G( contact -> F<=0 action=stop )\n", 2),
        ("# c\n\nbad : G( action=fly )\n", 3),
        ("bad : ( contact )\n", 1),
        ("a : G( contact )\nb : G( contact & )\n", 2),
    ],
)
def test_property_syntax_errors_carry_line(text, line):
    with pytest.raises(PropertySyntaxError) as err:
        parse_properties(text)
    assert err.value.line == line


def test_report_json_shape(baseline_rules):
    mutant = baseline_rules.without("avoid")
    g = build_state_space(mutant, EnvAbstraction.from_ruleset(mutant))
    verdicts = [check(g, p) for p in parse_properties((DATA_DIR / "collision.prop").read_text())]
    doc = json.loads(report_json(verdicts, mutant.source_hash))
    assert doc["ruleset_hash"] == mutant.source_hash
    first = doc["verdicts"][0]
    assert list(first) == ["property", "formula", "holds", "states", "transitions", "counterexample"]
    assert first["holds"] is False and first["counterexample"]
    assert set(first["counterexample"][0]) == {"state", "percept", "action", "rule"}
    assert report_json(verdicts, mutant.source_hash) == report_json(verdicts, mutant.source_hash)
