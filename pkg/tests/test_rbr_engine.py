from __future__ import annotations

from dataclasses import replace

from hypothesis import given
from hypothesis import strategies as st

from pondguard.rbr_engine import (
    BeliefState,
    ControlParams,
    Controller,
    Percept,
    ThrustCommand,
    act,
    deliberate,
    update_beliefs,
)
from pondguard.rule_dsl import HOLD_COURSE, REVERSE, STOP, TURN_AWAY, Action, ActionKind, parse

AVOID = parse("rule r1: when distance < 1.5 and not contact do turn_away\n"
              "rule fallback: when always do hold_course")


def test_update_beliefs_latches():
    b = update_beliefs(BeliefState(), Percept(voted_trip=True))
    assert (b.trip_latched, b.ticks_since_trip) == (True, 1)


def test_update_beliefs_clears_beyond_threshold():
    b = update_beliefs(BeliefState(trip_latched=True, ticks_since_trip=4), Percept(distance=5.0), 3.0)
    assert (b.trip_latched, b.ticks_since_trip) == (False, 0)


def test_update_beliefs_holds_inside_threshold():
    b = update_beliefs(BeliefState(trip_latched=True, ticks_since_trip=4), Percept(distance=1.0), 3.0)
    assert (b.trip_latched, b.ticks_since_trip) == (True, 5)


def test_trip_wins_over_clear():
    b = update_beliefs(BeliefState(trip_latched=True, ticks_since_trip=2), Percept(distance=9.0, voted_trip=True))
    assert b.trip_latched and b.ticks_since_trip == 3


@given(st.lists(st.tuples(st.booleans(), st.floats(0, 10)), max_size=40))
def test_belief_invariant(seq):
    b = BeliefState()
    for voted, d in seq:
        b = update_beliefs(b, Percept(distance=d, voted_trip=voted))
        assert (b.ticks_since_trip == 0) == (not b.trip_latched)


def test_deliberate_first_match(baseline_rules):
    step = deliberate(BeliefState(), Percept(contact=True, voted_trip=True, distance=0.1), baseline_rules)
    assert step.action == STOP and step.fired_rule == "stop_on_contact"
    assert step.beliefs_after.last_action == STOP


def test_deliberate_direct_evaluation():
    step = deliberate(BeliefState(), Percept(distance=1.0), AVOID)
    assert step.action == TURN_AWAY and step.fired_rule == "r1"


def test_deliberate_catch_all(baseline_rules):
    step = deliberate(BeliefState(), Percept(), baseline_rules)
    assert step.action == HOLD_COURSE and step.fired_rule == "cruise"


def test_deliberate_uses_beliefs(baseline_rules):
    step = deliberate(BeliefState(trip_latched=True, ticks_since_trip=1), Percept(distance=2.0), baseline_rules)
    assert step.fired_rule == "avoid"


def test_deliberate_deterministic(baseline_rules):
    b, p = BeliefState(trip_latched=True, ticks_since_trip=3), Percept(distance=0.5, voted_trip=True)
    assert deliberate(b, p, baseline_rules) == deliberate(b, p, baseline_rules)


def test_act_mapping():
    params = ControlParams(cruise_thrust=0.4, reverse_thrust=0.5, turn_thrust=0.5)
    assert act(STOP, params) == ThrustCommand(0.0, 0.0)
    assert act(REVERSE, params) == ThrustCommand(-0.5, -0.5)
    assert act(HOLD_COURSE, params) == ThrustCommand(0.4, 0.4)
    assert act(Action(ActionKind.SET_THRUST, 2.0, -3.0), params) == ThrustCommand(1.0, -1.0)


def test_turn_away_direction():
    params = ControlParams(turn_thrust=0.5)
    # obstacle to port (positive bearing): yaw negative, i.e. starboard
    assert act(TURN_AWAY, params, obstacle_bearing=0.3) == ThrustCommand(0.5, -0.5)
    assert act(TURN_AWAY, params, obstacle_bearing=-0.3) == ThrustCommand(-0.5, 0.5)
    # dead ahead: port by default
    assert act(TURN_AWAY, params, obstacle_bearing=0.0) == ThrustCommand(-0.5, 0.5)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3.2, 3.2))
def test_stop_is_exact_zero_and_thrust_bounded(l, r, bearing):
    assert act(STOP, ControlParams(), bearing) == ThrustCommand(0.0, 0.0)
    cmd = act(Action(ActionKind.SET_THRUST, l, r), ControlParams(), bearing)
    assert -1 <= cmd.left <= 1 and -1 <= cmd.right <= 1


def test_controller_threads_beliefs(baseline_rules):
    ctl = Controller(baseline_rules)
    assert ctl.decide(Percept(distance=1.2, voted_trip=True)).fired_rule == "avoid"
    assert ctl.decide(Percept(distance=2.0)).fired_rule == "avoid"  # still latched
    assert ctl.decide(Percept(distance=4.0)).fired_rule == "cruise"
    assert ctl.beliefs == replace(BeliefState(), last_action=HOLD_COURSE)
