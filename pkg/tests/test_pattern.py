"""Patterns, fragments, scheduling, composition and the JSON schema."""

import json

import pytest

from ppmbqc.boolfn import BoolFn
from ppmbqc.errors import StructuralError, WellFoundednessError
from ppmbqc.fragments import e_fragment, xhalf_fragment
from ppmbqc.pattern import (
    Correction,
    Measurement,
    MeasurementPattern,
    PatternFragment,
    PauliFrame,
    compose,
    dependency_schedule,
    fragment_from_json,
    fragment_to_dict,
    fragment_to_json,
)
from ppmbqc.pgraph import PGraph
from ppmbqc.verifier import verify_fragment


def test_all_constant_pattern_is_single_round():
    g = PGraph(3).add_edges(0, 1, 2).add_edges(1, 2, 2)
    p = MeasurementPattern(
        g, {v: Measurement(f"m{v}", BoolFn.zero()) for v in range(3)}
    )
    assert dependency_schedule(p) == [[0, 1, 2]]


def test_cyclic_two_vertex_pattern_rejected():
    g = PGraph(2).add_edges(0, 1, 1)
    p = MeasurementPattern(
        g,
        {
            0: Measurement("u", BoolFn.var("w")),
            1: Measurement("w", BoolFn.var("u")),
        },
    )
    with pytest.raises(WellFoundednessError) as err:
        dependency_schedule(p)
    assert set(err.value.cycle) == {0, 1}


def test_t_gadget_schedule_rounds():
    f = e_fragment("T")
    rounds = f.schedule()
    assert len(rounds) == 2
    names = [sorted(f.pattern.measurements[v].var for v in r) for r in rounds]
    assert names == [["a", "b", "c", "d"], ["e"]]


def test_output_variable_freshness_enforced():
    g = PGraph(2)
    with pytest.raises(StructuralError):
        MeasurementPattern(
            g, {0: Measurement("a", BoolFn.zero()), 1: Measurement("a", BoolFn.zero())}
        )


def test_choice_may_not_reference_unknown_or_self():
    g = PGraph(1)
    p = MeasurementPattern(g, {0: Measurement("a", BoolFn.var("nope"))})
    with pytest.raises(StructuralError):
        dependency_schedule(p)
    p2 = MeasurementPattern(g, {0: Measurement("a", BoolFn.var("a"))})
    with pytest.raises(StructuralError):
        dependency_schedule(p2)


def test_fragment_validation_rules():
    g = PGraph(2).add_edges(0, 1, 2)
    meas = {0: Measurement("a", BoolFn.zero())}
    ok = PatternFragment(
        MeasurementPattern(g, meas),
        (0,),
        (1,),
        {0: ("z", "x")},
        {1: Correction(BoolFn.zero(), BoolFn.zero())},
    )
    assert ok.error_variables() == ("z", "x")
    with pytest.raises(StructuralError):  # output carries a measurement
        PatternFragment(
            MeasurementPattern(g, {**meas, 1: Measurement("b", BoolFn.zero())}),
            (0,),
            (1,),
            {0: ("z", "x")},
            {1: Correction(BoolFn.zero(), BoolFn.zero())},
        )
    with pytest.raises(StructuralError):  # error variable collides with outcome
        PatternFragment(
            MeasurementPattern(g, meas),
            (0,),
            (1,),
            {0: ("a", "x")},
            {1: Correction(BoolFn.zero(), BoolFn.zero())},
        )


def test_compose_requires_valid_injective_wiring():
    f1, f2 = xhalf_fragment(), xhalf_fragment()
    with pytest.raises(StructuralError):
        compose(f1, f2, {0: f2.inputs[0]})  # 0 is not an output of f1


def test_compose_empty_wiring_is_disjoint_union():
    f1, f2 = xhalf_fragment(), xhalf_fragment()
    u = compose(f1, f2, {})
    assert u.pattern.graph.vertex_count == 4
    assert len(u.inputs) == 2 and len(u.outputs) == 2
    # First fragment untouched; second renamed to keep namespaces disjoint.
    assert u.corrections[f1.outputs[0]] == f1.corrections[f1.outputs[0]]
    renamed = u.corrections[u.outputs[1]]
    assert renamed.zeta == f2.corrections[f2.outputs[0]].zeta.rename(
        {"a": "g2.a", "z": "g2.z", "x": "g2.x"}
    )


def test_compose_substitutes_error_variables():
    f1, f2 = xhalf_fragment(), xhalf_fragment()
    comp = compose(f1, f2, {f1.outputs[0]: f2.inputs[0]})
    # The second stage's (z, x) are replaced by the first stage's
    # corrections; its zeta = z2 + a2 becomes (a ^ z) ^ a2.
    zeta = comp.corrections[comp.outputs[0]].zeta
    assert zeta == BoolFn.xor_of("a", "z", "g2.a")


def test_composition_associativity_against_same_unitary():
    f1, f2, f3 = (xhalf_fragment() for _ in range(3))
    a = compose(f1, f2, {f1.outputs[0]: f2.inputs[0]})
    left = compose(a, f3, {a.outputs[0]: f3.inputs[0]})
    b = compose(f2, f3, {f2.outputs[0]: f3.inputs[0]})
    right = compose(f1, b, {f1.outputs[0]: b.inputs[0]})
    # Both certify the same composite: three half X-turns.
    for frag in (left, right):
        rep = verify_fragment(frag, "X(pi/2)*X(pi/2)*X(pi/2)", keep_branches=False)
        assert rep.passed, rep.worst_infidelity


def test_json_roundtrip_bit_exact():
    for frag in (xhalf_fragment(), e_fragment("T")):
        text = fragment_to_json(frag)
        again = fragment_from_json(text)
        assert again == frag
        assert fragment_to_json(again) == text


def test_schema_version_present_and_checked():
    d = fragment_to_dict(xhalf_fragment())
    assert d["schema_version"] == 1
    bad = dict(d, schema_version=99)
    with pytest.raises(StructuralError):
        fragment_from_json(json.dumps(bad))


def test_pauli_frame_composition_is_xor():
    a = PauliFrame(((1, 0), (0, 1)))
    b = PauliFrame(((1, 1), (0, 1)))
    assert a.compose(b) == PauliFrame(((0, 1), (0, 0)))
    with pytest.raises(StructuralError):
        PauliFrame(((2, 0),))
