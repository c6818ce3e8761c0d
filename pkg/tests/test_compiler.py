"""Circuit parsing, brick compilation, layout, exports."""

import numpy as np
import pytest

from ppmbqc.compiler import (
    BrickLayer,
    Circuit,
    brickwork_grid,
    circuit_unitary,
    compile_circuit,
    compile_to_bricks,
    export,
    layers_unitary,
    layout_brickwork,
    parse_circuit,
)
from ppmbqc.errors import CircuitParseError, StructuralError
from ppmbqc.executor import feed_forward_depth
from ppmbqc.fragments import BrickSettings
from ppmbqc.pattern import fragment_from_json
from ppmbqc.unitaries import phase_matched
from ppmbqc.verifier import verify_fragment

RNG = np.random.default_rng(0xA11CE)


def test_parse_basic_circuit():
    c = parse_circuit("qubits 2\nH 0\nT 1\nCZ 0 1")
    assert c.qubit_count == 2
    assert c.gates == (("H", (0,)), ("T", (1,)), ("CZ", (0, 1)))


def test_parse_reports_line_numbers():
    with pytest.raises(CircuitParseError) as err:
        parse_circuit("FOO 0")
    assert err.value.line == 1
    with pytest.raises(CircuitParseError) as err:
        parse_circuit("qubits 2\nH 0\nFOO 1")
    assert err.value.line == 3


def test_parse_rejects_bad_operands():
    with pytest.raises(CircuitParseError):
        parse_circuit("qubits 2\nCZ 0 0")
    with pytest.raises(CircuitParseError):
        parse_circuit("qubits 2\nH 5")
    with pytest.raises(CircuitParseError):
        parse_circuit("qubits 2\nCZ 0")


def test_parse_comments_and_blank_lines():
    c = parse_circuit("# intro\nqubits 1\n\nH 0  # flip basis\n")
    assert c.gates == (("H", (0,)),)


def test_single_t_compiles_to_one_layer():
    layers = compile_to_bricks(parse_circuit("qubits 2\nT 0"))
    assert layers == [BrickLayer(0, BrickSettings("T", "PAD", 0))]


def test_t_on_right_lane_uses_conjugation():
    layers = compile_to_bricks(parse_circuit("qubits 2\nT 1"))
    assert [l.settings.right for l in layers] == ["H", "HTH", "H"]
    assert all(l.settings.left == "PAD" for l in layers)


def test_sdg_is_three_s_bricks():
    layers = compile_to_bricks(parse_circuit("qubits 2\nSdg 0"))
    assert [l.settings.left for l in layers] == ["S", "S", "S"]


def test_cnot_realizes_h_conjugated_cz():
    layers = compile_to_bricks(parse_circuit("qubits 2\nCNOT 0 1"))
    kinds = [(l.settings.left, l.settings.right, l.settings.cz) for l in layers]
    assert kinds == [
        ("PAD", "H", 0),
        ("PAD", "PAD", 1),
        ("PAD", "H", 0),
    ]
    U = layers_unitary(layers, 2)
    assert phase_matched(U, circuit_unitary(parse_circuit("qubits 2\nCNOT 0 1")))


def test_non_adjacent_entangler_rejected():
    with pytest.raises(StructuralError):
        compile_to_bricks(parse_circuit("qubits 3\nCZ 0 2"))


def test_label_product_oracle_matches_circuit_unitary():
    # The compiled layer list, multiplied out from the certified labels,
    # equals the circuit unitary: a matrix oracle independent of any
    # statevector simulation.
    gates = ["H", "S", "Sdg", "T", "Tdg"]
    for seed in range(10):
        rng = np.random.default_rng(seed)
        lines = ["qubits 2"]
        for _ in range(int(rng.integers(1, 7))):
            if rng.random() < 0.3:
                pair = ["CZ 0 1", "CNOT 0 1", "CNOT 1 0"][int(rng.integers(3))]
                lines.append(pair)
            else:
                lines.append(f"{gates[int(rng.integers(5))]} {int(rng.integers(2))}")
        c = parse_circuit("\n".join(lines))
        layers = compile_to_bricks(c)
        assert phase_matched(layers_unitary(layers, 2), circuit_unitary(c)), lines


def test_layout_single_layer_is_one_brick():
    frag = layout_brickwork([BrickLayer(0, BrickSettings("H", "PAD", 0))])
    assert frag.pattern.graph.vertex_count == 16
    assert len(frag.inputs) == 2 and len(frag.outputs) == 2


def test_two_stacked_layers_tile_without_collisions():
    layers = [
        BrickLayer(0, BrickSettings("H", "PAD", 0)),
        BrickLayer(0, BrickSettings("PAD", "H", 0)),
    ]
    frag = layout_brickwork(layers)
    assert frag.pattern.graph.vertex_count == 30  # 16 + 14 after merging
    grid = brickwork_grid(layers)
    assert len(grid) == 30
    assert len(set(grid.values())) == 30


def test_compiled_pipeline_certifies_composite():
    c = parse_circuit("qubits 2\nH 0\nT 0\nCZ 0 1")
    frag = compile_circuit(c)
    rep = verify_fragment(
        frag, circuit_unitary(c), branches=("sample", 4), keep_branches=False
    )
    assert rep.passed, rep.worst_infidelity


def test_one_qubit_circuit_borrows_a_lane():
    c = parse_circuit("qubits 1\nH 0\nT 0")
    frag = compile_circuit(c)
    target = np.kron(circuit_unitary(c), np.eye(2, dtype=complex))
    rep = verify_fragment(frag, target, branches=("sample", 4), keep_branches=False)
    assert rep.passed


def test_depth_bounded_by_t_count():
    for text, tmax in [
        ("qubits 2\nH 0\nS 1\nCZ 0 1", 0),
        ("qubits 2\nT 0\nH 0\nT 0", 2),
        ("qubits 2\nT 1\nCNOT 0 1", 1),
    ]:
        c = parse_circuit(text)
        frag = compile_circuit(c)
        assert feed_forward_depth(frag) <= 1 + c.t_count()


def test_export_json_roundtrips_bit_exact():
    frag = compile_circuit(parse_circuit("qubits 2\nT 0\nCZ 0 1"))
    blob = export(frag, "json")
    again = fragment_from_json(blob.decode())
    assert again == frag
    assert export(again, "json") == blob


def test_export_dot_marks_multiplicities():
    frag = compile_circuit(parse_circuit("qubits 2\nH 0"))
    dot = export(frag, "dot").decode()
    assert 'label="x2"' in dot
    assert 'label="x1"' in dot  # the eighth-turn hair
    assert dot.startswith("graph pattern {")
    with pytest.raises(StructuralError):
        export(frag, "pdf")


def test_compilation_is_deterministic():
    text = "qubits 2\nH 0\nT 1\nCNOT 0 1\nSdg 1"
    c1, c2 = parse_circuit(text), parse_circuit(text)
    l1, l2 = compile_to_bricks(c1), compile_to_bricks(c2)
    assert l1 == l2
    assert export(layout_brickwork(l1), "json") == export(layout_brickwork(l2), "json")
    assert export(layout_brickwork(l1), "dot") == export(layout_brickwork(l2), "dot")


def test_circuit_validation():
    with pytest.raises(StructuralError):
        Circuit(0, ())
    with pytest.raises(StructuralError):
        Circuit(2, (("CZ", (1, 1)),))
    assert Circuit(2, (("T", (0,)), ("Tdg", (1,)))).t_count() == 2


def test_exported_json_has_schema_version_one():
    import json

    frag = compile_circuit(parse_circuit("qubits 2\nS 0"))
    payload = json.loads(export(frag, "json").decode())
    assert payload["schema_version"] == 1
