"""Compile Clifford+T circuits to brickwork measurement patterns.

Circuit text is line oriented: a ``qubits N`` header, then one gate per
line (``H 0``, ``CZ 0 1``, ...), with ``#`` comments. Compilation is
greedy, one gate per brick: each gate is rewritten into the lane gate set
the brick table certifies, the idle lane receives PAD (identity up to the
Pauli frame), and bricks are chained by wiring lane outputs to lane
inputs. Entangling gates are only available between adjacent lanes;
circuits on more than two qubits compile but their grid layout is
experimental.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import CircuitParseError, StructuralError
from .fragments import (
    BRICK_INPUTS,
    BRICK_OUTPUTS,
    LEFT_LANE_GATES,
    RIGHT_LANE_GATES,
    BrickSettings,
    brick,
    brick_grid,
)
from .pattern import PatternFragment, compose_with_map, fragment_to_json
from .unitaries import CNOT, CZ, FIXED

GATES_1Q = ("H", "S", "Sdg", "T", "Tdg")
GATES_2Q = ("CZ", "CNOT")


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self):
        if self.qubit_count < 1:
            raise StructuralError("circuit needs at least one qubit")
        for label, args in self.gates:
            if label in GATES_1Q:
                if len(args) != 1:
                    raise StructuralError(f"{label} takes one operand")
            elif label in GATES_2Q:
                if len(args) != 2:
                    raise StructuralError(f"{label} takes two operands")
                if args[0] == args[1]:
                    raise StructuralError(f"{label} operands must differ")
            else:
                raise StructuralError(f"unknown gate {label!r}")
            for q in args:
                if not 0 <= q < self.qubit_count:
                    raise StructuralError(f"operand {q} out of range")

    def t_count(self) -> int:
        return sum(1 for label, _ in self.gates if label in ("T", "Tdg"))


def parse_circuit(text: str) -> Circuit:
    """Parse the line-oriented circuit format."""
    qubits: int | None = None
    gates: list[tuple[str, tuple[int, ...]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "qubits":
            if qubits is not None:
                raise CircuitParseError("duplicate qubits header", lineno)
            if len(parts) != 2 or not parts[1].isdigit():
                raise CircuitParseError("usage: qubits N", lineno)
            qubits = int(parts[1])
            continue
        if qubits is None:
            raise CircuitParseError("missing 'qubits N' header", lineno)
        label = parts[0]
        if label not in GATES_1Q + GATES_2Q:
            raise CircuitParseError(f"unknown gate {label!r}", lineno)
        try:
            args = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise CircuitParseError("operands must be integers", lineno) from None
        want = 1 if label in GATES_1Q else 2
        if len(args) != want:
            raise CircuitParseError(f"{label} takes {want} operand(s)", lineno)
        for q in args:
            if not 0 <= q < qubits:
                raise CircuitParseError(f"operand {q} out of range", lineno)
        if label in GATES_2Q and args[0] == args[1]:
            raise CircuitParseError(f"{label} operands must differ", lineno)
        gates.append((label, args))
    if qubits is None:
        raise CircuitParseError("missing 'qubits N' header", 1)
    return Circuit(qubits, tuple(gates))


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Matrix oracle for the circuit, qubit 0 as the most significant bit."""
    n = c.qubit_count
    dim = 1 << n
    U = np.eye(dim, dtype=complex)
    idx = np.arange(dim)
    for label, args in c.gates:
        if label in GATES_1Q:
            (q,) = args
            G = np.eye(1, dtype=complex)
            for w in range(n):
                G = np.kron(G, FIXED[label] if w == q else np.eye(2, dtype=complex))
            U = G @ U
        elif label == "CZ":
            b1 = (idx >> (n - 1 - args[0])) & 1
            b2 = (idx >> (n - 1 - args[1])) & 1
            U = np.diag(np.where(b1 & b2, -1.0, 1.0).astype(complex)) @ U
        else:  # CNOT
            ctrl, tgt = args
            bc = (idx >> (n - 1 - ctrl)) & 1
            flipped = idx ^ (bc << (n - 1 - tgt))
            P = np.zeros((dim, dim), dtype=complex)
            P[flipped, idx] = 1.0
            U = P @ U
    return U


@dataclass(frozen=True)
class BrickLayer:
    """One brick: the pair of lanes (pair, pair+1) and its settings."""

    pair: int
    settings: BrickSettings


_RIGHT_T_REWRITE = {"T": ("H", "HTH", "H"), "Tdg": ("H", "HTdgH", "H")}


def _lane_layers(label: str, side: int, pair: int) -> list[BrickLayer]:
    """Rewrite one single-qubit gate into bricks on its lane."""
    lane_set = LEFT_LANE_GATES if side == 0 else RIGHT_LANE_GATES
    if label == "Sdg":
        one = _lane_layers("S", side, pair)
        return one * 3
    if label in lane_set:
        chain = (label,)
    elif label in _RIGHT_T_REWRITE and side == 1:
        chain = _RIGHT_T_REWRITE[label]
    else:
        raise StructuralError(f"no rewrite for {label} on side {side}")
    out = []
    for gate in chain:
        left, right = (gate, "PAD") if side == 0 else ("PAD", gate)
        out.append(BrickLayer(pair, BrickSettings(left, right, 0)))
    return out


def compile_to_bricks(c: Circuit) -> list[BrickLayer]:
    """Greedy one-gate-per-brick compilation onto lane pairs.

    Single-qubit gates land on the operand's lane with PAD opposite;
    entangling gates require adjacent lanes and use the brick's switch.
    A one-qubit circuit borrows a padding lane.
    """
    layers: list[BrickLayer] = []
    for label, args in c.gates:
        if label in GATES_1Q:
            (q,) = args
            pair = q - 1 if (q == c.qubit_count - 1 and q > 0) else q
            layers.extend(_lane_layers(label, q - pair, pair))
            continue
        q1, q2 = args
        if abs(q1 - q2) != 1:
            raise StructuralError(
                f"{label} on non-adjacent lanes {q1},{q2} is not supported"
            )
        pair = min(q1, q2)
        if label == "CZ":
            layers.append(BrickLayer(pair, BrickSettings("PAD", "PAD", 1)))
        else:  # CNOT: conjugate the target side with H around a CZ
            tgt_side = args[1] - pair
            layers.extend(_lane_layers("H", tgt_side, pair))
            layers.append(BrickLayer(pair, BrickSettings("PAD", "PAD", 1)))
            layers.extend(_lane_layers("H", tgt_side, pair))
    if not layers:
        layers.append(BrickLayer(0, BrickSettings("PAD", "PAD", 0)))
    return layers


def layers_unitary(layers: list[BrickLayer], lanes: int) -> np.ndarray:
    """Matrix product of the layers' certified labels (table oracle)."""
    dim = 1 << lanes
    U = np.eye(dim, dtype=complex)
    for layer in layers:
        s = layer.settings
        left = FIXED["I"] if s.left == "PAD" else FIXED[s.left]
        right = FIXED["I"] if s.right == "PAD" else FIXED[s.right]
        block = np.kron(left, right)
        if s.cz:
            block = CZ @ block
        G = np.eye(1, dtype=complex)
        w = 0
        while w < lanes:
            if w == layer.pair:
                G = np.kron(G, block)
                w += 2
            else:
                G = np.kron(G, np.eye(2, dtype=complex))
                w += 1
        U = G @ U
    return U


def _layout(layers: list[BrickLayer]) -> tuple[PatternFragment, dict[int, tuple[int, int]]]:
    if not layers:
        raise StructuralError("cannot lay out an empty layer list")
    lanes = max(l.pair for l in layers) + 2
    frag: PatternFragment | None = None
    ends: dict[int, int] = {}
    starts: dict[int, int] = {}
    grid: dict[int, tuple[int, int]] = {}
    for depth, layer in enumerate(layers):
        piece = brick(layer.settings)
        coords = brick_grid(depth)
        l1, l2 = layer.pair, layer.pair + 1
        if frag is None:
            frag = piece
            relabel = {v: v for v in range(16)}
        else:
            wiring = {}
            if l1 in ends:
                wiring[ends[l1]] = BRICK_INPUTS[0]
            if l2 in ends:
                wiring[ends[l2]] = BRICK_INPUTS[1]
            frag, relabel = compose_with_map(frag, piece, wiring)
        # New vertices take this layer's sites; vertices merged onto the
        # existing pattern keep the site they already had.
        for v in range(16):
            grid.setdefault(relabel[v], (coords[v][0] + 8 * layer.pair, coords[v][1]))
        starts.setdefault(l1, relabel[BRICK_INPUTS[0]])
        starts.setdefault(l2, relabel[BRICK_INPUTS[1]])
        ends[l1] = relabel[BRICK_OUTPUTS[0]]
        ends[l2] = relabel[BRICK_OUTPUTS[1]]
    inputs = tuple(starts[w] for w in sorted(starts))
    outputs = tuple(ends[w] for w in sorted(ends))
    return frag.with_io_order(inputs, outputs), grid


def layout_brickwork(layers: list[BrickLayer]) -> PatternFragment:
    """Chain bricks by wiring lane outputs to lane inputs.

    Wire order of the result follows lane index. Corrections and adaptive
    rules thread through composition automatically.
    """
    return _layout(layers)[0]


def brickwork_grid(layers: list[BrickLayer]) -> dict[int, tuple[int, int]]:
    """Grid site per vertex of the laid-out pattern (distinct by design)."""
    return _layout(layers)[1]


def compile_circuit(c: Circuit) -> PatternFragment:
    return layout_brickwork(compile_to_bricks(c))


# -- export -------------------------------------------------------------


def export(p: PatternFragment, format: str) -> bytes:
    """Serialize a fragment: ``json`` round-trips, ``dot`` is for eyes."""
    if format == "json":
        return (fragment_to_json(p) + "\n").encode()
    if format == "dot":
        return _to_dot(p).encode()
    raise StructuralError(f"unknown export format {format!r}")


def _to_dot(p: PatternFragment) -> str:
    lines = ["graph pattern {", "  node [shape=circle];"]
    ins, outs = set(p.inputs), set(p.outputs)
    for v in range(p.pattern.graph.vertex_count):
        attrs = []
        label = str(v)
        if v in p.pattern.measurements:
            m = p.pattern.measurements[v]
            basis = (
                ("Z" if m.choice.constant_value() else "X")
                if m.choice.is_constant()
                else "?"
            )
            label = f"{v}:{m.var}={basis}"
        if v in ins and v in outs:
            attrs.append("shape=doublecircle")
            label += " io"
        elif v in ins:
            attrs.append("shape=square")
            label += " in"
        elif v in outs:
            attrs.append("shape=doublecircle")
            label += " out"
        attrs.insert(0, f'label="{label}"')
        lines.append(f"  v{v} [{', '.join(attrs)}];")
    for u, v, k in p.pattern.graph.edges:
        lines.append(f'  v{u} -- v{v} [label="x{k}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_brick_table() -> dict:
    """The shipped certified settings table."""
    text = resources.files("ppmbqc.data").joinpath("brick_table.json").read_text()
    return json.loads(text)
