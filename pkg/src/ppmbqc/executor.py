"""Adaptive execution of patterns and fragments.

Two engines share the same measurement-order and basis-choice semantics:

* a single-trace engine that allocates qubits lazily and frees them as soon
  as they are measured, so long chains simulate in a narrow window;
* a vectorized engine that enumerates every outcome branch at once, used by
  the certification tooling.

Choice semantics everywhere: choice value 0 measures X, value 1 measures Z.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    ImpossibleBranchError,
    PpmError,
    StateSizeError,
    WellFoundednessError,
)
from .pattern import (
    BASIS_BY_CHOICE,
    MeasurementPattern,
    PatternFragment,
    _bare_fragment,
    dependency_schedule,
)
from .statevec import (
    DEFAULT_QUBIT_CAP,
    IMPOSSIBLE_PROB,
    Statevector,
    X,
    Z,
    apply_edges,
    apply_matrix,
    apply_parity_phase,
    embed_state,
    measure,
    permute,
    plus_state,
    tensor,
)


@dataclass(frozen=True)
class OutcomeSource:
    """Where measurement outcomes come from.

    ``seeded`` draws outcomes from the true branch distribution with a
    reproducible generator; ``tape`` forces a fixed outcome list (consumed
    in execution order); ``exhaustive`` marks branch enumeration and is
    only valid with the enumeration entry points.
    """

    mode: str = "seeded"
    seed: int = 0xC0FFEE
    tape: tuple[int, ...] = ()

    def __post_init__(self):
        if self.mode not in ("seeded", "tape", "exhaustive"):
            raise ValueError(f"unknown outcome mode {self.mode!r}")

    @staticmethod
    def seeded(seed: int = 0xC0FFEE) -> OutcomeSource:
        return OutcomeSource("seeded", seed=seed)

    @staticmethod
    def fixed(tape: tuple[int, ...] | list[int]) -> OutcomeSource:
        return OutcomeSource("tape", tape=tuple(int(b) & 1 for b in tape))

    @staticmethod
    def exhaustive() -> OutcomeSource:
        return OutcomeSource("exhaustive")


@dataclass(frozen=True)
class ExecutionTrace:
    """Record of one adaptive run."""

    outcomes: dict[str, int]
    bases: dict[int, str]
    probability: float
    state: Statevector | None
    frame: dict[int, tuple[int, int]]
    error_bits: dict[str, int] = field(default_factory=dict)

    def to_dict(self, include_amplitudes: bool = False) -> dict:
        out = {
            "outcomes": dict(sorted(self.outcomes.items())),
            "bases": {str(v): b for v, b in sorted(self.bases.items())},
            "probability": self.probability,
            "frame": {str(v): list(zx) for v, zx in sorted(self.frame.items())},
            "error_bits": dict(sorted(self.error_bits.items())),
        }
        if include_amplitudes and self.state is not None:
            out["amplitudes"] = self.state.to_amplitude_pairs()
        return out

    def to_json(self, include_amplitudes: bool = False) -> str:
        return json.dumps(self.to_dict(include_amplitudes), indent=2, sort_keys=True)


def measurement_order(f: PatternFragment) -> list[int]:
    """Deterministic execution order: lowest ready vertex first.

    A vertex is ready once every outcome its choice function reads has been
    produced. Well-foundedness guarantees progress.
    """
    ambient = set(f.error_variables())
    producers = f.pattern.producer_of()
    pending = set(f.pattern.measurements)
    deps = {
        v: {
            producers[name]
            for name in m.choice.variables
            if name not in ambient and producers[name] != v
        }
        for v, m in f.pattern.measurements.items()
    }
    done: set[int] = set()
    order: list[int] = []
    while pending:
        ready = [v for v in sorted(pending) if deps[v] <= done]
        if not ready:
            dependency_schedule(f.pattern, ambient)  # raises with the cycle
            raise WellFoundednessError("no ready vertex")  # pragma: no cover
        v = ready[0]
        order.append(v)
        done.add(v)
        pending.remove(v)
    return order


def feed_forward_depth(p: MeasurementPattern | PatternFragment) -> int:
    """Number of sequential measurement rounds."""
    if isinstance(p, PatternFragment):
        return len(p.schedule())
    return len(dependency_schedule(p))


# -- single-trace engine -------------------------------------------------


class _Register:
    """Streaming register: lazy |+> allocation, immediate free on measure."""

    def __init__(self, state: Statevector, positions: dict[int, int], cap: int):
        self.state = state
        self.pos = positions  # vertex -> register position
        self.cap = cap

    def alloc(self, v: int) -> None:
        if v in self.pos:
            return
        if self.state.qubit_count + 1 > self.cap:
            raise StateSizeError(f"register would exceed cap {self.cap}")
        self.state = tensor(self.state, plus_state(1))
        self.pos[v] = self.state.qubit_count - 1

    def drop(self, v: int) -> int:
        gone = self.pos.pop(v)
        for w in self.pos:
            if self.pos[w] > gone:
                self.pos[w] -= 1
        return gone


def _sample_outcome(state, position, basis, rng):
    p0, post0 = measure(state, position, basis, 0)
    if rng.random() < p0:
        if post0 is not None:
            return 0, p0, post0
    p1, post1 = measure(state, position, basis, 1)
    if post1 is None:  # outcome 1 impossible; branch 0 is certain
        return 0, p0, post0
    return 1, 1.0 - p0, post1


def _run_streaming(
    f: PatternFragment,
    src: OutcomeSource,
    input_state: Statevector | None,
    input_errors: dict[int, tuple[int, int]] | None,
    spectators: int = 0,
    cap: int = DEFAULT_QUBIT_CAP,
) -> ExecutionTrace:
    graph = f.pattern.graph
    order = measurement_order(f)
    if src.mode == "exhaustive":
        raise ValueError("use enumerate_fragment for exhaustive enumeration")
    if src.mode == "tape" and len(src.tape) < len(order):
        raise PpmError(
            f"tape of {len(src.tape)} bits is shorter than {len(order)} measurements"
        )

    n_in = len(f.inputs)
    if input_state is None:
        if n_in or spectators:
            raise DimensionError("fragment with inputs needs an input state")
        reg = _Register(plus_state(0), {}, cap)
        spectator_pos: list[int] = []
    else:
        if input_state.qubit_count != n_in + spectators:
            raise DimensionError(
                f"input state must have {n_in + spectators} qubits, got"
                f" {input_state.qubit_count}"
            )
        reg = _Register(input_state, {v: i for i, v in enumerate(f.inputs)}, cap)
        spectator_pos = list(range(n_in, n_in + spectators))

    env: dict[str, int] = {}
    errs = input_errors or {}
    for v in f.inputs:
        zvar, xvar = f.input_errors[v]
        zb, xb = errs.get(v, (0, 0))
        env[zvar] = zb & 1
        env[xvar] = xb & 1
    error_env = dict(env)

    for v in f.inputs:  # X^x Z^z on each input wire, Z first
        zb, xb = errs.get(v, (0, 0))
        if zb:
            reg.state = apply_matrix(reg.state, reg.pos[v], Z)
        if xb:
            reg.state = apply_matrix(reg.state, reg.pos[v], X)

    applied: set[tuple[int, int]] = set()

    def apply_incident(v: int) -> None:
        for u, w, k in graph.edges:
            if v not in (u, w) or (u, w) in applied:
                continue
            reg.alloc(u)
            reg.alloc(w)
            reg.state = apply_parity_phase(
                reg.state, reg.pos[u], reg.pos[w], k * graph.edge_angle
            )
            applied.add((u, w))

    rng = np.random.default_rng(src.seed) if src.mode == "seeded" else None
    probability = 1.0
    bases: dict[int, str] = {}
    for step, v in enumerate(order):
        reg.alloc(v)
        apply_incident(v)
        choice = f.pattern.measurements[v].choice.evaluate(env)
        basis = BASIS_BY_CHOICE[choice]
        bases[v] = basis
        if src.mode == "tape":
            outcome = src.tape[step]
            prob, post = measure(reg.state, reg.pos[v], basis, outcome)
            if post is None:
                raise ImpossibleBranchError(
                    f"tape forces outcome {outcome} on vertex {v} (p={prob:.3e})"
                )
        else:
            outcome, prob, post = _sample_outcome(reg.state, reg.pos[v], basis, rng)
        probability *= prob
        reg.state = post
        gone = reg.drop(v)
        spectator_pos = [p - 1 if p > gone else p for p in spectator_pos]
        env[f.pattern.measurements[v].var] = outcome

    # Materialize outputs nothing touched yet, then apply edges that join
    # only unmeasured vertices.
    for v in f.outputs:
        reg.alloc(v)
    for u, w, k in graph.edges:
        if (u, w) not in applied:
            reg.alloc(u)
            reg.alloc(w)
            reg.state = apply_parity_phase(
                reg.state, reg.pos[u], reg.pos[w], k * graph.edge_angle
            )
            applied.add((u, w))

    final = permute(reg.state, [reg.pos[o] for o in f.outputs] + spectator_pos)
    frame = {
        o: (f.corrections[o].zeta.evaluate(env), f.corrections[o].xi.evaluate(env))
        for o in f.outputs
    }
    outcomes = {m.var: env[m.var] for m in f.pattern.measurements.values()}
    return ExecutionTrace(outcomes, bases, probability, final, frame, error_env)


def run_pattern(p: MeasurementPattern, src: OutcomeSource) -> ExecutionTrace:
    """Execute a pattern: resource prepared, vertices measured adaptively."""
    dependency_schedule(p)  # well-foundedness gate
    return _run_streaming(_bare_fragment(p), src, None, None)


def run_fragment(
    f: PatternFragment,
    input_state: Statevector,
    input_errors: dict[int, tuple[int, int]] | None = None,
    src: OutcomeSource = OutcomeSource(),
) -> ExecutionTrace:
    """Execute a fragment on an input state with declared Pauli errors."""
    if input_state.qubit_count != len(f.inputs):
        raise DimensionError(
            f"input state must have {len(f.inputs)} qubits, got {input_state.qubit_count}"
        )
    f.schedule()
    return _run_streaming(f, src, input_state, input_errors)


def run_fragment_with_spectators(
    f: PatternFragment,
    joint_state: Statevector,
    spectators: int,
    input_errors: dict[int, tuple[int, int]] | None = None,
    src: OutcomeSource = OutcomeSource(),
    cap: int = DEFAULT_QUBIT_CAP,
) -> ExecutionTrace:
    """Like :func:`run_fragment`, with trailing reference qubits riding along."""
    f.schedule()
    return _run_streaming(f, src, joint_state, input_errors, spectators, cap)


# -- vectorized branch enumeration ----------------------------------------


@dataclass
class BranchEnsemble:
    """All outcome branches of one fragment execution, one row per branch.

    ``states`` holds unnormalized leaf vectors; the squared row norm is the
    branch probability. Branch index bits follow ``order`` with the first
    measurement as the most significant bit.
    """

    order: list[int]
    states: np.ndarray  # (2**k, 2**(outputs+spectators))
    env: dict[str, np.ndarray]
    choice_bits: dict[int, np.ndarray]
    error_bits: dict[str, int]

    @property
    def probabilities(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.states.conj(), self.states).real

    def full_env_rows(self) -> dict[str, np.ndarray]:
        rows = self.states.shape[0]
        full = {k: np.asarray(v, dtype=np.uint8) for k, v in self.env.items()}
        for k, b in self.error_bits.items():
            full[k] = np.full(rows, b, dtype=np.uint8)
        return full

    def traces(self, f: PatternFragment) -> list[ExecutionTrace]:
        probs = self.probabilities
        rows = self.states.shape[0]
        out_qubits = int(math.log2(self.states.shape[1])) if self.states.shape[1] > 1 else 0
        out = []
        for r in range(rows):
            p = float(probs[r])
            state = None
            if p >= IMPOSSIBLE_PROB:
                state = Statevector(out_qubits, self.states[r] / math.sqrt(p))
            env_r = {k: int(bits[r]) for k, bits in self.env.items()}
            env_r.update(self.error_bits)
            frame = {
                o: (
                    f.corrections[o].zeta.evaluate(env_r),
                    f.corrections[o].xi.evaluate(env_r),
                )
                for o in f.outputs
            }
            out.append(
                ExecutionTrace(
                    outcomes={
                        m.var: env_r[m.var] for m in f.pattern.measurements.values()
                    },
                    bases={
                        v: BASIS_BY_CHOICE[int(self.choice_bits[v][r])]
                        for v in self.order
                    },
                    probability=p if p >= IMPOSSIBLE_PROB else 0.0,
                    state=state,
                    frame=frame,
                    error_bits=dict(self.error_bits),
                )
            )
        return out


def enumerate_fragment(
    f: PatternFragment,
    input_state: Statevector | None = None,
    input_errors: dict[int, tuple[int, int]] | None = None,
    spectators: int = 0,
    cap: int = DEFAULT_QUBIT_CAP,
) -> BranchEnsemble:
    """Enumerate every outcome branch with shared-prefix vectorization."""
    graph = f.pattern.graph
    n = graph.vertex_count
    total = n + spectators
    if total > cap:
        raise StateSizeError(f"{total} qubits exceeds cap {cap}")
    order = measurement_order(f)
    n_in = len(f.inputs)

    if input_state is None:
        if n_in or spectators:
            raise DimensionError("fragment with inputs needs an input state")
        base = plus_state(total)
    else:
        if input_state.qubit_count != n_in + spectators:
            raise DimensionError("input state size mismatch")
        targets = list(f.inputs) + list(range(n, total))
        base = embed_state(input_state, total, targets, cap=cap)

    errs = input_errors or {}
    error_bits: dict[str, int] = {}
    for v in f.inputs:
        zvar, xvar = f.input_errors[v]
        zb, xb = errs.get(v, (0, 0))
        error_bits[zvar] = zb & 1
        error_bits[xvar] = xb & 1
        if zb:
            base = apply_matrix(base, v, Z)
        if xb:
            base = apply_matrix(base, v, X)

    base = apply_edges(base, graph)

    pos = {v: v for v in range(n)}
    live = total
    states = base.amplitudes.reshape(1, -1)
    env: dict[str, np.ndarray] = {}
    choice_bits: dict[int, np.ndarray] = {}

    for v in order:
        meas = f.pattern.measurements[v]
        rows = states.shape[0]
        full_env = {k: bits for k, bits in env.items()}
        for k, b in error_bits.items():
            full_env[k] = np.full(rows, b, dtype=np.uint8)
        choices = meas.choice.evaluate_rows(full_env)
        axis = pos[v]
        t = np.moveaxis(states.reshape((rows,) + (2,) * live), 1 + axis, 1)
        t = t.reshape(rows, 2, -1).copy()
        x_rows = np.nonzero(choices == 0)[0]
        if x_rows.size:
            sub = t[x_rows]
            t[x_rows, 0] = (sub[:, 0] + sub[:, 1]) * math.sqrt(0.5)
            t[x_rows, 1] = (sub[:, 0] - sub[:, 1]) * math.sqrt(0.5)
        # Children interleave: row r splits into rows 2r (outcome 0), 2r+1.
        states = t.reshape(rows * 2, -1)
        for k in env:
            env[k] = np.repeat(env[k], 2)
        env[meas.var] = np.tile(np.array([0, 1], dtype=np.uint8), rows)
        for k in choice_bits:
            choice_bits[k] = np.repeat(choice_bits[k], 2)
        choice_bits[v] = np.repeat(choices, 2)
        live -= 1
        gone = pos.pop(v)
        for w in pos:
            if pos[w] > gone:
                pos[w] -= 1

    # Reorder remaining axes: declared outputs first, then spectators.
    rows = states.shape[0]
    out_positions = [pos[o] for o in f.outputs]
    rest = [p for p in range(live) if p not in out_positions]
    axes = [0] + [1 + p for p in out_positions + rest]
    states = np.transpose(states.reshape((rows,) + (2,) * live), axes).reshape(rows, -1)
    return BranchEnsemble(order, states, env, choice_bits, error_bits)


def enumerate_pattern(p: MeasurementPattern, cap: int = DEFAULT_QUBIT_CAP) -> BranchEnsemble:
    dependency_schedule(p)
    return enumerate_fragment(_bare_fragment(p), cap=cap)
