"""Adaptive execution: sources, traces, branch enumeration, depth."""

import math

import numpy as np
import pytest

from ppmbqc.boolfn import BoolFn
from ppmbqc.errors import ImpossibleBranchError, WellFoundednessError
from ppmbqc.executor import (
    OutcomeSource,
    enumerate_fragment,
    enumerate_pattern,
    feed_forward_depth,
    measurement_order,
    run_fragment,
    run_pattern,
)
from ppmbqc.fragments import e_fragment, xhalf_fragment
from ppmbqc.pattern import Measurement, MeasurementPattern, compose
from ppmbqc.pgraph import PGraph
from ppmbqc.statevec import (
    Statevector,
    fidelity_up_to_phase,
    from_amplitudes,
    plus_state,
    zero_state,
    zrot,
)
from ppmbqc.unitaries import pauli_product, unitary_from_label

RNG = np.random.default_rng(0xFACE)


def random_state(n):
    return from_amplitudes(RNG.normal(size=1 << n) + 1j * RNG.normal(size=1 << n))


def test_single_vertex_constant_x_measurement():
    p = MeasurementPattern(PGraph(1), {0: Measurement("a", BoolFn.zero())})
    trace = run_pattern(p, OutcomeSource.seeded(1))
    assert trace.outcomes == {"a": 0}
    assert trace.probability == pytest.approx(1.0)
    assert trace.bases == {0: "X"}
    with pytest.raises(ImpossibleBranchError):
        run_pattern(p, OutcomeSource.fixed([1]))


def test_single_edge_hair_z_measured_injects_phase():
    # Two vertices, single edge, hair Z-measured: survivor is Z(+-pi/4)|+>.
    g = PGraph(2, base_exponent=2).add_edges(0, 1, 1)
    p = MeasurementPattern(g, {1: Measurement("a", BoolFn.one())})
    for outcome in (0, 1):
        trace = run_pattern(p, OutcomeSource.fixed([outcome]))
        sign = -1.0 if outcome else 1.0
        expected = Statevector(1, zrot(sign * math.pi / 4) @ plus_state(1).amplitudes)
        assert trace.probability == pytest.approx(0.5)
        assert fidelity_up_to_phase(trace.state, expected) == pytest.approx(1.0)


def test_exhaustive_probabilities_sum_to_one():
    g = PGraph(4, base_exponent=2).add_edges(0, 1, 1).add_edges(1, 2, 2).add_edges(2, 3, 1)
    p = MeasurementPattern(
        g,
        {
            0: Measurement("a", BoolFn.zero()),
            1: Measurement("b", BoolFn.one()),
            2: Measurement("c", BoolFn.var("a")),
        },
    )
    ens = enumerate_pattern(p)
    assert ens.probabilities.sum() == pytest.approx(1.0, abs=1e-9)


def test_xhalf_run_example():
    f = xhalf_fragment()
    trace = run_fragment(f, zero_state(1), {0: (0, 0)}, OutcomeSource.fixed([0]))
    assert trace.frame[f.outputs[0]] == (0, 1)
    expected = pauli_product([(0, 1)]) @ unitary_from_label("X(pi/2)") @ zero_state(1).amplitudes
    assert fidelity_up_to_phase(trace.state, Statevector(1, expected)) == pytest.approx(1.0)


def test_xhalf_forced_outcome_one_frame():
    f = xhalf_fragment()
    trace = run_fragment(f, zero_state(1), {0: (0, 0)}, OutcomeSource.fixed([1]))
    assert trace.frame[f.outputs[0]] == (1, 0)


def test_frame_contract_on_every_branch_random_input():
    f = e_fragment("T")
    psi = random_state(1)
    target = unitary_from_label("T") @ psi.amplitudes
    for zb, xb in ((0, 0), (0, 1), (1, 0), (1, 1)):
        ens = enumerate_fragment(f, psi, {0: (zb, xb)})
        traces = ens.traces(f)
        for tr in traces:
            if tr.probability == 0.0:
                continue
            z, x = tr.frame[f.outputs[0]]
            expected = pauli_product([(z, x)]) @ target
            fid = fidelity_up_to_phase(tr.state, Statevector(1, expected))
            assert fid == pytest.approx(1.0, abs=1e-9)


def test_e_t_all_zero_branch_pinned():
    # The all-zero branch of the T gadget leaves the frame (1, 1): the
    # correction cascade fires and a Pauli X and Z remain pending.
    f = e_fragment("T")
    psi = random_state(1)
    trace = run_fragment(f, psi, src=OutcomeSource.fixed([0] * 5))
    assert trace.frame[f.outputs[0]] == (1, 1)
    expected = pauli_product([(1, 1)]) @ unitary_from_label("T") @ psi.amplitudes
    assert fidelity_up_to_phase(trace.state, Statevector(1, expected)) == pytest.approx(1.0)


def test_seeded_runs_are_bit_reproducible():
    f = e_fragment("T")
    psi = random_state(1)
    t1 = run_fragment(f, psi, {0: (1, 0)}, OutcomeSource.seeded(42))
    t2 = run_fragment(f, psi, {0: (1, 0)}, OutcomeSource.seeded(42))
    assert t1.to_json(include_amplitudes=True) == t2.to_json(include_amplitudes=True)
    t3 = run_fragment(f, psi, {0: (1, 0)}, OutcomeSource.seeded(43))
    assert t3.outcomes != t1.outcomes or np.allclose(
        t3.state.amplitudes, t1.state.amplitudes
    )


def test_tape_and_exhaustive_agree_per_branch():
    f = e_fragment("S")
    psi = random_state(1)
    ens = enumerate_fragment(f, psi, {0: (0, 1)})
    order = ens.order
    k = len(order)
    traces = ens.traces(f)
    for row in range(1 << k):
        bits = [(row >> (k - 1 - j)) & 1 for j in range(k)]
        tr = run_fragment(f, psi, {0: (0, 1)}, OutcomeSource.fixed(bits))
        assert tr.probability == pytest.approx(traces[row].probability, abs=1e-12)
        assert fidelity_up_to_phase(tr.state, traces[row].state) == pytest.approx(1.0)
        assert tr.outcomes == traces[row].outcomes


def test_determinism_after_frame_correction():
    # Inverse-frame-corrected branch outputs agree pairwise on every
    # library fragment (Choi input exercises the full channel).
    from ppmbqc.verifier import choi_input

    for name in ("xhalf", "e_t", "e_h", "cz_on", "hier_m3"):
        from ppmbqc.fragments import builtin_fragment

        f, _ = builtin_fragment(name)
        n = len(f.inputs)
        ens = enumerate_fragment(f, choi_input(n), spectators=n)
        traces = [t for t in ens.traces(f) if t.probability > 0]
        corrected = []
        for tr in traces:
            amps = tr.state.amplitudes
            frame = [tr.frame[o] for o in f.outputs]
            inv = pauli_product(frame).conj().T
            full = np.kron(inv, np.eye(1 << n))
            corrected.append(full @ amps)
        base = corrected[0]
        for vec in corrected[1:]:
            fid = abs(np.vdot(base, vec)) ** 2
            assert fid == pytest.approx(1.0, abs=1e-9)


def test_feed_forward_depth_examples():
    g = PGraph(3).add_edges(0, 1, 2)
    constant = MeasurementPattern(
        g, {v: Measurement(f"m{v}", BoolFn.zero()) for v in range(2)}
    )
    assert feed_forward_depth(constant) == 1

    f = e_fragment("T")
    chain = f
    for k in (2, 3):
        nxt = e_fragment("T")
        chain = compose(chain, nxt, {chain.outputs[0]: nxt.inputs[0]})
        assert feed_forward_depth(chain) <= k + 1

    cyc = MeasurementPattern(
        PGraph(2).add_edges(0, 1, 1),
        {0: Measurement("u", BoolFn.var("w")), 1: Measurement("w", BoolFn.var("u"))},
    )
    with pytest.raises(WellFoundednessError):
        feed_forward_depth(cyc)


def test_measurement_order_respects_dependencies():
    f = e_fragment("T")
    order = measurement_order(f)
    names = [f.pattern.measurements[v].var for v in order]
    assert names.index("e") == len(names) - 1  # adaptive hair must wait
    assert names[:-1] == sorted(names[:-1], key=lambda s: order[names.index(s)])


def test_trace_json_roundtrip_fields():
    f = xhalf_fragment()
    tr = run_fragment(f, zero_state(1), {0: (1, 1)}, OutcomeSource.fixed([0]))
    d = tr.to_dict(include_amplitudes=True)
    assert set(d) == {"outcomes", "bases", "probability", "frame", "error_bits", "amplitudes"}
    assert d["error_bits"] == {"x": 1, "z": 1}


def test_trace_internal_consistency():
    # Recorded bases must equal the choice functions evaluated on the
    # recorded outcomes and error bits, and the branch probability must
    # match the product of its measurement branch weights.
    f = e_fragment("T")
    psi = random_state(1)
    for errs in ((0, 0), (1, 1)):
        ens = enumerate_fragment(f, psi, {0: errs})
        for tr in ens.traces(f):
            if tr.probability == 0.0:
                continue
            env = dict(tr.outcomes)
            env.update(tr.error_bits)
            for v, basis in tr.bases.items():
                choice = f.pattern.measurements[v].choice.evaluate(env)
                assert basis == ("Z" if choice else "X")
            replay = run_fragment(
                f,
                psi,
                {0: errs},
                OutcomeSource.fixed(
                    [tr.outcomes[f.pattern.measurements[v].var] for v in ens.order]
                ),
            )
            assert replay.probability == pytest.approx(tr.probability, abs=1e-12)
