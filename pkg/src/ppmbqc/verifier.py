"""Brute-force certification of pattern fragments.

The primary check entangles every input wire with a reference qubit, runs
the fragment once per outcome branch and input-error combination, and
compares each branch against the advertised gate dressed with the declared
Pauli frame. One maximally entangled input certifies the whole channel, so
a passing report is a proof by exhaustion at machine precision.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .boolfn import mobius_anf
from .errors import DimensionError, InferenceError, TableDerivationError
from .executor import (
    BranchEnsemble,
    OutcomeSource,
    enumerate_fragment,
    measurement_order,
    run_fragment_with_spectators,
)
from .pattern import Correction, PatternFragment
from .statevec import DEFAULT_QUBIT_CAP, IMPOSSIBLE_PROB, Statevector
from .unitaries import is_unitary, pauli_product, unitary_from_label

FIT_TOL = 1e-7


@dataclass(frozen=True)
class BranchRecord:
    error_bits: tuple[int, ...]
    outcomes: tuple[int, ...]
    probability: float
    frame: tuple[tuple[int, int], ...]
    infidelity: float | None

    def to_dict(self) -> dict:
        return {
            "error_bits": list(self.error_bits),
            "outcomes": list(self.outcomes),
            "probability": self.probability,
            "frame": [list(zx) for zx in self.frame],
            "infidelity": self.infidelity,
        }


@dataclass
class VerificationReport:
    target_label: str
    tolerance: float
    mode: str
    measured_count: int
    branch_count: int
    impossible_count: int
    worst_infidelity: float
    probability_totals: list[float]
    passed: bool
    records: list[BranchRecord] = field(default_factory=list)

    def to_dict(self, include_branches: bool | None = None) -> dict:
        if include_branches is None:
            include_branches = len(self.records) <= 4096
        out = {
            "target": self.target_label,
            "tolerance": self.tolerance,
            "mode": self.mode,
            "measured_count": self.measured_count,
            "branch_count": self.branch_count,
            "impossible_count": self.impossible_count,
            "worst_infidelity": self.worst_infidelity,
            "probability_totals": self.probability_totals,
            "pass": self.passed,
        }
        if include_branches:
            out["branches"] = [r.to_dict() for r in self.records]
        return out

    def to_json(self, include_branches: bool | None = None) -> str:
        return json.dumps(self.to_dict(include_branches), indent=2, sort_keys=True)


def _as_matrix(target: np.ndarray | str) -> tuple[np.ndarray, str]:
    if isinstance(target, str):
        return unitary_from_label(target), target
    return np.asarray(target, dtype=complex), "matrix"


def choi_input(wires: int) -> Statevector:
    """Bell pairs, wire block first then reference block."""
    dim = 1 << wires
    amps = np.eye(dim, dtype=complex).reshape(-1) / math.sqrt(dim)
    return Statevector(2 * wires, amps)


def _expected_state(U: np.ndarray, frame: tuple[tuple[int, int], ...]) -> np.ndarray:
    wires = len(frame)
    P = pauli_product(list(frame))
    return (P @ U).reshape(-1) / math.sqrt(1 << wires)


def _error_combos(n_in: int):
    """All (z, x) bit assignments per input, z before x, first input first."""
    for bits in product((0, 1), repeat=2 * n_in):
        yield {i: (bits[2 * i], bits[2 * i + 1]) for i in range(n_in)}, bits


def _frame_codes(f: PatternFragment, ens: BranchEnsemble) -> np.ndarray:
    env = ens.full_env_rows()
    rows = ens.states.shape[0]
    code = np.zeros(rows, dtype=np.int64)
    for o in f.outputs:
        corr = f.corrections[o]
        code = (code << 1) | corr.zeta.evaluate_rows(env)
        code = (code << 1) | corr.xi.evaluate_rows(env)
    return code


def _frame_from_code(code: int, wires: int) -> tuple[tuple[int, int], ...]:
    out = []
    for w in range(wires):
        shift = 2 * (wires - 1 - w)
        out.append(((code >> (shift + 1)) & 1, (code >> shift) & 1))
    return tuple(out)


def verify_fragment(
    f: PatternFragment,
    target: np.ndarray | str,
    tol: float = 1e-9,
    branches: str | tuple[str, int] = "all",
    seed: int = 0xC0FFEE,
    cap: int = DEFAULT_QUBIT_CAP,
    keep_branches: bool | None = None,
) -> VerificationReport:
    """Certify that a fragment implements its advertised gate.

    Checks, for every outcome branch and every input Pauli-error
    combination, that the output equals the frame-dressed target on a
    maximally entangled input. ``branches`` is ``"all"`` for exhaustive
    enumeration or ``("sample", k)`` for k seeded runs per error combo.
    """
    U, label = _as_matrix(target)
    n_in, n_out = len(f.inputs), len(f.outputs)
    if n_in != n_out:
        raise DimensionError("equal input/output arity required for this check")
    if U.shape != (1 << n_out, 1 << n_in):
        raise DimensionError(f"target shape {U.shape} does not match arity {n_in}")
    if not is_unitary(U):
        raise DimensionError("target is not unitary")

    measured = len(f.pattern.measurements)
    exhaustive = branches == "all"
    sample_count = 0 if exhaustive else int(branches[1])
    records: list[BranchRecord] = []
    worst = 0.0
    totals: list[float] = []
    possible = impossible = 0

    expected_cache: dict[int, np.ndarray] = {}

    def expected_for(code: int) -> np.ndarray:
        if code not in expected_cache:
            expected_cache[code] = _expected_state(U, _frame_from_code(code, n_out))
        return expected_cache[code]

    keep = keep_branches
    if keep is None:
        keep = (1 << measured) * (1 << (2 * n_in)) <= 4096 or not exhaustive

    for errs, err_bits in _error_combos(n_in):
        if exhaustive:
            ens = enumerate_fragment(
                f, choi_input(n_in), errs, spectators=n_in, cap=cap
            )
            probs = ens.probabilities
            codes = _frame_codes(f, ens)
            fids = np.zeros(len(probs))
            ok = probs >= IMPOSSIBLE_PROB
            for code in np.unique(codes[ok]):
                rows = np.nonzero(ok & (codes == code))[0]
                overlaps = ens.states[rows] @ expected_for(int(code)).conj()
                fids[rows] = np.abs(overlaps) ** 2 / probs[rows]
            totals.append(float(probs.sum()))
            possible += int(ok.sum())
            impossible += int((~ok).sum())
            if ok.any():
                worst = max(worst, float((1.0 - fids[ok]).max()))
            if keep:
                k = measured
                for r in range(len(probs)):
                    outcome_bits = tuple((r >> (k - 1 - j)) & 1 for j in range(k))
                    records.append(
                        BranchRecord(
                            err_bits,
                            outcome_bits,
                            float(probs[r]) if ok[r] else 0.0,
                            _frame_from_code(int(codes[r]), n_out),
                            float(1.0 - fids[r]) if ok[r] else None,
                        )
                    )
        else:
            total = 0.0
            for k in range(sample_count):
                run_seed = (seed * 0x9E3779B1 + len(totals) * 1009 + k) & 0x7FFFFFFF
                trace = run_fragment_with_spectators(
                    f,
                    choi_input(n_in),
                    spectators=n_in,
                    input_errors=errs,
                    src=OutcomeSource.seeded(run_seed),
                    cap=cap,
                )
                frame = tuple(trace.frame[o] for o in f.outputs)
                exp = _expected_state(U, frame)
                fid = float(abs(np.vdot(exp, trace.state.amplitudes)) ** 2)
                worst = max(worst, 1.0 - fid)
                total += trace.probability
                possible += 1
                order = measurement_order(f)
                records.append(
                    BranchRecord(
                        err_bits,
                        tuple(
                            trace.outcomes[f.pattern.measurements[v].var] for v in order
                        ),
                        trace.probability,
                        frame,
                        1.0 - fid,
                    )
                )
            totals.append(total)

    prob_ok = (
        all(abs(t - 1.0) < 1e-9 for t in totals) if exhaustive else True
    )
    passed = worst < tol and prob_ok
    return VerificationReport(
        target_label=label,
        tolerance=tol,
        mode="all" if exhaustive else f"sample:{sample_count}",
        measured_count=measured,
        branch_count=possible,
        impossible_count=impossible,
        worst_infidelity=worst,
        probability_totals=totals,
        passed=passed,
        records=records,
    )


PRODUCT_INPUT_STATES = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
    "i+": np.array([1, 1j], dtype=complex) / math.sqrt(2),
    "i-": np.array([1, -1j], dtype=complex) / math.sqrt(2),
}


def verify_fragment_product_inputs(
    f: PatternFragment,
    target: np.ndarray | str,
    tol: float = 1e-9,
    cap: int = DEFAULT_QUBIT_CAP,
    with_errors: bool = True,
) -> float:
    """Independent cross-check: sweep product inputs instead of Bell pairs.

    Returns the worst infidelity over all branches and product inputs from
    a spanning single-qubit set; ``with_errors`` additionally sweeps every
    input Pauli-error combination.
    """
    U, _ = _as_matrix(target)
    n_in = len(f.inputs)
    n_out = len(f.outputs)
    worst = 0.0
    combos = list(_error_combos(n_in)) if with_errors else [({}, ())]
    for labels in product(PRODUCT_INPUT_STATES, repeat=n_in):
        vec = np.array([1.0], dtype=complex)
        for name in labels:
            vec = np.kron(vec, PRODUCT_INPUT_STATES[name])
        state = Statevector(n_in, vec)
        base = U @ vec
        for errs, _bits in combos:
            ens = enumerate_fragment(f, state, errs, cap=cap)
            probs = ens.probabilities
            codes = _frame_codes(f, ens)
            ok = probs >= IMPOSSIBLE_PROB
            for code in np.unique(codes[ok]):
                rows = np.nonzero(ok & (codes == code))[0]
                exp = pauli_product(list(_frame_from_code(int(code), n_out))) @ base
                fids = np.abs(ens.states[rows] @ exp.conj()) ** 2 / probs[rows]
                worst = max(worst, float((1.0 - fids).max()))
    return worst


def infer_corrections(
    f: PatternFragment,
    target: np.ndarray | str,
    tol: float = 1e-9,
    cap: int = DEFAULT_QUBIT_CAP,
    max_table_bits: int = 20,
) -> dict[int, Correction]:
    """Fit exact ANF correction polynomials from branch-wise Pauli solves.

    Any corrections already on the fragment are ignored. For every branch
    and error combination the unique per-wire Pauli making the branch equal
    the target is found through the entangled-input overlap; the resulting
    truth tables are converted to polynomials with the exact GF(2) Moebius
    transform and certified before being returned.
    """
    U, label = _as_matrix(target)
    n_in, n_out = len(f.inputs), len(f.outputs)
    if U.shape != (1 << n_out, 1 << n_in):
        raise DimensionError("target shape mismatch")
    order = measurement_order(f)
    out_names = [f.pattern.measurements[v].var for v in order]
    err_names = [name for v in f.inputs for name in f.input_errors[v]]
    names = out_names + err_names
    k = len(names)
    if k > max_table_bits:
        raise InferenceError(f"truth table over {k} bits exceeds the budget")

    zeta_tab = {o: np.zeros(1 << k, dtype=np.uint8) for o in f.outputs}
    xi_tab = {o: np.zeros(1 << k, dtype=np.uint8) for o in f.outputs}
    candidates = [
        (code, _expected_state(U, _frame_from_code(code, n_out)))
        for code in range(1 << (2 * n_out))
    ]
    err_bit_count = 2 * n_in

    for errs, err_bits in _error_combos(n_in):
        ens = enumerate_fragment(f, choi_input(n_in), errs, spectators=n_in, cap=cap)
        probs = ens.probabilities
        err_index = 0
        for b in err_bits:
            err_index = (err_index << 1) | b
        overlap = np.zeros((len(candidates), len(probs)))
        for i, (_code, exp) in enumerate(candidates):
            overlap[i] = np.abs(ens.states @ exp.conj()) ** 2
        ok = probs >= IMPOSSIBLE_PROB
        fids = np.where(ok, overlap / np.where(ok, probs, 1.0), 0.0)
        hits = fids > 1.0 - FIT_TOL
        n_hits = hits.sum(axis=0)
        if np.any(ok & (n_hits != 1)):
            bad = int(np.nonzero(ok & (n_hits != 1))[0][0])
            raise InferenceError(
                f"branch {bad} of error combo {err_bits} admits "
                f"{int(n_hits[bad])} Pauli solutions against {label}"
            )
        codes = np.argmax(hits, axis=0)
        for row in range(len(probs)):
            idx = (row << err_bit_count) | err_index
            if not ok[row]:
                continue  # impossible branch: leave the don't-care at 0
            frame = _frame_from_code(int(candidates[codes[row]][0]), n_out)
            for w, o in enumerate(f.outputs):
                zeta_tab[o][idx] = frame[w][0]
                xi_tab[o][idx] = frame[w][1]

    fitted = {
        o: Correction(mobius_anf(zeta_tab[o], names), mobius_anf(xi_tab[o], names))
        for o in f.outputs
    }
    candidate = PatternFragment(
        f.pattern, f.inputs, f.outputs, f.input_errors, fitted
    )
    report = verify_fragment(candidate, U, tol=tol, cap=cap, keep_branches=False)
    if not report.passed:
        raise InferenceError(
            f"fitted corrections fail certification (worst infidelity"
            f" {report.worst_infidelity:.3e})"
        )
    return fitted


def with_corrections(f: PatternFragment, corr: dict[int, Correction]) -> PatternFragment:
    return PatternFragment(f.pattern, f.inputs, f.outputs, f.input_errors, corr)


def classify_unitary(
    U: np.ndarray,
    dictionary: dict[str, np.ndarray],
    threshold: float = 1.0 - 1e-9,
) -> str | None:
    """Name a unitary by normalized trace overlap, or return None."""
    U = np.asarray(U, dtype=complex)
    if not is_unitary(U):
        raise DimensionError("input deviates from unitarity beyond 1e-9")
    dim = U.shape[0]
    best_label, best_score = None, 0.0
    for name, V in dictionary.items():
        if V.shape != U.shape:
            continue
        score = abs(np.trace(V.conj().T @ U)) / dim
        if score > best_score:
            best_label, best_score = name, score
    return best_label if best_score > threshold else None


def classify_up_to_frame(
    U: np.ndarray,
    dictionary: dict[str, np.ndarray],
    wires: int,
    threshold: float = 1.0 - 1e-9,
) -> tuple[str, tuple[tuple[int, int], ...]] | None:
    """Classify allowing an extra per-wire Pauli frame in front."""
    for bits in product(product((0, 1), repeat=2), repeat=wires):
        P = pauli_product(list(bits))
        label = classify_unitary(P.conj().T @ U, dictionary, threshold)
        if label is not None:
            return label, tuple(bits)
    return None


def operator_schmidt_rank(U: np.ndarray, rel_tol: float = 1e-9) -> int:
    """Rank of a two-qubit operator across the wire bipartition."""
    M = np.asarray(U, dtype=complex).reshape(2, 2, 2, 2)
    M = M.transpose(0, 2, 1, 3).reshape(4, 4)
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > rel_tol * s[0]).sum())


def branch_operator(states: np.ndarray, row: int, wires: int) -> np.ndarray:
    """Extract the conditional linear map of one branch from Choi output."""
    dim = 1 << wires
    M = states[row].reshape(dim, dim) * math.sqrt(dim)
    norm = np.linalg.norm(M) / math.sqrt(dim)
    if norm < 1e-9:
        raise InferenceError("branch has no support")
    return M / norm


# -- brick table -------------------------------------------------------


def standard_dictionary() -> dict[str, np.ndarray]:
    labels = [
        "I", "X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg",
        "HSH", "HSHS", "HTH", "HTdgH", "X(pi/2)",
        "CZ", "CNOT", "(SxS)*CZ", "SxS",
    ]
    return {name: unitary_from_label(name) for name in labels}


def _lane_dictionary() -> dict[str, np.ndarray]:
    from .fragments import LEFT_LANE_GATES, RIGHT_LANE_GATES

    out = {}
    for l in LEFT_LANE_GATES:
        for r in RIGHT_LANE_GATES:
            for cz in (0, 1):
                ll = "I" if l == "PAD" else l
                rr = "I" if r == "PAD" else r
                label = f"CZ*({ll}x{rr})" if cz else f"{ll}x{rr}"
                out[label] = unitary_from_label(label)
    return out


def _basis_assignment(f: PatternFragment) -> dict[str, str]:
    out = {}
    for v, m in sorted(f.pattern.measurements.items()):
        if m.choice.is_constant():
            out[m.var] = "Z" if m.choice.constant_value() else "X"
        else:
            out[m.var] = "ADAPT"
    return out


@dataclass
class BrickTableEntry:
    left: str
    right: str
    cz: int
    label: str
    bases: dict[str, str]
    worst_infidelity: float
    branch_count: int

    def to_dict(self) -> dict:
        return {
            "left": self.left,
            "right": self.right,
            "cz": self.cz,
            "label": self.label,
            "bases": self.bases,
            "worst_infidelity": self.worst_infidelity,
            "branch_count": self.branch_count,
        }


ADVERTISED_LANE_GATES = ("H", "S", "HSH", "HSHS", "HTH", "T")


def canonical_brick_settings() -> list["BrickSettings"]:
    """One witness per advertised gate and switch state, plus extras."""
    from .fragments import BrickSettings, LEFT_LANE_GATES

    rows = []
    for cz in (0, 1):
        rows.append(BrickSettings("PAD", "PAD", cz))
        for gate in ADVERTISED_LANE_GATES + ("Tdg", "HTdgH"):
            if gate in LEFT_LANE_GATES:
                rows.append(BrickSettings(gate, "PAD", cz))
            else:
                rows.append(BrickSettings("PAD", gate, cz))
    return rows


def scan_brick_settings(seed: int = 0xC0FFEE) -> dict[tuple[str, str, int], str]:
    """Cheap classification sweep over every realizable settings triple.

    Runs a single sampled branch per triple and classifies the conditional
    map up to a Pauli frame. Full certification is reserved for the table.
    """
    from .fragments import LEFT_LANE_GATES, RIGHT_LANE_GATES, BrickSettings, brick

    dictionary = _lane_dictionary()
    out = {}
    for l in LEFT_LANE_GATES:
        for r in RIGHT_LANE_GATES:
            for cz in (0, 1):
                frag = brick(BrickSettings(l, r, cz))
                trace = run_fragment_with_spectators(
                    frag,
                    choi_input(2),
                    spectators=2,
                    src=OutcomeSource.seeded(seed),
                )
                M = trace.state.amplitudes.reshape(4, 4) * 2.0
                M = M / (np.linalg.norm(M) / 2.0)
                hit = classify_up_to_frame(M, dictionary, wires=2, threshold=1 - 1e-7)
                if hit is None:
                    raise TableDerivationError(
                        f"settings ({l},{r},cz={cz}) classify as nothing"
                    )
                out[(l, r, cz)] = hit[0]
    return out


def derive_brick_table(tol: float = 1e-9, cap: int = DEFAULT_QUBIT_CAP) -> list[BrickTableEntry]:
    """Derive and certify the settings table for the 16-qubit brick.

    Every advertised lane gate together with both switch states receives a
    witness row; each emitted row is verified branch-exhaustively over all
    input-error combinations. A missing witness raises, signalling a
    topology transcription error.
    """
    from .fragments import brick

    entries = []
    covered: set[tuple[str, int]] = set()
    for settings in canonical_brick_settings():
        frag = brick(settings)
        report = verify_fragment(
            frag, settings.label(), tol=tol, cap=cap, keep_branches=False
        )
        if not report.passed:
            raise TableDerivationError(
                f"witness {settings} fails certification"
                f" (worst infidelity {report.worst_infidelity:.3e})"
            )
        entries.append(
            BrickTableEntry(
                settings.left,
                settings.right,
                settings.cz,
                settings.label(),
                _basis_assignment(frag),
                report.worst_infidelity,
                report.branch_count,
            )
        )
        for gate in (settings.left, settings.right):
            covered.add((gate, settings.cz))
    for gate in ADVERTISED_LANE_GATES:
        for cz in (0, 1):
            if (gate, cz) not in covered:
                raise TableDerivationError(f"no witness for {gate} with cz={cz}")
    return entries


def brick_table_to_json(entries: list[BrickTableEntry]) -> str:
    return json.dumps(
        {"schema_version": 1, "entries": [e.to_dict() for e in entries]},
        indent=2,
        sort_keys=True,
    )
