"""Measurement patterns, pattern fragments, scheduling and composition.

A measurement pattern is a resource multigraph whose vertices carry
measurement expressions ``b <- phi(...)``: measure in the X basis when the
choice function evaluates to 0 and in the Z basis when it evaluates to 1,
storing the result in the fresh variable ``b``.

A pattern fragment adds designated input and output vertex subsets (not
necessarily disjoint), per-input Pauli error variables ``(z, x)``, and
per-output correction functions ``(zeta, xi)``. A fragment implements a
gate G when feeding it ``X^x Z^z |psi>`` yields ``X^xi Z^zeta G |psi>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter

from .boolfn import BoolFn
from .errors import StructuralError, WellFoundednessError
from .pgraph import PGraph

SCHEMA_VERSION = 1

# Choice-function semantics, used everywhere: value 0 -> X basis, 1 -> Z.
BASIS_BY_CHOICE = {0: "X", 1: "Z"}


@dataclass(frozen=True)
class Measurement:
    """Measurement expression: output variable plus basis-choice function."""

    var: str
    choice: BoolFn


@dataclass(frozen=True)
class Correction:
    """Output corrections: pending Z flip (zeta) and X flip (xi)."""

    zeta: BoolFn
    xi: BoolFn


@dataclass(frozen=True)
class PauliFrame:
    """Per-wire (z, x) correction bits; composition is bitwise XOR."""

    bits: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for z, x in self.bits:
            if z not in (0, 1) or x not in (0, 1):
                raise StructuralError("frame bits must be 0 or 1")

    def compose(self, other: PauliFrame) -> PauliFrame:
        if len(self.bits) != len(other.bits):
            raise StructuralError("frame widths differ")
        return PauliFrame(
            tuple((z1 ^ z2, x1 ^ x2) for (z1, x1), (z2, x2) in zip(self.bits, other.bits))
        )


@dataclass(frozen=True)
class MeasurementPattern:
    """A P-graph whose measured vertices carry measurement expressions."""

    graph: PGraph
    measurements: dict[int, Measurement] = field(default_factory=dict)

    def __post_init__(self):
        seen_vars: set[str] = set()
        for v, meas in self.measurements.items():
            if not 0 <= v < self.graph.vertex_count:
                raise StructuralError(f"measured vertex {v} out of range")
            if meas.var in seen_vars:
                raise StructuralError(f"output variable {meas.var!r} is not fresh")
            seen_vars.add(meas.var)

    def measured_vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self.measurements))

    def producer_of(self) -> dict[str, int]:
        return {m.var: v for v, m in self.measurements.items()}

    def validate_references(self, ambient: set[str]) -> None:
        """Check choice functions only read other outcomes or ambient names."""
        producers = self.producer_of()
        for v, meas in self.measurements.items():
            for name in meas.choice.variables:
                if name in ambient:
                    continue
                if name not in producers:
                    raise StructuralError(
                        f"vertex {v} choice references unknown variable {name!r}"
                    )
                if producers[name] == v:
                    raise StructuralError(f"vertex {v} choice references its own outcome")


def dependency_schedule(
    pattern: MeasurementPattern, ambient: set[str] | None = None
) -> list[list[int]]:
    """Group measured vertices into feed-forward rounds.

    Round 0 holds every vertex whose choice function is constant (or reads
    only ambient names such as input-error variables); round r+1 holds
    vertices depending only on earlier rounds. Cyclic dependencies raise
    :class:`WellFoundednessError` carrying one offending cycle.
    """
    ambient = ambient or set()
    pattern.validate_references(ambient)
    producers = pattern.producer_of()
    deps: dict[int, set[int]] = {}
    for v, meas in pattern.measurements.items():
        deps[v] = {
            producers[name]
            for name in meas.choice.variables
            if name not in ambient and producers[name] != v
        }
    try:
        order = list(TopologicalSorter(deps).static_order())
    except CycleError as err:
        cycle = [int(v) for v in err.args[1]]
        raise WellFoundednessError(
            f"cyclic dependency between vertices {cycle}", cycle=cycle
        ) from None
    depth: dict[int, int] = {}
    for v in order:
        depth[v] = 1 + max((depth[u] for u in deps[v]), default=-1)
    rounds: list[list[int]] = [[] for _ in range(max(depth.values(), default=-1) + 1)]
    for v, d in depth.items():
        rounds[d].append(v)
    return [sorted(r) for r in rounds]


@dataclass(frozen=True)
class PatternFragment:
    """A pattern with inputs, outputs, input errors and output corrections."""

    pattern: MeasurementPattern
    inputs: tuple[int, ...] = ()
    outputs: tuple[int, ...] = ()
    input_errors: dict[int, tuple[str, str]] = field(default_factory=dict)
    corrections: dict[int, Correction] = field(default_factory=dict)

    def __post_init__(self):
        n = self.pattern.graph.vertex_count
        for v in (*self.inputs, *self.outputs):
            if not 0 <= v < n:
                raise StructuralError(f"designated vertex {v} out of range")
        if len(set(self.inputs)) != len(self.inputs):
            raise StructuralError("duplicate input vertex")
        if len(set(self.outputs)) != len(self.outputs):
            raise StructuralError("duplicate output vertex")
        out_set = set(self.outputs)
        for v in range(n):
            if v in out_set:
                if v in self.pattern.measurements:
                    raise StructuralError(f"output vertex {v} must not be measured")
            elif v not in self.pattern.measurements:
                raise StructuralError(f"non-output vertex {v} lacks a measurement")
        if set(self.input_errors) != set(self.inputs):
            raise StructuralError("input_errors must cover exactly the inputs")
        if set(self.corrections) != out_set:
            raise StructuralError("corrections must cover exactly the outputs")
        names = list(self.pattern.producer_of())
        for zvar, xvar in self.input_errors.values():
            names.extend((zvar, xvar))
        if len(names) != len(set(names)):
            raise StructuralError("variable names must be globally fresh")
        allowed = set(names)
        self.pattern.validate_references(set(self.error_variables()))
        for v, corr in self.corrections.items():
            for fn in (corr.zeta, corr.xi):
                for name in fn.variables:
                    if name not in allowed:
                        raise StructuralError(
                            f"correction on vertex {v} references unknown {name!r}"
                        )

    def error_variables(self) -> tuple[str, ...]:
        out: list[str] = []
        for v in self.inputs:
            out.extend(self.input_errors[v])
        return tuple(out)

    def schedule(self) -> list[list[int]]:
        return dependency_schedule(self.pattern, set(self.error_variables()))

    def rename_variables(self, prefix: str) -> PatternFragment:
        """Prefix every variable name; used to keep namespaces disjoint."""
        mapping = {name: prefix + name for name in self._all_variables()}
        return self._apply_renaming(mapping)

    def _all_variables(self) -> tuple[str, ...]:
        return tuple(self.pattern.producer_of()) + self.error_variables()

    def _apply_renaming(self, mapping: dict[str, str]) -> PatternFragment:
        meas = {
            v: Measurement(mapping.get(m.var, m.var), m.choice.rename(mapping))
            for v, m in self.pattern.measurements.items()
        }
        errs = {
            v: (mapping.get(z, z), mapping.get(x, x))
            for v, (z, x) in self.input_errors.items()
        }
        corrs = {
            v: Correction(c.zeta.rename(mapping), c.xi.rename(mapping))
            for v, c in self.corrections.items()
        }
        return PatternFragment(
            MeasurementPattern(self.pattern.graph, meas),
            self.inputs,
            self.outputs,
            errs,
            corrs,
        )

    def with_io_order(
        self, inputs: tuple[int, ...], outputs: tuple[int, ...]
    ) -> PatternFragment:
        """Reorder the declared wire order without touching anything else."""
        if set(inputs) != set(self.inputs) or set(outputs) != set(self.outputs):
            raise StructuralError("reorder must preserve the input/output sets")
        return PatternFragment(
            self.pattern, tuple(inputs), tuple(outputs), self.input_errors, self.corrections
        )


def compose(
    f1: PatternFragment, f2: PatternFragment, wiring: dict[int, int]
) -> PatternFragment:
    """Plug outputs of ``f1`` into inputs of ``f2``.

    ``wiring`` maps f1 output vertices to f2 input vertices (injectively).
    Wired vertices are identified; the wired inputs' error variables are
    substituted by f1's correction functions, so corrections and adaptive
    choices thread through automatically. Unwired inputs and outputs pass
    through to the composite.
    """
    return compose_with_map(f1, f2, wiring)[0]


def compose_with_map(
    f1: PatternFragment, f2: PatternFragment, wiring: dict[int, int]
) -> tuple[PatternFragment, dict[int, int]]:
    """Like :func:`compose`, also returning the f2-to-composite vertex map."""
    g1, g2 = f1.pattern.graph, f2.pattern.graph
    if g1.base_exponent != g2.base_exponent:
        raise StructuralError("base exponents differ")
    out_set, in_set = set(f1.outputs), set(f2.inputs)
    for o, i in wiring.items():
        if o not in out_set:
            raise StructuralError(f"{o} is not an output of the first fragment")
        if i not in in_set:
            raise StructuralError(f"{i} is not an input of the second fragment")
    if len(set(wiring.values())) != len(wiring):
        raise StructuralError("wiring must be injective")

    used = set(f1._all_variables())
    if used & set(f2._all_variables()):
        k = 2
        while any((f"g{k}." + v) in used for v in f2._all_variables()):
            k += 1
        f2 = f2.rename_variables(f"g{k}.")

    n1 = g1.vertex_count
    wired_rev = {i: o for o, i in wiring.items()}
    relabel: dict[int, int] = {}
    nxt = n1
    for v in range(g2.vertex_count):
        if v in wired_rev:
            relabel[v] = wired_rev[v]
        else:
            relabel[v] = nxt
            nxt += 1

    graph = PGraph(nxt, g1.base_exponent, g1.edges + g2.relabel(relabel, nxt).edges)

    # Replace wired inputs' error variables by f1's corrections.
    bindings: dict[str, BoolFn] = {}
    for o, i in wiring.items():
        zvar, xvar = f2.input_errors[i]
        corr = f1.corrections[o]
        bindings[zvar] = corr.zeta
        bindings[xvar] = corr.xi

    measurements = dict(f1.pattern.measurements)
    for v, m in f2.pattern.measurements.items():
        measurements[relabel[v]] = Measurement(m.var, m.choice.substitute(bindings))

    inputs = f1.inputs + tuple(relabel[v] for v in f2.inputs if v not in wired_rev)
    outputs = tuple(o for o in f1.outputs if o not in wiring) + tuple(
        relabel[v] for v in f2.outputs
    )
    input_errors = dict(f1.input_errors)
    for v in f2.inputs:
        if v not in wired_rev:
            input_errors[relabel[v]] = f2.input_errors[v]
    corrections = {o: c for o, c in f1.corrections.items() if o not in wiring}
    for v, c in f2.corrections.items():
        corrections[relabel[v]] = Correction(
            c.zeta.substitute(bindings), c.xi.substitute(bindings)
        )
    # A wired vertex that was also an f1 input stays an input; if it was
    # measured by f2 it is no longer an output, which the relabel handles.
    composite = PatternFragment(
        MeasurementPattern(graph, measurements), inputs, outputs, input_errors, corrections
    )
    return composite, relabel


# -- JSON schema ------------------------------------------------------


def fragment_to_dict(f: PatternFragment) -> dict:
    g = f.pattern.graph
    return {
        "schema_version": SCHEMA_VERSION,
        "vertices": g.vertex_count,
        "base_exponent": g.base_exponent,
        "edges": [{"u": u, "v": v, "mult": k} for u, v, k in g.edges],
        "measurements": {
            str(v): {"var": m.var, "anf": m.choice.to_anf_lists()}
            for v, m in sorted(f.pattern.measurements.items())
        },
        "inputs": list(f.inputs),
        "outputs": list(f.outputs),
        "input_errors": {str(v): list(f.input_errors[v]) for v in sorted(f.input_errors)},
        "corrections": {
            str(v): {
                "zeta": f.corrections[v].zeta.to_anf_lists(),
                "xi": f.corrections[v].xi.to_anf_lists(),
            }
            for v in sorted(f.corrections)
        },
    }


def pattern_to_dict(p: MeasurementPattern) -> dict:
    d = fragment_to_dict(_bare_fragment(p))
    return d


def _bare_fragment(p: MeasurementPattern) -> PatternFragment:
    outputs = tuple(
        v for v in range(p.graph.vertex_count) if v not in p.measurements
    )
    corrections = {v: Correction(BoolFn.zero(), BoolFn.zero()) for v in outputs}
    return PatternFragment(p, (), outputs, {}, corrections)


def fragment_from_dict(data: dict) -> PatternFragment:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise StructuralError(f"unsupported schema_version {version!r}")
    graph = PGraph(
        data["vertices"],
        data["base_exponent"],
        tuple((e["u"], e["v"], e["mult"]) for e in data["edges"]),
    )
    measurements = {
        int(v): Measurement(entry["var"], BoolFn.from_anf_lists(entry["anf"]))
        for v, entry in data.get("measurements", {}).items()
    }
    corrections = {
        int(v): Correction(
            BoolFn.from_anf_lists(entry["zeta"]), BoolFn.from_anf_lists(entry["xi"])
        )
        for v, entry in data.get("corrections", {}).items()
    }
    return PatternFragment(
        MeasurementPattern(graph, measurements),
        tuple(data.get("inputs", [])),
        tuple(data.get("outputs", [])),
        {int(v): (z, x) for v, (z, x) in data.get("input_errors", {}).items()},
        corrections,
    )


def fragment_to_json(f: PatternFragment) -> str:
    return json.dumps(fragment_to_dict(f), indent=2, sort_keys=True)


def fragment_from_json(text: str) -> PatternFragment:
    return fragment_from_dict(json.loads(text))
