"""Parity-phase measurement-based quantum computing toolkit."""

from .boolfn import BoolFn, eval_boolfn, mobius_anf
from .errors import (
    CircuitParseError,
    DimensionError,
    EvaluationError,
    ImpossibleBranchError,
    InferenceError,
    PpmError,
    StateSizeError,
    StructuralError,
    TableDerivationError,
    WellFoundednessError,
)
from .executor import (
    ExecutionTrace,
    OutcomeSource,
    enumerate_fragment,
    enumerate_pattern,
    feed_forward_depth,
    run_fragment,
    run_pattern,
)
from .fragments import (
    BrickSettings,
    brick,
    builtin_fragment,
    builtin_names,
    cz_fragment,
    e_fragment,
    e_fragment_nomiddle,
    hierarchy_fragment,
    xhalf_fragment,
)
from .pattern import (
    Correction,
    Measurement,
    MeasurementPattern,
    PatternFragment,
    PauliFrame,
    compose,
    dependency_schedule,
    fragment_from_json,
    fragment_to_json,
)
from .pgraph import PGraph, add_edges
from .statevec import (
    LocalGate,
    Statevector,
    apply_local,
    apply_parity_phase,
    fidelity_up_to_phase,
    measure,
    prepare_resource,
)

__all__ = [
    "BoolFn",
    "BrickSettings",
    "CircuitParseError",
    "Correction",
    "DimensionError",
    "EvaluationError",
    "ExecutionTrace",
    "ImpossibleBranchError",
    "InferenceError",
    "LocalGate",
    "Measurement",
    "MeasurementPattern",
    "OutcomeSource",
    "PGraph",
    "PatternFragment",
    "PauliFrame",
    "PpmError",
    "StateSizeError",
    "Statevector",
    "StructuralError",
    "TableDerivationError",
    "WellFoundednessError",
    "add_edges",
    "apply_local",
    "apply_parity_phase",
    "brick",
    "builtin_fragment",
    "builtin_names",
    "compose",
    "cz_fragment",
    "dependency_schedule",
    "e_fragment",
    "e_fragment_nomiddle",
    "enumerate_fragment",
    "enumerate_pattern",
    "eval_boolfn",
    "feed_forward_depth",
    "fidelity_up_to_phase",
    "fragment_from_json",
    "fragment_to_json",
    "hierarchy_fragment",
    "measure",
    "mobius_anf",
    "prepare_resource",
    "run_fragment",
    "run_pattern",
    "xhalf_fragment",
]
__version__ = "0.1.0"
