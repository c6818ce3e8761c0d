"""Boolean functions over GF(2) in algebraic normal form.

A function is stored as a set of monomials, each monomial a set of variable
names combined by AND; monomials are combined by XOR. The empty monomial is
the constant 1, the empty monomial set is the constant 0. The representation
is canonical: duplicate monomials cancel in pairs, so two equal functions
have equal monomial sets.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import EvaluationError

Monomial = frozenset[str]


def _canonical(monomials: Iterable[Iterable[str]]) -> frozenset[Monomial]:
    acc: set[Monomial] = set()
    for mono in monomials:
        m = frozenset(mono)
        if m in acc:
            acc.discard(m)  # x ^ x = 0
        else:
            acc.add(m)
    return frozenset(acc)


@dataclass(frozen=True)
class BoolFn:
    """An ANF polynomial: XOR over monomials of AND over variables."""

    monomials: frozenset[Monomial] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "monomials", _canonical(self.monomials))

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero() -> BoolFn:
        return BoolFn(frozenset())

    @staticmethod
    def one() -> BoolFn:
        return BoolFn(frozenset({frozenset()}))

    @staticmethod
    def var(name: str) -> BoolFn:
        return BoolFn(frozenset({frozenset({name})}))

    @staticmethod
    def const(bit: int) -> BoolFn:
        return BoolFn.one() if bit & 1 else BoolFn.zero()

    @staticmethod
    def parse(monomials: Iterable[Iterable[str]]) -> BoolFn:
        """Build from a list of monomials, e.g. ``[["a"], ["b", "z"], []]``."""
        return BoolFn(_canonical(monomials))

    @staticmethod
    def xor_of(*fns: BoolFn | str) -> BoolFn:
        """XOR of functions; bare strings are taken as variables."""
        parts = [BoolFn.var(f) if isinstance(f, str) else f for f in fns]
        return reduce(lambda a, b: a ^ b, parts, BoolFn.zero())

    # -- algebra ------------------------------------------------------

    def __xor__(self, other: BoolFn) -> BoolFn:
        return BoolFn(self.monomials.symmetric_difference(other.monomials))

    def __and__(self, other: BoolFn) -> BoolFn:
        # Distribute; x AND x = x inside a monomial via set union.
        return BoolFn(_canonical(a | b for a in self.monomials for b in other.monomials))

    @property
    def variables(self) -> tuple[str, ...]:
        """Sorted names referenced by at least one monomial."""
        names: set[str] = set()
        for m in self.monomials:
            names |= m
        return tuple(sorted(names))

    def is_constant(self) -> bool:
        return not self.variables

    def constant_value(self) -> int:
        if not self.is_constant():
            raise EvaluationError(f"{self} is not constant")
        return 1 if frozenset() in self.monomials else 0

    # -- evaluation ---------------------------------------------------

    def evaluate(self, env: Mapping[str, int]) -> int:
        """Evaluate under a variable assignment; unbound variables raise."""
        acc = 0
        for mono in self.monomials:
            term = 1
            for name in mono:
                try:
                    term &= env[name] & 1
                except KeyError:
                    raise EvaluationError(f"unbound variable {name!r}") from None
                if not term:
                    break
            acc ^= term
        return acc

    def evaluate_rows(self, env: Mapping[str, np.ndarray]) -> np.ndarray:
        """Vectorized evaluation over parallel rows of uint8 bits."""
        rows = len(next(iter(env.values()))) if env else 1
        acc = np.zeros(rows, dtype=np.uint8)
        for mono in self.monomials:
            term = np.ones(rows, dtype=np.uint8)
            for name in mono:
                if name not in env:
                    raise EvaluationError(f"unbound variable {name!r}")
                term &= env[name]
            acc ^= term
        return acc

    # -- substitution -------------------------------------------------

    def substitute(self, bindings: Mapping[str, BoolFn]) -> BoolFn:
        """Replace variables by ANF polynomials, re-expanding to canonical form."""
        result = BoolFn.zero()
        for mono in self.monomials:
            term = BoolFn.one()
            for name in mono:
                term = term & bindings.get(name, BoolFn.var(name))
            result = result ^ term
        return result

    def rename(self, mapping: Mapping[str, str]) -> BoolFn:
        return BoolFn(
            frozenset(frozenset(mapping.get(n, n) for n in m) for m in self.monomials)
        )

    # -- serialization ------------------------------------------------

    def to_anf_lists(self) -> list[list[str]]:
        """Deterministic nested-list form used by the JSON schema."""
        return sorted((sorted(m) for m in self.monomials), key=lambda m: (len(m), m))

    @staticmethod
    def from_anf_lists(data: Iterable[Iterable[str]]) -> BoolFn:
        return BoolFn.parse(data)

    def __str__(self) -> str:
        if not self.monomials:
            return "0"
        parts = ["1" if not m else "*".join(m) for m in self.to_anf_lists()]
        return " ^ ".join(parts)


def eval_boolfn(f: BoolFn, env: Mapping[str, int]) -> int:
    """Functional alias for :meth:`BoolFn.evaluate`."""
    return f.evaluate(env)


def mobius_anf(table: np.ndarray, names: list[str]) -> BoolFn:
    """Fit the exact ANF of a truth table via the GF(2) Moebius transform.

    ``table`` holds one bit per assignment; assignment ``i`` sets
    ``names[j]`` to bit ``j`` of ``i`` counted from the most significant
    position (``names[0]`` is the MSB of the row index).
    """
    k = len(names)
    if table.shape != (1 << k,):
        raise ValueError(f"table must have {1 << k} rows, got {table.shape}")
    coeff = np.array(table, dtype=np.uint8)
    for j in range(k):
        step = 1 << (k - 1 - j)
        block = 2 * step
        for start in range(0, 1 << k, block):
            coeff[start + step : start + block] ^= coeff[start : start + step]
    monomials = []
    for idx in np.nonzero(coeff)[0]:
        mono = [names[j] for j in range(k) if (idx >> (k - 1 - j)) & 1]
        monomials.append(mono)
    return BoolFn.parse(monomials)
