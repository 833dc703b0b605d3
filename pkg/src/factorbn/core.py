"""Discrete variables, factors over them, and hard evidence.

A factor's scope is always kept sorted by variable id, and its value
table is an ndarray whose axes follow the scope.  Flattened in C order
this is the row-major layout with the first scope variable varying
slowest, which is also the on-disk table layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Variable:
    """A finite-domain variable: an integer id, a name, and state labels."""

    id: int
    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        if self.id < 0:
            raise ValidationError(f"variable id must be non-negative, got {self.id}")
        if not self.name:
            raise ValidationError("variable name must be non-empty")
        if not self.states:
            raise ValidationError(f"variable {self.name!r} needs at least one state")
        if len(set(self.states)) != len(self.states):
            raise ValidationError(f"variable {self.name!r} has duplicate state labels")

    @property
    def card(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Factor:
    """A real-valued table over a scope of variables.

    Parameters
    ----------
    scope : tuple of int
        Variable ids, strictly ascending.
    cards : tuple of int
        Cardinality of each scope variable, parallel to ``scope``.
    values : ndarray
        Table with ``values.shape == cards``.  Stored read-only.
    """

    scope: tuple[int, ...]
    cards: tuple[int, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        scope = tuple(self.scope)
        cards = tuple(self.cards)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "cards", cards)
        if list(scope) != sorted(set(scope)):
            raise ValidationError(f"scope must be strictly ascending ids, got {scope}")
        if len(cards) != len(scope):
            raise ValidationError("cards must be parallel to scope")
        if any(c < 1 for c in cards):
            raise ValidationError(f"cardinalities must be positive, got {cards}")
        values = np.asarray(self.values)
        if values.shape != cards:
            if values.ndim == 1 and values.size == int(np.prod(cards, dtype=np.int64)):
                values = values.reshape(cards)
            else:
                raise ValidationError(
                    f"value table shape {values.shape} does not match cards {cards}"
                )
        # np.ascontiguousarray would turn 0-d scalars into 1-d arrays
        values = np.array(values, order="C")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_flat(cls, scope: Iterable[int], cards: Iterable[int], flat) -> "Factor":
        """Build from a flat row-major list (first scope variable slowest)."""
        cards = tuple(cards)
        return cls(tuple(scope), cards, np.asarray(flat).reshape(cards))

    @classmethod
    def scalar(cls, value: float) -> "Factor":
        return cls((), (), np.asarray(value))

    def flat(self) -> np.ndarray:
        """The table flattened in the on-disk row-major order."""
        return self.values.reshape(-1)

    def __getitem__(self, config) -> float:
        return self.values[tuple(config)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Factor):
            return NotImplemented
        return (
            self.scope == other.scope
            and self.cards == other.cards
            and np.array_equal(self.values, other.values)
        )


def _expand_to(f: Factor, scope: tuple[int, ...]) -> np.ndarray:
    """View f.values with singleton axes inserted for variables not in f."""
    missing = tuple(i for i, v in enumerate(scope) if v not in f.scope)
    return np.expand_dims(f.values, missing) if missing else f.values


def multiply(a: Factor, b: Factor) -> Factor:
    """Pointwise product over the union of the two scopes."""
    common = set(a.scope) & set(b.scope)
    for v in common:
        if a.cards[a.scope.index(v)] != b.cards[b.scope.index(v)]:
            raise ValidationError(f"cardinality conflict for variable {v}")
    scope = tuple(sorted(set(a.scope) | set(b.scope)))
    by_id = {v: c for v, c in zip(a.scope, a.cards)}
    by_id.update(zip(b.scope, b.cards))
    cards = tuple(by_id[v] for v in scope)
    values = _expand_to(a, scope) * _expand_to(b, scope)
    return Factor(scope, cards, values)


def product(factors: Iterable[Factor]) -> Factor:
    """Multiply a sequence of factors; empty product is the scalar 1."""
    result = None
    for f in factors:
        result = f if result is None else multiply(result, f)
    return Factor.scalar(1.0) if result is None else result


def marginalize(f: Factor, var: int) -> Factor:
    """Sum out one variable of the scope."""
    if var not in f.scope:
        raise ValidationError(f"variable {var} not in scope {f.scope}")
    axis = f.scope.index(var)
    scope = f.scope[:axis] + f.scope[axis + 1 :]
    cards = f.cards[:axis] + f.cards[axis + 1 :]
    return Factor(scope, cards, f.values.sum(axis=axis))


@dataclass(frozen=True)
class Evidence:
    """Hard findings: per observed variable, a 0/1 vector over its states.

    A configuration is consistent with the evidence when every observed
    variable in it sits on a state flagged 1.  The empty mapping means
    no observations.
    """

    findings: Mapping[int, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for var, vec in dict(self.findings).items():
            vec = tuple(int(x) for x in vec)
            if any(x not in (0, 1) for x in vec):
                raise ValidationError(f"evidence vector for variable {var} must be 0/1")
            clean[int(var)] = vec
        object.__setattr__(self, "findings", clean)

    def __contains__(self, var: int) -> bool:
        return var in self.findings

    def vector(self, var: int) -> tuple[int, ...]:
        return self.findings[var]


def insert_evidence(f: Factor, evidence: Evidence) -> Factor:
    """Zero out rows of f that contradict the evidence.

    Cells consistent with every finding keep their exact value; the
    rest become exactly 0.
    """
    values = f.values
    touched = False
    for axis, (var, card) in enumerate(zip(f.scope, f.cards)):
        if var not in evidence:
            continue
        vec = evidence.vector(var)
        if len(vec) != card:
            raise ValidationError(
                f"evidence vector length {len(vec)} != cardinality {card} of variable {var}"
            )
        shape = [1] * values.ndim
        shape[axis] = card
        values = values * np.asarray(vec, dtype=values.dtype).reshape(shape)
        touched = True
    return Factor(f.scope, f.cards, values) if touched else f
