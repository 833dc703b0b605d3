"""Multiplicative factorization of a deterministic table through one
hidden variable.

The indicator [y == f(x1, ..., xn)] is rewritten as

    sum_b  h(y, b) * g_1(x1, b) * ... * g_n(xn, b)

where b ranges over the states of a hidden variable, one per base
rectangle.  Each g_i(x, b) is 1 exactly when x lies in rectangle b's
i-th dimension subset, and h collects signed counts read off the level
set expressions.  All tables here are exact integers; h may carry
negative entries, which is fine because only the sum must match the
indicator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .functions import DeterministicFunction
from .rectangles import Base, Config, Expression, Hyperrectangle, evaluate_expression, full_space


@dataclass(frozen=True)
class FactorizedForm:
    """The pair (h, g) produced by a factorization.

    ``h`` has shape (child_card, n_hidden); each ``g[i]`` has shape
    (parent_cards[i], n_hidden) with 0/1 entries.
    """

    parent_cards: tuple[int, ...]
    child_card: int
    h: np.ndarray
    g: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "parent_cards", tuple(self.parent_cards))
        h = np.asarray(self.h, dtype=np.int64)
        g = tuple(np.asarray(gi, dtype=np.int64) for gi in self.g)
        if h.ndim != 2 or h.shape[0] != self.child_card:
            raise ValidationError(f"h has shape {h.shape}, expected ({self.child_card}, k)")
        k = h.shape[1]
        if len(g) != len(self.parent_cards):
            raise ValidationError("need one g table per parent")
        for gi, c in zip(g, self.parent_cards):
            if gi.shape != (c, k):
                raise ValidationError(f"g table has shape {gi.shape}, expected ({c}, {k})")
            if not np.isin(gi, (0, 1)).all():
                raise ValidationError("g tables must be 0/1")
        h.flags.writeable = False
        for gi in g:
            gi.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @property
    def n_hidden(self) -> int:
        return self.h.shape[1]


@dataclass(frozen=True)
class Verdict:
    """Outcome of an exact reconstruction check.  ``violation`` is the
    first failing (child_state, parent_configuration) in table order."""

    ok: bool
    violation: tuple[int, Config] | None = None

    def __bool__(self) -> bool:
        return self.ok


def level_sets(d: DeterministicFunction) -> dict[int, frozenset[Config]]:
    """Partition the parent configurations by child state; only states
    in the image of f appear."""
    sets: dict[int, set[Config]] = {}
    for cfg, y in zip(d.configurations(), d.outputs):
        sets.setdefault(y, set()).add(cfg)
    return {y: frozenset(s) for y, s in sorted(sets.items())}


def membership_tables(
    rectangles: Sequence[Hyperrectangle], parent_cards: Sequence[int]
) -> tuple[np.ndarray, ...]:
    """Per-parent 0/1 tables g[i][x, b] = [x in rectangle b's dim i]."""
    k = len(rectangles)
    g = []
    for i, c in enumerate(parent_cards):
        gi = np.zeros((c, k), dtype=np.int64)
        for b, r in enumerate(rectangles):
            for x in r.dims[i]:
                gi[x, b] = 1
        g.append(gi)
    return tuple(g)


def build_factorized_form(d: DeterministicFunction, base: Base) -> FactorizedForm:
    """Turn a verified base into explicit (h, g) tables.

    Every rectangle is checked against the parent cardinalities, every
    expression is evaluated (raising on an illegal difference or
    union), and each one must reproduce its level set exactly.
    """
    for r in base.rectangles:
        r.check_within(d.parent_cards)
    targets = level_sets(d)
    extra = set(base.expressions) - set(targets)
    if extra:
        raise ValidationError(
            f"expressions given for child states {sorted(extra)} outside the image of f"
        )
    missing = set(targets) - set(base.expressions)
    if missing:
        raise ValidationError(f"no expression for child states {sorted(missing)}")

    h = np.zeros((d.child_card, base.size), dtype=np.int64)
    for state, expr in base.expressions.items():
        denoted = evaluate_expression(expr, base.rectangles)
        if denoted != targets[state]:
            extra = sorted(denoted - targets[state])
            lacks = sorted(targets[state] - denoted)
            raise ValidationError(
                f"expression for child state {state} does not denote its level "
                f"set (spurious: {extra[:3]}, missing: {lacks[:3]})"
            )
        for idx, coeff in expr.signed_counts().items():
            h[state, idx] += coeff

    return FactorizedForm(
        d.parent_cards, d.child_card, h, membership_tables(base.rectangles, d.parent_cards)
    )


def verify_factorization(d: DeterministicFunction, form: FactorizedForm) -> Verdict:
    """Exactly compare sum_b h(y,b) prod_i g_i(x_i,b) with [y == f(x)]."""
    if form.parent_cards != d.parent_cards or form.child_card != d.child_card:
        raise ValidationError("factorized form does not match the function's shape")
    n = len(d.parent_cards)
    prod = np.ones((1,) * n + (form.n_hidden,), dtype=np.int64)
    for i, gi in enumerate(form.g):
        shape = [1] * n + [form.n_hidden]
        shape[i] = d.parent_cards[i]
        prod = prod * gi.reshape(shape)
    recon = np.tensordot(form.h, prod, axes=([1], [n]))  # (child, x1, ..., xn)

    indicator = np.zeros((d.child_card,) + d.parent_cards, dtype=np.int64)
    for cfg, y in zip(d.configurations(), d.outputs):
        indicator[(y,) + cfg] = 1

    mismatch = recon != indicator
    if not mismatch.any():
        return Verdict(True)
    first = np.argwhere(mismatch)[0]
    return Verdict(False, (int(first[0]), tuple(int(x) for x in first[1:])))


def trivial_factorization(d: DeterministicFunction) -> FactorizedForm:
    """One hidden state per parent configuration: always exact, never
    smaller than the table itself.  Useful as a correctness baseline."""
    cfgs = list(d.configurations())
    k = len(cfgs)
    h = np.zeros((d.child_card, k), dtype=np.int64)
    g = [np.zeros((c, k), dtype=np.int64) for c in d.parent_cards]
    for b, (cfg, y) in enumerate(zip(cfgs, d.outputs)):
        h[y, b] = 1
        for i, x in enumerate(cfg):
            g[i][x, b] = 1
    return FactorizedForm(d.parent_cards, d.child_card, h, tuple(g))


# ---------------------------------------------------------------------------
# Closed-form bases for common function shapes.


def known_base_conjunction(required: Sequence[int]) -> Base:
    """Base of size 2 for a conjunction of literals over binary parents.

    ``required`` is the single accepting configuration.  The base is
    the full space plus the one accepting point; the false level set is
    their proper difference.
    """
    required = tuple(int(r) for r in required)
    if not required:
        raise ValidationError("a conjunction needs at least one literal")
    if any(r not in (0, 1) for r in required):
        raise ValidationError("conjunction literals must be over binary parents")
    rects = (
        full_space([2] * len(required)),
        Hyperrectangle(tuple((r,) for r in required)),
    )
    point = Expression.rect(1)
    return Base(rects, {0: Expression.diff(Expression.rect(0), point), 1: point})


def known_base_max(parent_cards: Sequence[int]) -> Base:
    """Base of size s for MAX over n parents with a shared scale s.

    Rectangle k is the downset {0..k} in every dimension; level set k
    is the difference of consecutive downsets.
    """
    cards = tuple(int(c) for c in parent_cards)
    if not cards:
        raise ValidationError("MAX needs at least one parent")
    if len(set(cards)) != 1:
        raise ValidationError(f"MAX base needs one shared scale, got cardinalities {cards}")
    s = cards[0]
    rects = tuple(
        Hyperrectangle(tuple(tuple(range(k + 1)) for _ in cards)) for k in range(s)
    )
    exprs: dict[int, Expression] = {0: Expression.rect(0)}
    for k in range(1, s):
        exprs[k] = Expression.diff(Expression.rect(k), Expression.rect(k - 1))
    return Base(rects, exprs)
