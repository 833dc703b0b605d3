"""Exact inference by variable elimination, plus the two structural
transformations that shrink deterministic families: replacing a
deterministic node by its hidden-variable factorization, and parent
divorcing through a balanced tree of intermediates.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .core import Evidence, Factor, Variable, insert_evidence, marginalize, multiply
from .cliques import min_fill_order
from .errors import InternalConsistencyError, ValidationError, ZeroNormalizerError
from .factorization import FactorizedForm, verify_factorization
from .functions import (
    DeterministicFunction,
    as_conjunction,
    deterministic_to_potential,
    is_add,
    is_max,
)
from .network import Cpt, Network

NEGATIVE_TOLERANCE = 1e-9


def network_factors(net: Network, dtype=np.float64) -> list[Factor]:
    """All factors of the network: CPTs, deterministic indicators, and
    transformation potentials, cast to a common dtype."""
    factors = [
        Factor(c.factor.scope, c.factor.cards, c.factor.values.astype(dtype))
        for c in net.cpts
    ]
    for d in net.deterministic:
        ind = deterministic_to_potential(d)
        factors.append(Factor(ind.scope, ind.cards, ind.values.astype(dtype)))
    factors += [Factor(p.scope, p.cards, p.values.astype(dtype)) for p in net.potentials]
    return factors


def _validate_evidence(net: Network, evidence: Evidence) -> None:
    cards = net.cards
    for var, vec in evidence.findings.items():
        if not 0 <= var < len(cards):
            raise ValidationError(f"evidence names unknown variable id {var}")
        if len(vec) != cards[var]:
            raise ValidationError(
                f"evidence vector for variable {var} has length {len(vec)}, "
                f"expected {cards[var]}"
            )


def variable_elimination(
    net: Network,
    evidence: Evidence | None = None,
    query: Iterable[int] = (),
    order: Sequence[int] | None = None,
) -> Factor:
    """The normalized posterior over the query variables given evidence.

    Non-query variables are summed out in min-fill order (lowest id on
    ties) unless an explicit elimination ``order`` is supplied; the
    result is the same for any order, only the cost differs.  Raises
    ZeroNormalizerError when the evidence has zero mass and
    InternalConsistencyError if the unnormalized result dips below
    -1e-9 anywhere (values above that are clamped to 0).
    """
    evidence = evidence or Evidence()
    _validate_evidence(net, evidence)
    query = sorted(set(query))
    for q in query:
        if not 0 <= q < len(net.variables):
            raise ValidationError(f"query names unknown variable id {q}")
    if not query:
        raise ValidationError("query must name at least one variable")

    factors = [insert_evidence(f, evidence) for f in network_factors(net)]

    queryset = set(query)
    if order is None:
        adj: dict[int, set[int]] = {v.id: set() for v in net.variables}
        for f in factors:
            for a in f.scope:
                for b in f.scope:
                    if a != b:
                        adj[a].add(b)
        sub = {
            v: {u for u in nb if u not in queryset}
            for v, nb in adj.items()
            if v not in queryset
        }
        order, _ = min_fill_order(sub)
    else:
        order = list(order)
        expected = set(range(len(net.variables))) - queryset
        if set(order) != expected or len(order) != len(expected):
            raise ValidationError(
                "elimination order must cover each non-query variable exactly once"
            )

    pending = list(factors)
    for v in order:
        touching = [f for f in pending if v in f.scope]
        if not touching:
            continue
        pending = [f for f in pending if v not in f.scope]
        prod = touching[0]
        for f in touching[1:]:
            prod = multiply(prod, f)
        pending.append(marginalize(prod, v))

    result = pending[0]
    for f in pending[1:]:
        result = multiply(result, f)
    if set(result.scope) != set(query):
        raise InternalConsistencyError(
            f"elimination left scope {result.scope}, expected {tuple(query)}"
        )

    values = np.array(result.values, dtype=np.float64)
    low = values.min() if values.size else 0.0
    if low < -NEGATIVE_TOLERANCE:
        raise InternalConsistencyError(
            f"marginal entry {low} below tolerance {-NEGATIVE_TOLERANCE}"
        )
    values = np.clip(values, 0.0, None)
    total = values.sum()
    if total == 0.0:
        raise ZeroNormalizerError("evidence has zero probability under the model")
    return Factor(result.scope, result.cards, values / total)


def posterior_by_name(
    net: Network, evidence: Evidence | None, names: Sequence[str]
) -> Factor:
    return variable_elimination(
        net, evidence, [net.variable_by_name(n).id for n in names]
    )


# ---------------------------------------------------------------------------
# Transform 1: hidden-variable factorization of a deterministic node.


def apply_factorization_transform(
    net: Network, child: int, form: FactorizedForm
) -> Network:
    """Replace the deterministic node for ``child`` by its factorized
    potentials: one hidden variable B, one pairwise potential h(child, B),
    and one membership potential g_i(parent_i, B) per parent.

    The form is re-verified against the node before anything changes;
    posteriors over the original variables are preserved exactly.
    """
    det = net.deterministic_for(child)
    verdict = verify_factorization(det, form)
    if not verdict:
        raise ValidationError(
            f"factorized form fails reconstruction at {verdict.violation}"
        )
    b_id = len(net.variables)
    b_var = Variable(
        b_id,
        net.fresh_name(f"B_{net.variables[child].name}"),
        tuple(f"b{i}" for i in range(form.n_hidden)),
    )
    potentials = list(net.potentials)
    potentials.append(
        Factor((min(child, b_id), max(child, b_id)), (form.child_card, form.n_hidden),
               form.h.astype(np.float64))
    )
    for pid, g in zip(det.parents, form.g):
        potentials.append(
            Factor((pid, b_id), (g.shape[0], form.n_hidden), g.astype(np.float64))
        )
    return Network(
        net.variables + (b_var,),
        net.cpts,
        tuple(d for d in net.deterministic if d.child != child),
        tuple(potentials),
    )


# ---------------------------------------------------------------------------
# Transform 2: parent divorcing for decomposable functions.


def _pair_function(kind: str, meta_u, meta_v, cards, child_card=None):
    """Build the two-parent combiner table for one divorcing step.

    meta entries are (variable id, detail): the accepting state for a
    conjunction, None for add/max where the state is the value.
    Returns (outputs, output cardinality).
    """
    (u, du), (v, dv) = meta_u, meta_v
    cu, cv = cards[u], cards[v]
    if kind == "and":
        outputs = [1 if (a == du and b == dv) else 0 for a in range(cu) for b in range(cv)]
        return outputs, 2
    if kind == "add":
        out_card = child_card if child_card is not None else (cu - 1) + (cv - 1) + 1
        outputs = [a + b for a in range(cu) for b in range(cv)]
        return outputs, out_card
    out_card = child_card if child_card is not None else max(cu, cv)
    outputs = [max(a, b) for a in range(cu) for b in range(cv)]
    return outputs, out_card


def parent_divorcing_transform(net: Network, child: int) -> Network:
    """Split a decomposable deterministic node (conjunction of literals,
    ADD, or MAX) into a balanced tree of two-parent intermediates.

    Intermediate variables carry partial results (partial sums for ADD,
    running maxima for MAX, truth of a literal block for conjunctions).
    Functions of at most two parents are returned unchanged.  The joint
    over the original variables is preserved exactly.
    """
    det = net.deterministic_for(child)
    conj = as_conjunction(det)
    if conj is not None:
        kind = "and"
        slots = [(p, s) for p, s in zip(det.parents, conj)]
    elif is_add(det):
        kind = "add"
        slots = [(p, None) for p in det.parents]
    elif is_max(det):
        kind = "max"
        slots = [(p, None) for p in det.parents]
    else:
        raise ValidationError(
            f"deterministic node for variable {child} is not a recognized "
            "decomposable function (conjunction of literals, ADD, MAX)"
        )
    if len(slots) <= 2:
        return net

    variables = list(net.variables)
    cards = {v.id: v.card for v in net.variables}
    new_dets: list[DeterministicFunction] = []
    stem = net.variables[child].name
    taken = {v.name for v in variables}

    def fresh(i: int) -> str:
        name = f"{stem}_pd{i}"
        j = 2
        while name in taken:
            name = f"{stem}_pd{i}_{j}"
            j += 1
        taken.add(name)
        return name

    counter = 0
    while len(slots) > 2:
        nxt = []
        for i in range(0, len(slots) - 1, 2):
            u, v = slots[i], slots[i + 1]
            outputs, out_card = _pair_function(kind, u, v, cards)
            z_id = len(variables)
            variables.append(
                Variable(z_id, fresh(counter), tuple(f"s{t}" for t in range(out_card)))
            )
            counter += 1
            cards[z_id] = out_card
            new_dets.append(
                DeterministicFunction(
                    (u[0], v[0]), z_id, (cards[u[0]], cards[v[0]]), out_card,
                    tuple(outputs),
                )
            )
            nxt.append((z_id, 1 if kind == "and" else None))
        if len(slots) % 2 == 1:
            nxt.append(slots[-1])
        slots = nxt

    outputs, _ = _pair_function(kind, slots[0], slots[1], cards, child_card=det.child_card)
    new_dets.append(
        DeterministicFunction(
            (slots[0][0], slots[1][0]), child,
            (cards[slots[0][0]], cards[slots[1][0]]), det.child_card, tuple(outputs),
        )
    )
    return Network(
        tuple(variables),
        net.cpts,
        tuple(d for d in net.deterministic if d.child != child) + tuple(new_dets),
        net.potentials,
    )


# ---------------------------------------------------------------------------
# Whole-network transform driver shared by the CLI and the benchmark.


def transform_network(net: Network, method: str, base_picker=None) -> Network:
    """Apply one method to every deterministic node of the network.

    ``none`` returns the network unchanged; ``divorce`` divorces every
    decomposable deterministic node; ``factorize`` replaces each
    deterministic node using a base from ``base_picker(det)`` (defaults
    to :func:`default_base` below).
    """
    if method == "none":
        return net
    if method == "divorce":
        out = net
        for det in net.deterministic:
            out = parent_divorcing_transform(out, det.child)
        return out
    if method == "factorize":
        from .factorization import build_factorized_form

        picker = base_picker or default_base
        out = net
        for det in net.deterministic:
            node = out.deterministic_for(det.child)
            form = build_factorized_form(node, picker(node))
            out = apply_factorization_transform(out, det.child, form)
        return out
    raise ValidationError(f"unknown transform {method!r}")


def default_base(det: DeterministicFunction):
    """A base for a deterministic node: closed forms for conjunctions
    and MAX, otherwise a greedy per-level cover.

    The greedy cover is always verified and fast; it is not minimal in
    general.  Callers who want a proved-minimal base should run
    ``solve_mbh`` themselves and pass the result through the
    ``base_picker`` hook of :func:`transform_network`.
    """
    from .factorization import known_base_conjunction, known_base_max
    from .mbh import greedy_cover_base

    conj = as_conjunction(det)
    if conj is not None:
        return known_base_conjunction(conj)
    if is_max(det) and len(set(det.parent_cards)) == 1:
        return known_base_max(det.parent_cards)
    return greedy_cover_base(det)
