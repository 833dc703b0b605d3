"""Moralization, min-fill triangulation, and clique-size accounting.

The cost proxy for exact inference is the total clique size of the
triangulated interaction graph: the sum over maximal cliques of the
product of member cardinalities.  Factors contribute their whole scope
as a clique (for CPTs and deterministic nodes this is the family, i.e.
moralization; transformation potentials contribute their own scopes).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import ValidationError
from .network import Network

MIN_FILL = "min-fill"


@dataclass(frozen=True)
class CliqueReport:
    """Elimination order, the maximal cliques it induces, per-variable
    cardinalities, and the total clique size."""

    elimination_order: tuple[int, ...]
    cliques: tuple[tuple[int, ...], ...]
    cardinalities: tuple[int, ...]
    total: int

    def clique_sizes(self) -> tuple[int, ...]:
        sizes = []
        for clique in self.cliques:
            n = 1
            for v in clique:
                n *= self.cardinalities[v]
            sizes.append(n)
        return tuple(sizes)

    @property
    def max_clique_size(self) -> int:
        return max(self.clique_sizes())


def factor_scopes(net: Network) -> list[tuple[int, ...]]:
    """The scope of every factor in the network, families included."""
    scopes = [tuple(sorted(c.parents + (c.child,))) for c in net.cpts]
    scopes += [tuple(sorted(d.parents + (d.child,))) for d in net.deterministic]
    scopes += [p.scope for p in net.potentials]
    return scopes


def interaction_graph(net: Network) -> dict[int, set[int]]:
    """Adjacency over variable ids: each factor scope becomes a clique."""
    adj: dict[int, set[int]] = {v.id: set() for v in net.variables}
    for scope in factor_scopes(net):
        for a, b in combinations(scope, 2):
            adj[a].add(b)
            adj[b].add(a)
    return adj


def min_fill_order(adj: dict[int, set[int]]) -> tuple[tuple[int, ...], list[set[int]]]:
    """Eliminate the vertex adding the fewest fill edges, lowest id on
    ties.  Returns the order and the elimination clique of each step."""
    work = {v: set(nb) for v, nb in adj.items()}
    order: list[int] = []
    cliques: list[set[int]] = []
    while work:
        best_v, best_fill = None, None
        for v in sorted(work):
            nbrs = work[v]
            fill = sum(
                1 for a, b in combinations(sorted(nbrs), 2) if b not in work[a]
            )
            if best_fill is None or fill < best_fill:
                best_v, best_fill = v, fill
        nbrs = work[best_v]
        cliques.append({best_v} | nbrs)
        for a, b in combinations(sorted(nbrs), 2):
            work[a].add(b)
            work[b].add(a)
        for u in nbrs:
            work[u].discard(best_v)
        del work[best_v]
        order.append(best_v)
    return tuple(order), cliques


def moralize_and_triangulate(net: Network, heuristic: str = MIN_FILL) -> CliqueReport:
    """Triangulate the interaction graph and report the maximal cliques.

    Elimination cliques that are subsets of another are dropped, so the
    total counts each maximal clique once.
    """
    if heuristic != MIN_FILL:
        raise ValidationError(f"unsupported heuristic {heuristic!r}")
    adj = interaction_graph(net)
    order, raw = min_fill_order(adj)
    maximal: list[set[int]] = []
    for c in raw:
        if any(c <= other for other in maximal):
            continue
        maximal = [m for m in maximal if not m <= c]
        maximal.append(c)
    cards = net.cards
    cliques = tuple(sorted(tuple(sorted(c)) for c in maximal))
    total = 0
    for c in cliques:
        size = 1
        for v in c:
            size *= cards[v]
        total += size
    return CliqueReport(order, cliques, cards, total)


def total_clique_size(report: CliqueReport) -> int:
    """Recompute the sum of clique state-space sizes from the report."""
    total = 0
    for c in report.cliques:
        size = 1
        for v in c:
            size *= report.cardinalities[v]
        total += size
    return total
