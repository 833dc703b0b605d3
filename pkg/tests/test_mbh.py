"""Minimal-base search: enumeration, generability, the solver.

Core claims:
    - rectangle enumeration counts (2^c - 1) per dimension, in a fixed
      canonical order, and refuses oversized spaces by naming the count
    - can_generate returns a verifiable witness, None only for truly
      ungeneratable targets, and a budget error when capped; all three
      are cross-checked against an independent brute-force closure
    - solve_mbh proves minimality on small worked functions (binary
      ADD = 3, checked against an exhaustive subset oracle; ternary
      ADD = 6; the 3-rectangle Boolean cover; AND = 2; MAX = scale)
    - budget caps degrade to a verified-but-unproved answer instead of
      failing, except when the candidate pool itself is out of reach
    - results are deterministic across repeated runs
"""

import random
from itertools import combinations

import numpy as np
import pytest

from factorbn import (
    BudgetExceededError,
    DeterministicFunction,
    Hyperrectangle,
    SearchBudget,
    build_factorized_form,
    can_generate,
    enumerate_rectangles,
    evaluate_expression,
    format_expression,
    function_from_formula,
    greedy_cover_base,
    known_base_max,
    solve_mbh,
    target_sets,
    verify_factorization,
)


def mk(cards, fn, child_card):
    n = len(cards)
    return DeterministicFunction.from_callable(
        tuple(range(n)), n, tuple(cards), child_card, fn
    )


# -- enumeration -------------------------------------------------------------


def test_enumeration_counts():
    assert len(enumerate_rectangles((2,))) == 3
    assert len(enumerate_rectangles((2, 2))) == 9
    assert len(enumerate_rectangles((3, 3))) == 49
    assert len(enumerate_rectangles((2, 3, 2))) == 3 * 7 * 3


def test_enumeration_order_is_lexicographic():
    rects = enumerate_rectangles((3,))
    assert [r.dims[0] for r in rects] == [
        (0,),
        (0, 1),
        (0, 1, 2),
        (0, 2),
        (1,),
        (1, 2),
        (2,),
    ]
    pairs = enumerate_rectangles((2, 2))
    assert pairs[0].dims == ((0,), (0,))
    assert pairs[1].dims == ((0,), (0, 1))
    assert pairs[-1].dims == ((1,), (1,))
    assert [r.dims for r in pairs] == sorted(r.dims for r in pairs)


def test_enumeration_budget_names_count():
    with pytest.raises(BudgetExceededError) as exc:
        enumerate_rectangles((4, 4, 4, 4), SearchBudget(max_rectangles=10_000))
    assert exc.value.count == 50625
    assert "50625" in str(exc.value)


# -- an independent closure oracle -------------------------------------------


def brute_force_closure(rect_sets, max_leaves):
    """Every set value generatable with at most max_leaves leaves,
    using plain set arithmetic and no search-code shortcuts."""
    layers = {1: set(frozenset(s) for s in rect_sets)}
    for n in range(2, max_leaves + 1):
        out = set()
        for i in range(1, n // 2 + 1):
            j = n - i
            for a in layers.get(i, ()):
                for b in layers.get(j, ()):
                    if not (a & b):
                        out.add(a | b)
                    if b <= a:
                        out.add(a - b)
                    if a <= b:
                        out.add(b - a)
        layers[n] = out
    reachable = set()
    for vals in layers.values():
        reachable |= vals
    return reachable


def test_can_generate_agrees_with_brute_force():
    # 2x3 grid, four rectangles, every subset of the space as a target
    rects = (
        Hyperrectangle(((0,), (0, 1))),
        Hyperrectangle(((0, 1), (1, 2))),
        Hyperrectangle(((1,), (2,))),
        Hyperrectangle(((0, 1), (0, 1, 2))),
    )
    cells = sorted(rects[3].points())
    rect_sets = [frozenset(r.points()) for r in rects]
    reachable7 = brute_force_closure(rect_sets, 7)
    checked_none = checked_hit = 0
    for bits in range(1, 1 << len(cells)):
        target = frozenset(c for i, c in enumerate(cells) if (bits >> i) & 1)
        witness = can_generate(target, rects, (2, 3))
        if witness is None:
            assert target not in reachable7
            checked_none += 1
        else:
            denoted = evaluate_expression(witness, rects)
            assert denoted == target
            leaves = len(witness.leaves())
            if leaves <= 7:
                assert target in reachable7
            checked_hit += 1
    assert checked_hit >= 10 and checked_none >= 10


def test_can_generate_worked_difference_chain():
    rects = (
        Hyperrectangle(((1, 2), (1, 2))),
        Hyperrectangle(((1,), (1,))),
        Hyperrectangle(((2,), (2,))),
    )
    w = can_generate(frozenset({(1, 2), (2, 1)}), rects, (3, 3))
    assert w is not None
    assert evaluate_expression(w, rects) == {(1, 2), (2, 1)}
    assert len(w.leaves()) == 3


def test_can_generate_none_vs_budget_are_distinct():
    rects = (
        Hyperrectangle(((1, 2), (1, 2))),
        Hyperrectangle(((1,), (1,))),
        Hyperrectangle(((2,), (2,))),
    )
    assert can_generate(frozenset({(0, 1)}), rects, (3, 3)) is None
    with pytest.raises(BudgetExceededError) as exc:
        can_generate(
            frozenset({(1, 2), (2, 1)}),
            rects,
            (3, 3),
            SearchBudget(max_closure=2),
        )
    assert exc.value.kind == "closure"


# -- the solver on worked functions ------------------------------------------


def exhaustive_min_base_size(d):
    """Smallest feasible subset size by brute force: every subset of
    every size, feasibility by fixpoint closure over set values."""
    rects = enumerate_rectangles(d.parent_cards)
    rect_sets = [frozenset(r.points()) for r in rects]
    levels = [frozenset(v) for v in target_sets(d).values()]

    def closure(seed):
        vals = set(seed)
        grew = True
        while grew:
            grew = False
            for a in list(vals):
                for b in list(vals):
                    for c in (
                        (a | b) if not (a & b) else None,
                        (a - b) if b <= a else None,
                    ):
                        if c is not None and c not in vals:
                            vals.add(c)
                            grew = True
        return vals

    for k in range(1, len(rects) + 1):
        for subset in combinations(range(len(rects)), k):
            vals = closure(rect_sets[i] for i in subset)
            if all(lv in vals for lv in levels):
                return k
    raise AssertionError("no base found at all")


def test_binary_add_minimum_is_three_with_oracle():
    d = mk((2, 2), lambda a, b: a + b, 3)
    sol = solve_mbh(d)
    assert sol.base.size == 3
    assert sol.proved_minimal
    assert bool(verify_factorization(d, build_factorized_form(d, sol.base)))
    assert exhaustive_min_base_size(d) == 3
    # three level sets force at least three rectangles
    assert len(target_sets(d)) == 3


def test_ternary_add_minimum_is_six():
    d = mk((3, 3), lambda a, b: a + b, 5)
    sol = solve_mbh(d)
    assert sol.base.size == 6
    assert sol.proved_minimal
    assert not sol.stats.budget_exhausted
    assert bool(verify_factorization(d, build_factorized_form(d, sol.base)))
    assert sol.stats.elapsed_seconds < 60


def test_boolean_example_minimum_is_three():
    d = function_from_formula(
        (0, 1, 2), 3, (2, 2, 2), ["X1", "X2", "X3"], "(X1 | X2) => (X2 & X3)"
    )
    sol = solve_mbh(d)
    assert sol.base.size == 3
    assert sol.proved_minimal
    dims = {r.dims for r in sol.base.rectangles}
    assert Hyperrectangle(((0,), (0,), (0, 1))).dims in dims
    assert Hyperrectangle(((0, 1), (1,), (1,))).dims in dims


def test_conjunction_minimum_is_two():
    d = mk((2,) * 5, lambda *x: int(all(x)), 2)
    sol = solve_mbh(d)
    assert sol.base.size == 2
    assert sol.proved_minimal


def test_max_solution_no_larger_than_closed_base():
    d = mk((3, 3, 3), lambda *x: max(x), 3)
    sol = solve_mbh(d)
    assert sol.proved_minimal
    assert sol.base.size <= known_base_max((3, 3, 3)).size


def test_constant_function_single_rectangle():
    d = mk((2, 2), lambda a, b: 1, 3)
    sol = solve_mbh(d)
    assert sol.base.size == 1
    assert sol.proved_minimal
    assert sol.base.rectangles[0].dims == ((0, 1), (0, 1))


# -- budgets and degradation -------------------------------------------------


def test_rectangle_cap_propagates_with_best_effort_answer():
    d = mk((4, 4, 4, 4), lambda *x: sum(x), 13)
    with pytest.raises(BudgetExceededError) as exc:
        solve_mbh(d, SearchBudget(max_rectangles=10))
    assert exc.value.count == 50625
    assert exc.value.best is not None
    assert not exc.value.best.proved_minimal
    assert bool(
        verify_factorization(d, build_factorized_form(d, exc.value.best.base))
    )


def test_closure_cap_returns_unproved_base():
    d = mk((3, 3), lambda a, b: a + b, 5)
    sol = solve_mbh(d, SearchBudget(max_closure=2))
    assert bool(verify_factorization(d, build_factorized_form(d, sol.base)))
    assert not sol.proved_minimal
    assert sol.stats.budget_exhausted


def test_wall_clock_cap_returns_unproved_base():
    d = mk((3, 3), lambda a, b: a + b, 5)
    sol = solve_mbh(d, SearchBudget(wall_clock=1e-9))
    assert bool(verify_factorization(d, build_factorized_form(d, sol.base)))
    assert not sol.proved_minimal
    assert sol.stats.budget_exhausted


def test_max_base_cap_returns_unproved_base():
    d = mk((3, 3), lambda a, b: a + b, 5)
    sol = solve_mbh(d, SearchBudget(max_base=4))
    assert not sol.proved_minimal
    assert sol.stats.budget_exhausted


def test_stats_are_populated():
    d = mk((3, 3), lambda a, b: a + b, 5)
    sol = solve_mbh(d)
    s = sol.stats
    assert s.rectangles_enumerated == 49
    assert s.subsets_checked >= 1
    assert s.nodes_expanded >= 1
    assert s.elapsed_seconds >= 0.0
    assert not s.budget_exhausted


def test_solver_deterministic_across_runs():
    d = mk((3, 3), lambda a, b: a + b, 5)
    a = solve_mbh(d)
    b = solve_mbh(d)
    assert a.base == b.base
    assert a.proved_minimal == b.proved_minimal
    assert [format_expression(e) for e in a.base.expressions.values()] == [
        format_expression(e) for e in b.base.expressions.values()
    ]


# -- greedy cover ------------------------------------------------------------


def test_greedy_cover_always_verifies():
    rng = random.Random(9)
    for _ in range(40):
        n = rng.randint(1, 3)
        cards = tuple(rng.randint(2, 3) for _ in range(n))
        size = 1
        for c in cards:
            size *= c
        cc = rng.randint(2, 4)
        outputs = tuple(rng.randrange(cc) for _ in range(size))
        d = DeterministicFunction(tuple(range(n)), n, cards, cc, outputs)
        base = greedy_cover_base(d)
        assert bool(verify_factorization(d, build_factorized_form(d, base)))


def test_greedy_cover_no_duplicate_rectangles():
    d = mk((2, 2), lambda a, b: a ^ b, 2)
    base = greedy_cover_base(d)
    assert len({r.dims for r in base.rectangles}) == base.size
