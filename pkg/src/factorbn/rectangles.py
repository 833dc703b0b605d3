"""Hyperrectangles over a configuration space and the two-operator set
algebra (proper difference, disjunctive union) used to express level
sets in terms of a rectangle base."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterable, Mapping, Sequence

from .errors import IllegalExpressionError, ParseError, ValidationError

Config = tuple[int, ...]


@dataclass(frozen=True)
class Hyperrectangle:
    """A product of per-dimension state subsets: D1 x D2 x ... x Dn.

    Each ``dims`` entry is a non-empty, strictly ascending tuple of
    state indices for one parent.
    """

    dims: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        dims = tuple(tuple(int(x) for x in d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise ValidationError("a hyperrectangle needs at least one dimension")
        for d in dims:
            if not d:
                raise ValidationError("every dimension subset must be non-empty")
            if list(d) != sorted(set(d)) or d[0] < 0:
                raise ValidationError(
                    f"dimension subset must be strictly ascending non-negative, got {d}"
                )

    @property
    def n_dims(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        n = 1
        for d in self.dims:
            n *= len(d)
        return n

    def contains(self, config: Sequence[int]) -> bool:
        return all(x in d for x, d in zip(config, self.dims))

    def points(self) -> Iterable[Config]:
        return iproduct(*self.dims)

    def check_within(self, cards: Sequence[int]) -> None:
        if len(cards) != len(self.dims):
            raise ValidationError(
                f"rectangle has {len(self.dims)} dimensions, space has {len(cards)}"
            )
        for d, c in zip(self.dims, cards):
            if d[-1] >= c:
                raise ValidationError(f"state {d[-1]} outside cardinality {c}")


def full_space(cards: Sequence[int]) -> Hyperrectangle:
    """The rectangle covering every configuration."""
    return Hyperrectangle(tuple(tuple(range(c)) for c in cards))


@dataclass(frozen=True)
class Expression:
    """A binary tree over rectangle leaves.

    ``kind`` is ``"rect"`` (leaf; ``index`` points into a rectangle
    list), ``"diff"`` (proper difference: left must contain right), or
    ``"union"`` (disjunctive union: operands must be disjoint).
    """

    kind: str
    index: int | None = None
    left: "Expression | None" = None
    right: "Expression | None" = None

    def __post_init__(self):
        if self.kind == "rect":
            if self.index is None or self.index < 0 or self.left or self.right:
                raise ValidationError("malformed rectangle leaf")
        elif self.kind in ("diff", "union"):
            if self.left is None or self.right is None or self.index is not None:
                raise ValidationError(f"{self.kind} node needs two children")
        else:
            raise ValidationError(f"unknown expression kind {self.kind!r}")

    @staticmethod
    def rect(index: int) -> "Expression":
        return Expression("rect", index=index)

    @staticmethod
    def diff(left: "Expression", right: "Expression") -> "Expression":
        return Expression("diff", left=left, right=right)

    @staticmethod
    def union(left: "Expression", right: "Expression") -> "Expression":
        return Expression("union", left=left, right=right)

    def leaves(self) -> tuple[int, ...]:
        """Rectangle indices in leaf order, repeats kept."""
        if self.kind == "rect":
            return (self.index,)
        return self.left.leaves() + self.right.leaves()

    def signed_counts(self) -> dict[int, int]:
        """Net coefficient of each rectangle index: +1 at the root, both
        signs kept by a union, the right operand of a difference flipped."""
        counts: dict[int, int] = {}

        def walk(node: Expression, sign: int) -> None:
            if node.kind == "rect":
                counts[node.index] = counts.get(node.index, 0) + sign
            elif node.kind == "union":
                walk(node.left, sign)
                walk(node.right, sign)
            else:
                walk(node.left, sign)
                walk(node.right, -sign)

        walk(self, 1)
        return counts


def evaluate_expression(
    expr: Expression, rectangles: Sequence[Hyperrectangle]
) -> frozenset[Config]:
    """The configuration set an expression denotes.

    Raises IllegalExpressionError when a difference's operands are not
    nested (left must contain right) or a union's operands overlap.
    """
    if expr.kind == "rect":
        if expr.index >= len(rectangles):
            raise ValidationError(f"rectangle index {expr.index} out of range")
        return frozenset(rectangles[expr.index].points())
    left = evaluate_expression(expr.left, rectangles)
    right = evaluate_expression(expr.right, rectangles)
    if expr.kind == "diff":
        if not right <= left:
            raise IllegalExpressionError(
                "ILLEGAL_DIFFERENCE", "right operand is not contained in the left"
            )
        return left - right
    if left & right:
        raise IllegalExpressionError("ILLEGAL_UNION", "operands of a union overlap")
    return left | right


@dataclass(frozen=True)
class Base:
    """A list of rectangles plus one expression per child state in the
    image of the function, mapping that state's level set onto the
    rectangle algebra."""

    rectangles: tuple[Hyperrectangle, ...]
    expressions: Mapping[int, Expression]

    def __post_init__(self):
        object.__setattr__(self, "rectangles", tuple(self.rectangles))
        object.__setattr__(
            self, "expressions", dict(sorted(dict(self.expressions).items()))
        )
        if not self.rectangles:
            raise ValidationError("a base needs at least one rectangle")
        n = self.rectangles[0].n_dims
        for r in self.rectangles:
            if r.n_dims != n:
                raise ValidationError("all base rectangles must share the dimension count")
        if len({r.dims for r in self.rectangles}) != len(self.rectangles):
            raise ValidationError("duplicate rectangle in base")
        for state, expr in self.expressions.items():
            if state < 0:
                raise ValidationError(f"negative child state {state}")
            for leaf in expr.leaves():
                if leaf >= len(self.rectangles):
                    raise ValidationError(
                        f"expression for state {state} references rectangle {leaf + 1}, "
                        f"but the base has only {len(self.rectangles)}"
                    )

    @property
    def size(self) -> int:
        return len(self.rectangles)


# ---------------------------------------------------------------------------
# Textual expression form: prefix notation with 1-based rectangle leaves,
# e.g. "(- (- R2 R4) R5)".  "-" is the proper difference, "+" the
# disjunctive union.


def format_expression(expr: Expression) -> str:
    if expr.kind == "rect":
        return f"R{expr.index + 1}"
    op = "-" if expr.kind == "diff" else "+"
    return f"({op} {format_expression(expr.left)} {format_expression(expr.right)})"


def parse_expression(text: str) -> Expression:
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def parse() -> Expression:
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens) or tokens[pos] not in ("-", "+"):
                raise ParseError(f"expected an operator after '(' in {text!r}")
            op = tokens[pos]
            pos += 1
            left = parse()
            right = parse()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise ParseError(f"missing ')' in {text!r}")
            pos += 1
            return Expression.diff(left, right) if op == "-" else Expression.union(left, right)
        if tok.startswith("R") and tok[1:].isdigit() and int(tok[1:]) >= 1:
            return Expression.rect(int(tok[1:]) - 1)
        raise ParseError(f"unexpected token {tok!r} in expression {text!r}")

    expr = parse()
    if pos != len(tokens):
        raise ParseError(f"trailing tokens in expression {text!r}")
    return expr
