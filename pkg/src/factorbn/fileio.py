"""JSON file formats: networks, evidence, standalone functions,
rectangle bases, and factorized forms.

All writers emit sorted keys with two-space indentation and a trailing
newline, so equal objects serialize to identical bytes.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .core import Evidence, Factor, Variable
from .errors import ParseError, ValidationError
from .factorization import FactorizedForm
from .functions import DeterministicFunction, function_from_formula
from .network import Cpt, Network
from .rectangles import Base, Expression, Hyperrectangle, format_expression, parse_expression


def _loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from e


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _expect(obj: Any, key: str, where: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing {key!r} in {where}")
    return obj[key]


# ---------------------------------------------------------------------------
# Networks.


def _parse_function_field(fn: Any, parents, child, cards, names, where: str):
    ftype = _expect(fn, "type", where)
    if ftype == "table":
        outputs = _expect(fn, "outputs", where)
        return DeterministicFunction(
            tuple(parents), child, tuple(cards[p] for p in parents), cards[child],
            tuple(outputs),
        )
    if ftype == "formula":
        expr = _expect(fn, "expr", where)
        if cards[child] != 2:
            raise ValidationError(f"{where}: a formula-defined child must be binary")
        return function_from_formula(
            parents, child, [cards[p] for p in parents], [names[p] for p in parents], expr
        )
    raise ParseError(f"unknown function type {ftype!r} in {where}")


def parse_network(text: str) -> Network:
    doc = _loads(text)
    raw_vars = _expect(doc, "variables", "network")
    variables = []
    for rv in raw_vars:
        variables.append(
            Variable(
                int(_expect(rv, "id", "variable")),
                str(_expect(rv, "name", "variable")),
                tuple(str(s) for s in _expect(rv, "states", "variable")),
            )
        )
    by_position = {v.id: v for v in variables}
    cards = {v.id: v.card for v in variables}
    names = {v.id: v.name for v in variables}
    if len(by_position) != len(variables):
        raise ValidationError("duplicate variable ids")

    cpts = []
    for rc in doc.get("cpts", []):
        child = int(_expect(rc, "child", "cpt"))
        parents = tuple(int(p) for p in rc.get("parents", []))
        table = _expect(rc, "table", "cpt")
        family = tuple(sorted(parents + (child,)))
        unknown = [v for v in family if v not in cards]
        if unknown:
            raise ValidationError(f"unknown variable id {unknown[0]} in a CPT")
        fam_cards = tuple(cards[v] for v in family)
        expected = int(np.prod(fam_cards, dtype=np.int64))
        if len(table) != expected:
            raise ValidationError(
                f"CPT table for variable {child} has {len(table)} entries, expected {expected}"
            )
        cpts.append(Cpt(child, parents, Factor.from_flat(family, fam_cards, table)))

    dets = []
    for rd in doc.get("deterministic", []):
        child = int(_expect(rd, "child", "deterministic node"))
        parents = tuple(int(p) for p in _expect(rd, "parents", "deterministic node"))
        unknown = [v for v in parents + (child,) if v not in cards]
        if unknown:
            raise ValidationError(f"unknown variable id {unknown[0]} in a deterministic node")
        dets.append(
            _parse_function_field(
                _expect(rd, "function", "deterministic node"),
                parents, child, cards, names, f"deterministic node for variable {child}",
            )
        )

    potentials = []
    for rp in doc.get("potentials", []):
        scope = tuple(int(v) for v in _expect(rp, "scope", "potential"))
        unknown = [v for v in scope if v not in cards]
        if unknown:
            raise ValidationError(f"unknown variable id {unknown[0]} in a potential")
        pot_cards = tuple(cards[v] for v in scope)
        potentials.append(Factor.from_flat(scope, pot_cards, _expect(rp, "table", "potential")))

    return Network(tuple(variables), tuple(cpts), tuple(dets), tuple(potentials))


def write_network(net: Network) -> str:
    doc: dict[str, Any] = {
        "variables": [
            {"id": v.id, "name": v.name, "states": list(v.states)} for v in net.variables
        ],
        "cpts": [
            {"child": c.child, "parents": sorted(c.parents), "table": c.factor.flat().tolist()}
            for c in net.cpts
        ],
        "deterministic": [
            {
                "child": d.child,
                "parents": list(d.parents),
                "function": (
                    {"type": "formula", "expr": d.formula}
                    if d.formula is not None
                    else {"type": "table", "outputs": list(d.outputs)}
                ),
            }
            for d in net.deterministic
        ],
    }
    if net.potentials:
        doc["potentials"] = [
            {"scope": list(p.scope), "table": p.flat().tolist()} for p in net.potentials
        ]
    return _dumps(doc)


# ---------------------------------------------------------------------------
# Evidence: a name -> 0/1 state-vector mapping.


def parse_evidence(text: str, net: Network) -> Evidence:
    doc = _loads(text)
    if not isinstance(doc, dict):
        raise ParseError("evidence file must be a JSON object")
    findings = {}
    for name, vec in doc.items():
        var = net.variable_by_name(name)
        if not isinstance(vec, list):
            raise ValidationError(f"evidence for {name!r} must be a list of 0/1")
        if len(vec) != var.card:
            raise ValidationError(
                f"evidence vector for {name!r} has length {len(vec)}, "
                f"expected {var.card}"
            )
        findings[var.id] = tuple(int(x) for x in vec)
    return Evidence(findings)


def write_evidence(evidence: Evidence, net: Network) -> str:
    return _dumps(
        {net.variables[v].name: list(vec) for v, vec in sorted(evidence.findings.items())}
    )


# ---------------------------------------------------------------------------
# Standalone functions, for the factorize/mbh entry points.  Parent and
# child declarations carry either a state list or a bare cardinality.


def _card_of(decl: Any, where: str) -> int:
    if "states" in decl:
        return len(decl["states"])
    if "card" in decl:
        return int(decl["card"])
    raise ParseError(f"{where} needs either 'states' or 'card'")


def parse_function(text: str) -> DeterministicFunction:
    doc = _loads(text)
    raw_parents = _expect(doc, "parents", "function file")
    child_decl = _expect(doc, "child", "function file")
    n = len(raw_parents)
    if n == 0:
        raise ValidationError("function file declares no parents")
    cards = {i: _card_of(rp, f"parent {i}") for i, rp in enumerate(raw_parents)}
    cards[n] = _card_of(child_decl, "child")
    names = {i: str(_expect(rp, "name", "parent")) for i, rp in enumerate(raw_parents)}
    names[n] = str(child_decl.get("name", "Y"))
    return _parse_function_field(
        _expect(doc, "function", "function file"),
        list(range(n)), n, cards, names, "function file",
    )


def write_function(d: DeterministicFunction, names: list[str] | None = None) -> str:
    if names is None:
        names = [f"X{i + 1}" for i in range(d.n_parents)] + ["Y"]
    doc = {
        "parents": [
            {"name": names[i], "card": c} for i, c in enumerate(d.parent_cards)
        ],
        "child": {"name": names[-1], "card": d.child_card},
        "function": (
            {"type": "formula", "expr": d.formula}
            if d.formula is not None
            else {"type": "table", "outputs": list(d.outputs)}
        ),
    }
    return _dumps(doc)


# ---------------------------------------------------------------------------
# Bases: rectangles as per-dimension state lists, expressions in prefix
# notation with 1-based leaves ("R1"), "-" for the proper difference and
# "+" for the disjunctive union.


def parse_base(text: str) -> Base:
    doc = _loads(text)
    rects = tuple(
        Hyperrectangle(tuple(tuple(int(x) for x in dim) for dim in r))
        for r in _expect(doc, "rectangles", "base file")
    )
    exprs: dict[int, Expression] = {}
    for state, s in _expect(doc, "expressions", "base file").items():
        exprs[int(state)] = parse_expression(s)
    return Base(rects, exprs)


def write_base(base: Base, extra: dict[str, Any] | None = None) -> str:
    doc: dict[str, Any] = {
        "rectangles": [[list(dim) for dim in r.dims] for r in base.rectangles],
        "expressions": {
            str(state): format_expression(e) for state, e in base.expressions.items()
        },
    }
    if extra:
        doc.update(extra)
    return _dumps(doc)


# ---------------------------------------------------------------------------
# Factorized forms: the explicit integer h and g tables.


def parse_form(text: str) -> FactorizedForm:
    doc = _loads(text)
    return FactorizedForm(
        tuple(int(c) for c in _expect(doc, "parent_cards", "form file")),
        int(_expect(doc, "child_card", "form file")),
        np.asarray(_expect(doc, "h", "form file"), dtype=np.int64),
        tuple(np.asarray(g, dtype=np.int64) for g in _expect(doc, "g", "form file")),
    )


def write_form(form: FactorizedForm) -> str:
    return _dumps(
        {
            "parent_cards": list(form.parent_cards),
            "child_card": form.child_card,
            "n_hidden": form.n_hidden,
            "h": form.h.tolist(),
            "g": [g.tolist() for g in form.g],
        }
    )
