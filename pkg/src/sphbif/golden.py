"""Reference coefficient tables and an exact expression reader for them.

Coefficients are stored as arithmetic strings over ``pi``, ``sqrt`` and
integers (for example ``"sqrt(15/(2*pi))*A/(965888*Q**2)"``) and are parsed
with a whitelisting :mod:`ast` walker into :class:`~.coeff.ExactCoeff`.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass
from importlib import resources
from typing import Mapping

from .coeff import PI, ExactCoeff, as_coeff
from .multipoly import MultiPoly


class ExpressionError(ValueError):
    """An expression uses syntax outside the supported subset."""


def parse_exact(text: str, names: Mapping[str, ExactCoeff] | None = None) -> ExactCoeff:
    """Evaluate ``text`` exactly; only ``+ - * / **``, ``sqrt``, ``pi`` and ``names``."""
    env = {"pi": PI, **(names or {})}
    tree = ast.parse(text, mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return as_coeff(node.value)
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ExpressionError(f"unknown name {node.id!r}")
            return env[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
            if isinstance(node.op, ast.Pow):
                if not b.is_rational() or b.as_fraction().denominator != 1:
                    raise ExpressionError("only integer powers are supported")
                return a ** int(b.as_fraction())
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "sqrt":
            if len(node.args) != 1 or node.keywords:
                raise ExpressionError("sqrt takes one argument")
            return ev(node.args[0]).sqrt()
        raise ExpressionError(f"unsupported syntax: {ast.dump(node)}")

    return ev(tree)


def _load(name: str) -> dict:
    return json.loads(resources.files("sphbif").joinpath("data", name).read_text())


@dataclass(frozen=True)
class ReferenceTerm:
    component: int
    monomial: tuple[int, ...]
    value: ExactCoeff
    text: str
    note: str | None = None

    @property
    def order(self) -> int:
        return sum(self.monomial)


def reference_f() -> list[ReferenceTerm]:
    """Reference complex-basis bifurcation equation, one entry per monomial."""
    data = _load("reference_f.json")
    macros: dict[str, ExactCoeff] = {}
    for k, v in data["macros"].items():
        macros[k] = parse_exact(v, macros)
    return [
        ReferenceTerm(t["component"], tuple(t["monomial"]), parse_exact(t["value"], macros), t["value"], t.get("note"))
        for t in data["terms"]
    ]


def reference_v20() -> dict[tuple[tuple[int, int], tuple[int, ...]], ExactCoeff]:
    """Reference ``vhat_{2,0}`` listing keyed by ``((l, m), u-exponents)``."""
    data = _load("reference_v20.json")
    return {((t["l"], t["m"]), tuple(t["monomial"])): parse_exact(t["value"]) for t in data["terms"]}


@dataclass
class Mismatch:
    component: int
    monomial: tuple[int, ...]
    expected: ExactCoeff
    got: ExactCoeff

    def __str__(self) -> str:
        return (f"f_{self.component} {list(self.monomial)}: expected {self.expected} "
                f"({self.expected.to_complex().real:.6e}) got {self.got} ({self.got.to_complex().real:.6e})")


@dataclass
class Comparison:
    matched: list[ReferenceTerm]
    mismatched: list[Mismatch]
    beyond_order: list[ReferenceTerm]
    missing: list[Mismatch]  # computed terms absent from the table

    @property
    def ok(self) -> bool:
        return not self.mismatched and not self.missing

    def summary(self) -> str:
        return (f"{len(self.matched)} matched, {len(self.mismatched)} differ, "
                f"{len(self.missing)} extra computed, {len(self.beyond_order)} above truncation order")


def compare_f(components: list[MultiPoly], order: int = 4, table: list[ReferenceTerm] | None = None) -> Comparison:
    """Term-by-term comparison of computed ``f_m`` against the reference table."""
    table = reference_f() if table is None else table
    matched, mismatched, beyond = [], [], []
    seen = set()
    for t in table:
        if t.order > order:
            beyond.append(t)
            continue
        got = components[t.component + 2][t.monomial]
        seen.add((t.component, t.monomial))
        if got == t.value:
            matched.append(t)
        else:
            mismatched.append(Mismatch(t.component, t.monomial, t.value, got))
    missing = []
    for m, p in enumerate(components, start=-2):
        for e, c in p.terms.items():
            if (m, e) not in seen:
                missing.append(Mismatch(m, e, as_coeff(0), c))
    return Comparison(matched, mismatched, beyond, missing)
