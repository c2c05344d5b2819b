"""Catalogue of exactly known tour expectations.

Each entry holds an expression string that is parsed once into a Python AST
and evaluated against a fixed whitelist of constants and functions.
The decimals printed alongside these values in the literature are kept
out of this module and live in the test suite.
"""

import ast
import math
import operator
from dataclasses import dataclass
from types import MappingProxyType

from .special import elliptic_e_modulus, elliptic_k_modulus
from .tours import Topology, TourSpec

__all__ = ["CatalogueEntry", "evaluate_expression", "exact_value", "catalogue"]

_NAMES = MappingProxyType({"pi": math.pi})
_FUNCS = MappingProxyType(
    {
        "sqrt": math.sqrt,
        "atan": math.atan,
        "asin": math.asin,
        "K": elliptic_k_modulus,
        "E": elliptic_e_modulus,
    }
)
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval_node(node.operand))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and not node.keywords
    ):
        return _FUNCS[node.func.id](*(_eval_node(a) for a in node.args))
    raise ValueError(f"disallowed expression element: {ast.dump(node)}")


def evaluate_expression(expr):
    """Evaluate an arithmetic expression over pi, sqrt, atan, asin, K and E."""
    return _eval_node(ast.parse(expr, mode="eval"))


@dataclass(frozen=True)
class CatalogueEntry:
    spec: TourSpec
    expression: str
    value: float
    provenance: str

    def to_dict(self):
        return {
            "quantity": self.spec.symbol,
            "spec": self.spec.to_dict(),
            "expression": self.expression,
            "value": self.value,
            "provenance": self.provenance,
        }


_OPEN, _CLOSED = Topology.OPEN, Topology.CLOSED

# (d, n, topology, expression); provenance "published" for all of these.
_PUBLISHED = (
    (1, 1, _OPEN, "2/sqrt(pi)"),
    (1, 2, _OPEN, "1/3 + 2*sqrt(3)/pi"),
    (1, 3, _OPEN, "5/sqrt(pi) + 4*sqrt(2)/pi**1.5 - 12/pi**1.5*atan(sqrt(2))"),
    (
        1, 4, _OPEN,
        "2/15 + 4*sqrt(5)/pi**2 + 8/pi**2*atan(sqrt(5)/7)"
        " + 8*sqrt(3)/pi**2*atan(sqrt(3/5))",
    ),
    (1, 2, _CLOSED, "2"),
    (1, 3, _CLOSED, "3/sqrt(pi)"),
    (1, 4, _CLOSED, "2/3 - 8/pi + 8*sqrt(3)/pi"),
    (2, 1, _OPEN, "sqrt(pi)"),
    (2, 2, _OPEN, "4*E(1/2) - 3/2*K(1/2)"),
    (2, 2, _CLOSED, "4"),
    (3, 1, _OPEN, "4/sqrt(pi)"),
    (3, 2, _OPEN, "2 + 6*sqrt(3)/pi"),
    (
        3, 3, _OPEN,
        "238/(3*sqrt(pi)) + 56*sqrt(2)/(3*pi**1.5) - 216/pi**1.5*atan(sqrt(2))",
    ),
    (
        3, 4, _OPEN,
        "232/45 - 3140/(9*pi) + 56/(sqrt(3)*pi) + 260*sqrt(5)/(9*pi**2)"
        " + 912/pi**2*atan(sqrt(5)) + 224/(sqrt(3)*pi**2)*atan(sqrt(5/3))",
    ),
    (3, 2, _CLOSED, "6"),
)


def _build():
    table = {}
    for d, n, topo, expr in _PUBLISHED:
        spec = TourSpec(d, n, topo)
        table[spec] = CatalogueEntry(spec, expr, evaluate_expression(expr), "published")
    return MappingProxyType(table)


_CATALOGUE = _build()


def catalogue():
    """All published entries, in display order."""
    return tuple(_CATALOGUE.values())


def exact_value(spec):
    """Return the exact entry for ``spec``, or None when no closed form is known.

    Besides the published values, every closed 2-step tour is covered:
    ``nu[d,2] = E|r2 - r1|^2 = 2d``.
    """
    entry = _CATALOGUE.get(spec)
    if entry is not None:
        return entry
    if spec.closed and spec.n == 2:
        expr = f"2*{spec.d}"
        return CatalogueEntry(spec, expr, evaluate_expression(expr), "derived: second moment")
    return None
