"""Small closed-form expression grammar for initial-curve components.

Expressions are functions of the single curve parameter ``vartheta`` built
from +, -, *, /, **, parentheses, numeric literals, ``pi`` and the functions
sin, cos, tan, sqrt, exp, log, atan.  They are parsed with sympy, which also
supplies exact derivatives for curve tangents.
"""

from __future__ import annotations

import ast

import sympy as sp

from .errors import ExpressionError

VARTHETA = sp.Symbol("vartheta", real=True)

_ALLOWED_FUNCS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "tan": sp.tan,
    "sqrt": sp.sqrt,
    "exp": sp.exp,
    "log": sp.log,
    "atan": sp.atan,
    "arctan": sp.atan,
    "abs": sp.Abs,
}

_ALLOWED_NAMES = set(_ALLOWED_FUNCS) | {"pi", "vartheta"}

_LOCALS = dict(_ALLOWED_FUNCS)
_LOCALS["pi"] = sp.pi
_LOCALS["vartheta"] = VARTHETA

_ALLOWED_NODES = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.USub,
    ast.UAdd,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
)


def _check_grammar(text: str) -> None:
    """Whitelist-validate the raw string before it reaches sympy.

    sympify evaluates its input, so anything outside the arithmetic grammar
    (attribute access, subscripts, dunder names, keywords) must be rejected
    up front.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression {text!r}: {exc}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ExpressionError(
                f"disallowed construct {type(node).__name__} in {text!r}"
            )
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.keywords:
                raise ExpressionError(f"disallowed call in {text!r}")
            if node.func.id not in _ALLOWED_FUNCS:
                raise ExpressionError(
                    f"function {node.func.id!r} not allowed in {text!r}"
                )
        elif isinstance(node, ast.Name):
            if node.id not in _ALLOWED_NAMES:
                raise ExpressionError(f"unknown symbol {node.id!r} in {text!r}")
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ExpressionError(
                    f"literal {node.value!r} not allowed in {text!r}"
                )


def parse_expression(text: str) -> sp.Expr:
    """Parse one expression string, rejecting anything outside the grammar."""
    _check_grammar(text)
    try:
        expr = sp.sympify(text, locals=dict(_LOCALS), rational=False)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ExpressionError(f"cannot parse expression {text!r}: {exc}") from exc
    bad = expr.free_symbols - {VARTHETA}
    if bad:
        names = ", ".join(sorted(str(s) for s in bad))
        raise ExpressionError(f"unknown symbols in {text!r}: {names}")
    return expr


class CurveExpression:
    """A parsed expression together with its analytic vartheta-derivative."""

    def __init__(self, text: str):
        self.text = text
        self.expr = parse_expression(text)
        self.derivative = sp.diff(self.expr, VARTHETA)
        self._fn = sp.lambdify(VARTHETA, self.expr, modules="math")
        self._dfn = sp.lambdify(VARTHETA, self.derivative, modules="math")

    def __call__(self, vartheta: float) -> float:
        return float(self._fn(vartheta))

    def deriv(self, vartheta: float) -> float:
        return float(self._dfn(vartheta))

    def is_constant(self) -> bool:
        return self.expr.is_number

    def __repr__(self):
        return f"CurveExpression({self.text!r})"


def constant_expression(value: float) -> CurveExpression:
    return CurveExpression(repr(float(value)))


def evaluate_scalar(text: str) -> float:
    """Evaluate a constant expression (used for config values like 'pi/2')."""
    expr = parse_expression(text)
    if expr.free_symbols:
        raise ExpressionError(f"expected a constant, got {text!r}")
    return float(expr.evalf(17))
