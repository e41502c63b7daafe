"""Frozen micro-grammar for boundary-value expressions.

Grammar (a whitelisted subset of Python syntax, parsed with ast):

    expr    := number | x1 | x2 | (expr) | -expr | +expr
             | expr + expr | expr - expr | expr * expr | expr ** expr

Nothing else: no division, no names besides x1 and x2, no calls.  Compiled
expressions evaluate with numpy broadcasting over coordinate arrays.
"""

from __future__ import annotations

import ast
from typing import Callable

import numpy as np

__all__ = ["ExpressionError", "compile_expression"]


class ExpressionError(ValueError):
    """Expression outside the grammar."""


_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Pow: np.power,
}

_UNARYOPS = {
    ast.USub: np.negative,
    ast.UAdd: np.positive,
}


def _evaluate(node: ast.AST, env: dict[str, np.ndarray]):
    if isinstance(node, ast.Expression):
        return _evaluate(node.body, env)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        raise ExpressionError(f"literal {node.value!r} is not a number")
    if isinstance(node, ast.Name):
        if node.id in env:
            return env[node.id]
        raise ExpressionError(f"unknown name {node.id!r}; only x1 and x2 are allowed")
    if isinstance(node, ast.BinOp):
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ExpressionError(f"operator {type(node.op).__name__} is not in the grammar")
        return op(_evaluate(node.left, env), _evaluate(node.right, env))
    if isinstance(node, ast.UnaryOp):
        op = _UNARYOPS.get(type(node.op))
        if op is None:
            raise ExpressionError(f"operator {type(node.op).__name__} is not in the grammar")
        return op(_evaluate(node.operand, env))
    raise ExpressionError(f"syntax element {type(node).__name__} is not in the grammar")


def compile_expression(text: str) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Compile an expression of x1 and x2 into a broadcasting callable."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as err:
        raise ExpressionError(f"cannot parse {text!r}: {err.msg}") from None
    # validate eagerly so config errors surface at load time
    _evaluate(tree, {"x1": np.float64(0.0), "x2": np.float64(0.0)})

    def fn(x1, x2):
        return _evaluate(tree, {"x1": np.asarray(x1, dtype=float), "x2": np.asarray(x2, dtype=float)})

    fn.source = text  # type: ignore[attr-defined]
    return fn
