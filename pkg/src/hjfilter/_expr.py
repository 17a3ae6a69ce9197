"""Small arithmetic-expression evaluator for custom problem files.

Supports + - * / ^ (power), unary minus, the functions sin, cos, exp, abs,
sqrt, min, max, the constant pi, and free variables bound at call time.
Expressions are compiled from a restricted AST; anything else is rejected,
so untrusted problem files cannot execute code.
"""

from __future__ import annotations

import ast
import math

import numpy as np

_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
    "sqrt": np.sqrt,
}

_CONSTANTS = {"pi": math.pi, "e": math.e}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.true_divide,
    ast.Pow: np.power,
}


def compile_expression(text: str, variables: tuple):
    """Compile an expression string into f(*variables) -> ndarray or float."""
    tree = ast.parse(text.replace("^", "**"), mode="eval")
    names = set(variables)

    def check(node):
        if isinstance(node, ast.Expression):
            check(node.body)
        elif isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            check(node.left)
            check(node.right)
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name):
                raise ValueError("only plain function calls are allowed")
            fname = node.func.id
            if fname in ("min", "max"):
                if len(node.args) < 2:
                    raise ValueError(f"{fname} needs at least two arguments")
            elif fname not in _FUNCS:
                raise ValueError(f"unknown function {fname!r}")
            elif len(node.args) != 1:
                raise ValueError(f"{fname} takes exactly one argument")
            if node.keywords:
                raise ValueError("keyword arguments are not allowed")
            for a in node.args:
                check(a)
        elif isinstance(node, ast.Name):
            if node.id not in names and node.id not in _CONSTANTS:
                raise ValueError(f"unknown variable {node.id!r}")
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ValueError(f"bad constant {node.value!r}")
        else:
            raise ValueError(f"disallowed syntax: {ast.dump(node)[:40]}")

    check(tree)

    def evaluate(node, env):
        if isinstance(node, ast.Expression):
            return evaluate(node.body, env)
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](
                evaluate(node.left, env), evaluate(node.right, env)
            )
        if isinstance(node, ast.UnaryOp):
            v = evaluate(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else +v
        if isinstance(node, ast.Call):
            args = [evaluate(a, env) for a in node.args]
            fname = node.func.id
            if fname == "min":
                out = args[0]
                for a in args[1:]:
                    out = np.minimum(out, a)
                return out
            if fname == "max":
                out = args[0]
                for a in args[1:]:
                    out = np.maximum(out, a)
                return out
            return _FUNCS[fname](args[0])
        if isinstance(node, ast.Name):
            return env[node.id] if node.id in env else _CONSTANTS[node.id]
        return node.value  # ast.Constant

    def fn(*args):
        if len(args) != len(variables):
            raise TypeError(f"expected {len(variables)} arguments, got {len(args)}")
        return evaluate(tree, dict(zip(variables, args)))

    fn.expression = text
    return fn
