"""Arithmetic expression mini-language for map and potential definitions.

Systems are described in text configs, so maps w(x) and potentials p(x) are
written as expressions in the single free variable ``x``.  The grammar is

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-'? power
    power  := atom ('^' factor)?
    atom   := number | 'x' | ident '(' args ')' | '(' expr ')'
    args   := expr (',' expr)*

``+ - * /`` are left associative, ``^`` is right associative, and a unary
minus applies to a whole power (``-x^2`` is ``-(x^2)``).  Numbers are decimal
literals with optional fraction and exponent; all arithmetic is binary64.

Evaluation never lets a NaN or infinity escape: domain violations (log of a
non-positive value, square root of a negative, division by zero, overflow)
raise :class:`DomainError` instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExprError",
    "ParseError",
    "UnknownIdentifierError",
    "ArityError",
    "DomainError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "FUNCTIONS",
    "parse",
    "evaluate",
    "to_source",
    "fold_constants",
]


class ExprError(Exception):
    """Base class for expression language errors."""


class ParseError(ExprError):
    def __init__(self, message, position):
        super().__init__(f"{message} (offset {position})")
        self.message = message
        self.position = position


class UnknownIdentifierError(ParseError):
    pass


class ArityError(ParseError):
    pass


class DomainError(ExprError):
    """Evaluation left the domain (log/sqrt/division/overflow)."""


#: function name -> arity
FUNCTIONS = {
    "sqrt": 1,
    "abs": 1,
    "exp": 1,
    "log": 1,
    "sin": 1,
    "cos": 1,
    "min": 2,
    "max": 2,
    "pow": 2,
}


@dataclass(frozen=True)
class Num:
    value: float
    span: tuple = (0, 0)


@dataclass(frozen=True)
class Var:
    span: tuple = (0, 0)


@dataclass(frozen=True)
class Neg:
    operand: object
    span: tuple = (0, 0)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    span: tuple = (0, 0)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    span: tuple = (0, 0)


_NUMBER = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Tokenizer:
    def __init__(self, source):
        self.source = source
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.source) and self.source[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip_ws()
        if self.pos >= len(self.source):
            return ("eof", "", self.pos)
        ch = self.source[self.pos]
        if ch in "+-*/^(),":
            return (ch, ch, self.pos)
        m = _NUMBER.match(self.source, self.pos)
        if m:
            return ("number", m.group(0), self.pos)
        m = _IDENT.match(self.source, self.pos)
        if m:
            return ("ident", m.group(0), self.pos)
        raise ParseError(f"unexpected character {ch!r}", self.pos)

    def next(self):
        kind, text, pos = self.peek()
        self.pos = pos + len(text)
        return kind, text, pos


class _Parser:
    def __init__(self, source):
        self.toks = _Tokenizer(source)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.toks.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, _, pos = self.toks.peek()
            if kind in ("+", "-"):
                self.toks.next()
                rhs = self.term()
                node = BinOp(kind, node, rhs, (node.span[0], rhs.span[1]))
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, _, pos = self.toks.peek()
            if kind in ("*", "/"):
                self.toks.next()
                rhs = self.factor()
                node = BinOp(kind, node, rhs, (node.span[0], rhs.span[1]))
            else:
                return node

    def factor(self):
        kind, _, pos = self.toks.peek()
        if kind == "-":
            self.toks.next()
            operand = self.power()
            return Neg(operand, (pos, operand.span[1]))
        return self.power()

    def power(self):
        node = self.atom()
        kind, _, _ = self.toks.peek()
        if kind == "^":
            self.toks.next()
            rhs = self.factor()
            return BinOp("^", node, rhs, (node.span[0], rhs.span[1]))
        return node

    def atom(self):
        kind, text, pos = self.toks.next()
        if kind == "number":
            return Num(float(text), (pos, pos + len(text)))
        if kind == "(":
            node = self.expr()
            k, t, p = self.toks.next()
            if k != ")":
                raise ParseError("expected ')'", p)
            return node
        if kind == "ident":
            if text == "x":
                return Var((pos, pos + len(text)))
            if text not in FUNCTIONS:
                raise UnknownIdentifierError(f"unknown identifier {text!r}", pos)
            k, _, p = self.toks.next()
            if k != "(":
                raise ParseError(f"expected '(' after {text!r}", p)
            args = [self.expr()]
            while True:
                k, t, p = self.toks.next()
                if k == ")":
                    break
                if k != ",":
                    raise ParseError("expected ',' or ')'", p)
                args.append(self.expr())
            if len(args) != FUNCTIONS[text]:
                raise ArityError(
                    f"{text!r} takes {FUNCTIONS[text]} argument(s), got {len(args)}",
                    pos,
                )
            return Call(text, tuple(args), (pos, p + 1))
        raise ParseError(f"unexpected {text!r}" if text else "unexpected end of input", pos)


def parse(source):
    """Parse ``source`` into an AST.  Raises :class:`ParseError` on bad input."""
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    return _Parser(source).parse()


def _check(cond, message):
    if not cond:
        raise DomainError(message)


def _eval(node, x):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return np.negative(_eval(node.operand, x))
    if isinstance(node, BinOp):
        a = _eval(node.left, x)
        b = _eval(node.right, x)
        if node.op == "+":
            return np.add(a, b)
        if node.op == "-":
            return np.subtract(a, b)
        if node.op == "*":
            return np.multiply(a, b)
        if node.op == "/":
            _check(np.all(b != 0), "division by zero")
            return np.divide(a, b)
        # '^'
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            r = np.power(a, b)
        _check(np.all(np.isfinite(r)), "invalid power (negative base or overflow)")
        return r
    if isinstance(node, Call):
        args = [_eval(a, x) for a in node.args]
        name = node.name
        if name == "sqrt":
            _check(np.all(args[0] >= 0), "sqrt of a negative value")
            return np.sqrt(args[0])
        if name == "abs":
            return np.abs(args[0])
        if name == "exp":
            with np.errstate(over="ignore"):
                r = np.exp(args[0])
            _check(np.all(np.isfinite(r)), "exp overflow")
            return r
        if name == "log":
            _check(np.all(args[0] > 0), "log of a non-positive value")
            return np.log(args[0])
        if name == "sin":
            return np.sin(args[0])
        if name == "cos":
            return np.cos(args[0])
        if name == "min":
            return np.minimum(args[0], args[1])
        if name == "max":
            return np.maximum(args[0], args[1])
        # pow
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            r = np.power(args[0], args[1])
        _check(np.all(np.isfinite(r)), "invalid power (negative base or overflow)")
        return r
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(ast, x):
    """Evaluate ``ast`` at ``x``.

    ``x`` may be a float or a numpy array; the result has the same shape.
    Scalar and array evaluation run through the same numpy ufuncs, so results
    agree bit for bit between repeated calls with equal inputs.
    """
    scalar = np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0)
    val = _eval(ast, np.float64(x) if scalar else np.asarray(x, dtype=np.float64))
    result = np.asarray(val, dtype=np.float64)
    _check(np.all(np.isfinite(result)), "non-finite result")
    if scalar:
        return float(result)
    return np.broadcast_to(result, np.shape(x)).copy() if result.shape != np.shape(x) else result


# precedence levels used for minimal-paren printing
_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node):
    if isinstance(node, Num):
        # a negative literal prints with a leading '-', lexically a unary minus
        return _PREC_NEG if np.copysign(1.0, node.value) < 0 else _PREC_ATOM
    if isinstance(node, (Var, Call)):
        return _PREC_ATOM
    if isinstance(node, Neg):
        return _PREC_NEG
    return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[node.op]


def _print(node, min_prec):
    if isinstance(node, Num):
        s = repr(node.value)
    elif isinstance(node, Var):
        s = "x"
    elif isinstance(node, Neg):
        s = "-" + _print(node.operand, _PREC_POW)
    elif isinstance(node, Call):
        s = node.name + "(" + ", ".join(_print(a, _PREC_ADD) for a in node.args) + ")"
    elif node.op in ("+", "-"):
        s = _print(node.left, _PREC_ADD) + f" {node.op} " + _print(node.right, _PREC_MUL)
    elif node.op in ("*", "/"):
        s = _print(node.left, _PREC_MUL) + f" {node.op} " + _print(node.right, _PREC_NEG)
    else:  # '^': left side must be an atom, right side a factor
        s = _print(node.left, _PREC_ATOM) + " ^ " + _print(node.right, _PREC_NEG)
    if _prec(node) < min_prec:
        return "(" + s + ")"
    return s


def to_source(ast):
    """Print ``ast`` back to text.

    Re-parsing the printed form reproduces the tree structure (up to literal
    spelling of numbers, which round-trips exactly via ``repr``), so the
    printed expression evaluates identically to the original.
    """
    return _print(ast, _PREC_ADD)


def _has_var(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return _has_var(node.operand)
    if isinstance(node, BinOp):
        return _has_var(node.left) or _has_var(node.right)
    if isinstance(node, Call):
        return any(_has_var(a) for a in node.args)
    return False


def fold_constants(ast):
    """Collapse variable-free subtrees to literals.

    Folding evaluates subtrees with the exact machinery used at run time, so
    it can never change an evaluation result.  Subtrees whose evaluation
    raises (e.g. ``log(0 - 1)``) are left alone so the error still occurs on
    evaluation.
    """
    if isinstance(ast, (Num, Var)):
        return ast
    if isinstance(ast, Neg):
        folded = Neg(fold_constants(ast.operand), ast.span)
    elif isinstance(ast, BinOp):
        folded = BinOp(ast.op, fold_constants(ast.left), fold_constants(ast.right), ast.span)
    else:
        folded = Call(ast.name, tuple(fold_constants(a) for a in ast.args), ast.span)
    if not _has_var(folded):
        try:
            return Num(evaluate(folded, 0.0), ast.span)
        except DomainError:
            return folded
    return folded
