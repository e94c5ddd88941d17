"""Small expression language for user-defined coefficients and profiles.

Expressions are functions of the time variable ``t``, the radius ``r`` and
optional named parameters.  Supported: ``+ - * / ^`` (``^`` right
associative), unary minus, ``sin cos exp log sqrt abs min max tanh``, and
the constants ``pi`` and ``e``.  Evaluation is numpy-vectorized so ``t``
and ``r`` may be arrays.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvalDomainError, ExprSyntaxError, UnboundParameter, UnknownIdentifier

FUNCTIONS = {
    "sin": 1, "cos": 1, "exp": 1, "log": 1, "sqrt": 1,
    "abs": 1, "tanh": 1, "min": 2, "max": 2,
}
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLES = ("t", "r")

MAX_SOURCE_BYTES = 64 * 1024


# --- AST nodes ---

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "t" or "r"


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Const:
    name: str  # "pi" or "e"


@dataclass(frozen=True)
class Unary:
    op: str  # "-"
    child: object


@dataclass(frozen=True)
class Bin:
    op: str  # + - * / ^
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


# --- tokenizer ---

_TOK_OPS = set("+-*/^(),")


def _tokenize(text):
    """Yield (kind, value, offset) triples; kind in num/ident/op/end."""
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _TOK_OPS:
            toks.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            # scientific notation tail
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                value = float(lit)
            except ValueError:
                raise ExprSyntaxError(i, ["number"], "malformed number %r at offset %d" % (lit, i))
            toks.append(("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("ident", text[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(i, ["expression"], "unexpected character %r at offset %d" % (c, i))
    toks.append(("end", None, n))
    return toks


class _Parser:
    def __init__(self, toks, params):
        self.toks = toks
        self.pos = 0
        self.params = frozenset(params)

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, value, off = self.peek()
        if kind != "op" or value != op:
            raise ExprSyntaxError(off, [op])
        return self.next()

    # expr := term (("+"|"-") term)*
    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.next()
                node = Bin(value, node, self.term())
            else:
                return node

    # term := unary (("*"|"/") unary)*
    def term(self):
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.next()
                node = Bin(value, node, self.unary())
            else:
                return node

    # unary := "-" unary | power
    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.next()
            return Unary("-", self.unary())
        return self.power()

    # power := atom ("^" unary)?   (right associative, binds above unary "-")
    def power(self):
        node = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.next()
            return Bin("^", node, self.unary())
        return node

    def atom(self):
        kind, value, off = self.next()
        if kind == "num":
            return Num(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            if value in FUNCTIONS:
                self.expect_op("(")
                args = [self.expr()]
                while FUNCTIONS[value] > len(args):
                    self.expect_op(",")
                    args.append(self.expr())
                self.expect_op(")")
                return Call(value, tuple(args))
            if value in CONSTANTS:
                return Const(value)
            if value in VARIABLES:
                return Var(value)
            if value in self.params:
                return Param(value)
            raise UnknownIdentifier(value, off)
        raise ExprSyntaxError(off, ["number", "identifier", "("])


def parse(text, params=()):
    """Parse ``text`` into an AST. ``params`` lists the allowed parameter names."""
    if not text or not text.strip():
        raise ExprSyntaxError(0, ["expression"], "empty expression")
    if len(text.encode()) > MAX_SOURCE_BYTES:
        raise ExprSyntaxError(0, ["expression"],
                              "expression longer than %d bytes" % MAX_SOURCE_BYTES)
    parser = _Parser(_tokenize(text), params)
    node = parser.expr()
    kind, _, off = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(off, ["end of input"])
    return node


# --- evaluation ---

def _check_finite(node, value):
    if not np.all(np.isfinite(value)):
        raise EvalDomainError(node, value)


def evaluate(ast, t=0.0, r=0.0, params=None):
    """Evaluate ``ast`` at (t, r). Scalars or numpy arrays are accepted.

    Raises EvalDomainError for log/sqrt of negative arguments, division by
    zero and non-finite results instead of propagating NaN/inf.
    """
    params = params or {}
    if isinstance(ast, Num):
        return ast.value
    if isinstance(ast, Const):
        return CONSTANTS[ast.name]
    if isinstance(ast, Var):
        return t if ast.name == "t" else r
    if isinstance(ast, Param):
        if ast.name not in params:
            raise UnboundParameter(ast.name)
        return params[ast.name]
    if isinstance(ast, Unary):
        return -evaluate(ast.child, t, r, params)
    if isinstance(ast, Bin):
        a = evaluate(ast.left, t, r, params)
        b = evaluate(ast.right, t, r, params)
        if ast.op == "+":
            return a + b
        if ast.op == "-":
            return a - b
        if ast.op == "*":
            return a * b
        if ast.op == "/":
            if np.any(b == 0):
                raise EvalDomainError(ast, b)
            return a / b
        # "^"
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.power(np.asarray(a, dtype=float), b)
        _check_finite(ast, out)
        return out if np.ndim(out) else float(out)
    if isinstance(ast, Call):
        args = [evaluate(child, t, r, params) for child in ast.args]
        if ast.fn == "sqrt":
            if np.any(np.asarray(args[0]) < 0):
                raise EvalDomainError(ast, args[0])
            return np.sqrt(args[0])
        if ast.fn == "log":
            if np.any(np.asarray(args[0]) <= 0):
                raise EvalDomainError(ast, args[0])
            return np.log(args[0])
        if ast.fn == "exp":
            with np.errstate(over="ignore"):
                out = np.exp(args[0])
            _check_finite(ast, out)
            return out
        if ast.fn == "sin":
            return np.sin(args[0])
        if ast.fn == "cos":
            return np.cos(args[0])
        if ast.fn == "tanh":
            return np.tanh(args[0])
        if ast.fn == "abs":
            return np.abs(args[0])
        if ast.fn == "min":
            return np.minimum(args[0], args[1])
        if ast.fn == "max":
            return np.maximum(args[0], args[1])
    raise TypeError("not an AST node: %r" % (ast,))


def pretty(ast):
    """Render an AST back to source. Fully parenthesized so that
    parse(pretty(a)) is structurally identical to ``a``."""
    if isinstance(ast, Num):
        return repr(ast.value)
    if isinstance(ast, (Var, Param, Const)):
        return ast.name
    if isinstance(ast, Unary):
        return "(-%s)" % pretty(ast.child)
    if isinstance(ast, Bin):
        return "(%s %s %s)" % (pretty(ast.left), ast.op, pretty(ast.right))
    if isinstance(ast, Call):
        return "%s(%s)" % (ast.fn, ", ".join(pretty(a) for a in ast.args))
    raise TypeError("not an AST node: %r" % (ast,))


class ExprFunction:
    """Picklable callable wrapping a parsed expression: f(t, r) -> value."""

    def __init__(self, text, params=None):
        self.text = text
        self.params = dict(params or {})
        self.ast = parse(text, params=self.params.keys())

    def __call__(self, t, r=0.0):
        return evaluate(self.ast, t=t, r=r, params=self.params)

    def __repr__(self):
        return "ExprFunction(%r)" % self.text

    def __getstate__(self):
        return {"text": self.text, "params": self.params}

    def __setstate__(self, state):
        self.__init__(state["text"], state["params"])
