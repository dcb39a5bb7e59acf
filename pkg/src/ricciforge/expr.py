"""Expression strings -> ScalarField.

Grammar: arithmetic (+ - * /), powers (^ or **, right-associative),
unary minus, parentheses, the functions in `fields.FUNCTIONS` and the
names x2, x3, v, chi, theta, pi, e plus caller-supplied constants.
"""
import re

from . import fields as F
from .errors import ExpressionError

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^(),]))")

COORDS = ("x2", "x3", "v", "chi")


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionError(f"unexpected character {text[col]!r}", text, col)
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            out.append(("num", m.group(1), start))
        elif m.group(2) is not None:
            out.append(("name", m.group(2), start))
        else:
            out.append(("op", m.group(3), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, constants):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.constants = constants

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val):
        t = self.take()
        if t[1] != val:
            raise ExpressionError(f"expected {val!r}, found {t[1] or 'end of input'!r}", self.text, t[2])
        return t

    def parse(self):
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ExpressionError(f"unexpected {t[1]!r}", self.text, t[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = F.add(node, rhs) if op == "+" else F.add(node, F.neg(rhs))
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = F.mul(node, rhs) if op == "*" else F.mul(node, F.power(rhs, -1.0))
        return node

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] in ("-", "+"):
            self.take()
            inner = self.unary()
            return F.neg(inner) if t[1] == "-" else inner
        return self.pow()

    def pow(self):
        base = self.atom()
        t = self.peek()
        if t[0] == "op" and t[1] in ("^", "**"):
            self.take()
            return F.power(base, self.unary())
        return base

    def atom(self):
        t = self.take()
        kind, val, pos = t
        if kind == "num":
            return F.Const(float(val))
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in F.FUNCTIONS:
                    raise ExpressionError(f"unknown function {val!r}", self.text, pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return F.func(val, arg)
            if val in COORDS:
                return F.Var(val)
            if val == "pi":
                return F.Pi()
            if val == "e":
                return F.func("exp", F.ONE)
            if val in self.constants:
                return F.Const(self.constants[val])
            raise ExpressionError(f"unknown identifier {val!r}", self.text, pos)
        raise ExpressionError(f"unexpected {val or 'end of input'!r}", self.text, pos)


def compile_expr(text, constants=None, exact_axes=(), symbol=None):
    """Parse `text` into a ScalarField.  `constants` maps extra names
    (e.g. theta) to numbers."""
    if isinstance(text, (int, float)):
        return F.const(text)
    if not isinstance(text, str):
        raise ExpressionError(f"expression must be a string, got {type(text).__name__}", str(text), 0)
    node = _Parser(text, dict(constants or {})).parse()
    return F.ScalarField(node, exact_axes, symbol=symbol or text)
