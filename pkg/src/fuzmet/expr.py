"""Arithmetic expressions in one free variable ``n``.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := base ("^" (integer | "n"))?
    base   := number | "n" | "(" expr ")" | "-" base
    number := integer ("." digits)?

Evaluation is vectorised over numpy arrays of indices so that scalar and
bulk evaluation share one code path and produce bit-identical doubles.
Precision caveat: indices above 2**52 are not exactly representable.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Union

import numpy as np

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Pow",
    "Expr",
    "ExprSyntaxError",
    "EvalError",
    "parse",
    "to_text",
    "evaluate",
    "evaluate_many",
    "has_var",
    "parse_constant",
    "random_expr",
]


class ExprSyntaxError(ValueError):
    """Raised with the 0-based byte offset of the first unparsable token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvalError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: Union[Num, Var]


Expr = Union[Num, Var, Neg, BinOp, Pow]


# -- tokenizer ---------------------------------------------------------------

@dataclass(frozen=True)
class _Tok:
    kind: str  # "int", "num", "n", "op", "eof"
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i = 0
    byte = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            byte += len(ch.encode("utf-8"))
            continue
        if ch.isdigit() and ch.isascii():
            j = i
            while j < len(text) and text[j].isascii() and text[j].isdigit():
                j += 1
            kind = "int"
            if j < len(text) and text[j] == ".":
                k = j + 1
                while k < len(text) and text[k].isascii() and text[k].isdigit():
                    k += 1
                if k == j + 1:
                    # "1." is not a number: the dot is the bad token
                    raise ExprSyntaxError("expected digits after '.'", byte + (j - i))
                j = k
                kind = "num"
            toks.append(_Tok(kind, text[i:j], byte))
            byte += j - i
            i = j
            continue
        if ch == "n":
            toks.append(_Tok("n", ch, byte))
        elif ch in "+-*/^()":
            toks.append(_Tok("op", ch, byte))
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}", byte)
        i += 1
        byte += len(ch.encode("utf-8"))
    toks.append(_Tok("eof", "", byte))
    return toks


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def fail(self, what: str):
        tok = self.peek()
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ExprSyntaxError(f"expected {what}, found {found}", tok.offset)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.base()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            tok = self.peek()
            if tok.kind == "int":
                self.take()
                return Pow(node, Num(float(int(tok.text))))
            if tok.kind == "n":
                self.take()
                return Pow(node, Var())
            self.fail("integer or 'n' exponent")
        return node

    def base(self) -> Expr:
        tok = self.peek()
        if tok.kind in ("int", "num"):
            self.take()
            return Num(float(tok.text))
        if tok.kind == "n":
            self.take()
            return Var()
        if tok.kind == "op" and tok.text == "(":
            self.take()
            node = self.expr()
            if not (self.peek().kind == "op" and self.peek().text == ")"):
                self.fail("')'")
            self.take()
            return node
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.base())
        self.fail("number, 'n', '(' or '-'")


def parse(text: str) -> Expr:
    p = _Parser(text)
    node = p.expr()
    if p.peek().kind != "eof":
        p.fail("operator or end of input")
    return node


# -- printer -----------------------------------------------------------------

def _num_text(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return format(Decimal(repr(v)), "f")


def _base_text(e: Expr) -> str:
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return "n"
    if isinstance(e, Neg):
        return "-" + _base_text(e.operand)
    if isinstance(e, BinOp):
        return to_text(e)  # already parenthesised
    return "(" + to_text(e) + ")"


def to_text(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_text(e)) == e``."""
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    if isinstance(e, Pow):
        exp = "n" if isinstance(e.exponent, Var) else _num_text(e.exponent.value)
        return f"{_base_text(e.base)}^{exp}"
    return _base_text(e)


# -- evaluation --------------------------------------------------------------

def has_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Num):
        return False
    if isinstance(e, Neg):
        return has_var(e.operand)
    if isinstance(e, BinOp):
        return has_var(e.left) or has_var(e.right)
    return has_var(e.base) or isinstance(e.exponent, Var)


def _eval(e: Expr, ns: np.ndarray, divzero: np.ndarray, bad: np.ndarray) -> np.ndarray:
    if isinstance(e, Num):
        out = np.full(ns.shape, e.value)
    elif isinstance(e, Var):
        out = ns.astype(np.float64)
    elif isinstance(e, Neg):
        out = -_eval(e.operand, ns, divzero, bad)
    elif isinstance(e, Pow):
        base = _eval(e.base, ns, divzero, bad)
        exp = ns.astype(np.float64) if isinstance(e.exponent, Var) else e.exponent.value
        out = np.power(base, exp)
    else:
        left = _eval(e.left, ns, divzero, bad)
        right = _eval(e.right, ns, divzero, bad)
        if e.op == "+":
            out = left + right
        elif e.op == "-":
            out = left - right
        elif e.op == "*":
            out = left * right
        else:
            zero = right == 0.0
            divzero |= zero & ~bad
            out = left / np.where(zero, 1.0, right)
            out[zero] = np.nan
    bad |= ~np.isfinite(out)
    return out


def evaluate_many(e: Expr, ns) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate at every index in ``ns``.

    Returns ``(values, divzero, nonfinite)``; the masks flag indices whose
    evaluation hit a division by zero or some other non-finite
    intermediate. Flagged values are meaningless.
    """
    ns = np.asarray(ns, dtype=np.int64)
    divzero = np.zeros(ns.shape, dtype=bool)
    bad = np.zeros(ns.shape, dtype=bool)
    with np.errstate(all="ignore"):
        values = _eval(e, ns, divzero, bad)
    return values, divzero, bad & ~divzero


def evaluate(e: Expr, n: int) -> float:
    if n < 1:
        raise ValueError(f"index must be a positive integer, got {n}")
    values, divzero, nonfinite = evaluate_many(e, [n])
    if divzero[0]:
        raise EvalError(f"division by zero at n={n}")
    if nonfinite[0]:
        raise EvalError(f"non-finite result at n={n}")
    return float(values[0])


def parse_constant(text) -> float:
    """Parse a domain endpoint: a number, ``inf``/``-inf``, or a closed expression."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip()
    if s in ("inf", "+inf"):
        return float("inf")
    if s == "-inf":
        return float("-inf")
    e = parse(s)
    if has_var(e):
        raise ValueError(f"endpoint {s!r} must not mention n")
    return evaluate(e, 1)


def random_expr(rng: np.random.Generator, depth: int = 3) -> Expr:
    """Draw a random well-formed expression of at most ``depth`` levels."""
    if depth <= 1 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.4:
            return Var()
        if r < 0.8:
            return Num(float(rng.integers(0, 10)))
        return Num(round(float(rng.random()) * 10, 2))
    r = rng.random()
    if r < 0.15:
        return Neg(random_expr(rng, depth - 1))
    if r < 0.3:
        exp = Var() if rng.random() < 0.3 else Num(float(rng.integers(0, 4)))
        return Pow(random_expr(rng, depth - 1), exp)
    op = "+-*/"[int(rng.integers(0, 4))]
    return BinOp(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1))
