"""
Scalar expression grammar for profile functions such as lambda1(t).

Top-down operator precedence (Pratt) parser: every token knows its left
binding power and how to act in prefix (nud) and infix (led) position.

    expr   := expr ('+'|'-') expr | expr ('*'|'/') expr
            | expr ('^'|'**') expr        right associative, integer exponent
            | '-' expr | '(' expr ')' | number | 't' | 'pi'
            | ('sin'|'cos'|'exp'|'sqrt') '(' expr ')'

Parsed trees evaluate on floats or on :class:`jets.Jet3`, so a user-supplied
lambda1(t) carries exact derivatives into the profile quadrature.
"""

import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Union

import jets
from errors import ExprSyntaxError, SingularEvaluationError, UnknownIdentifierError

Number = Union[float, jets.Jet3]

FUNCTIONS: Dict[str, Callable[[Number], Number]] = {
    "sin": jets.sin,
    "cos": jets.cos,
    "exp": jets.exp,
    "sqrt": jets.sqrt,
}
CONSTANTS = {"pi": math.pi}
VARIABLE = "t"


# ==========================================================================
# AST
# ==========================================================================

class Node:
    def evaluate(self, t: Number) -> Number:
        raise NotImplementedError

    def is_constant(self) -> bool:
        return False


@dataclass
class Const(Node):
    value: float

    def evaluate(self, t):
        return self.value

    def is_constant(self):
        return True


@dataclass
class Var(Node):
    def evaluate(self, t):
        return t


@dataclass
class Neg(Node):
    operand: Node

    def evaluate(self, t):
        return -self.operand.evaluate(t)

    def is_constant(self):
        return self.operand.is_constant()


@dataclass
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, t):
        a = self.left.evaluate(t)
        b = self.right.evaluate(t)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if isinstance(b, float) and b == 0.0:
            raise SingularEvaluationError("div", "division by zero")
        return a / b

    def is_constant(self):
        return self.left.is_constant() and self.right.is_constant()


@dataclass
class Pow(Node):
    base: Node
    exponent: int

    def evaluate(self, t):
        b = self.base.evaluate(t)
        if isinstance(b, float) and b == 0.0 and self.exponent < 0:
            raise SingularEvaluationError("pow", f"zero base with exponent {self.exponent}")
        return b ** self.exponent

    def is_constant(self):
        return self.base.is_constant()


@dataclass
class Call(Node):
    name: str
    argument: Node

    def evaluate(self, t):
        return FUNCTIONS[self.name](self.argument.evaluate(t))

    def is_constant(self):
        return self.argument.is_constant()


@dataclass
class ExprAST:
    """Parsed expression; callable on a float or a Jet3."""

    text: str
    root: Node

    def evaluate(self, t: Number) -> Number:
        value = self.root.evaluate(t)
        if isinstance(value, (int, float)):
            return float(value)
        return value

    __call__ = evaluate

    def is_constant(self) -> bool:
        return self.root.is_constant()


# ==========================================================================
# TOKENS
# ==========================================================================

_TOKEN_PAT = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


@dataclass
class Token:
    kind: str       # number | name | op | end
    text: str
    position: int   # byte offset into the source


class _Parser:
    # left binding powers
    LBP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30, "**": 30, ")": 0}
    UNARY_BP = 25

    def __init__(self, text: str):
        self.text = text
        self.tokens: Iterator[Token] = self._tokenize(text)
        self.token = next(self.tokens)

    def _byte_offset(self, index: int) -> int:
        return len(self.text[:index].encode("utf-8"))

    def _tokenize(self, text: str) -> Iterator[Token]:
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                yield Token("end", "", self._byte_offset(pos))
                return
            match = _TOKEN_PAT.match(text, pos)
            if not match or match.end() == pos:
                raise ExprSyntaxError(f"unexpected character {text[pos]!r}", self._byte_offset(pos))
            kind = match.lastgroup
            start = match.start(kind)
            yield Token(kind, match.group(kind), self._byte_offset(start))
            pos = match.end()

    def advance(self) -> Token:
        current = self.token
        if current.kind != "end":
            self.token = next(self.tokens)
        return current

    def lbp(self, token: Token) -> int:
        if token.kind == "op" and token.text in self.LBP:
            return self.LBP[token.text]
        if token.kind == "end":
            return 0
        raise ExprSyntaxError(f"unexpected {token.text!r}", token.position)

    def expect(self, text: str):
        if self.token.kind != "op" or self.token.text != text:
            found = self.token.text or "end of input"
            raise ExprSyntaxError(f"expected {text!r}, found {found!r}", self.token.position)
        self.advance()

    def expression(self, rbp: int = 0) -> Node:
        token = self.advance()
        left = self.nud(token)
        while rbp < self.lbp(self.token):
            token = self.advance()
            left = self.led(token, left)
        return left

    def nud(self, token: Token) -> Node:
        if token.kind == "number":
            return Const(float(token.text))
        if token.kind == "name":
            return self.name_nud(token)
        if token.kind == "op" and token.text == "-":
            return Neg(self.expression(self.UNARY_BP))
        if token.kind == "op" and token.text == "+":
            return self.expression(self.UNARY_BP)
        if token.kind == "op" and token.text == "(":
            inner = self.expression(0)
            self.expect(")")
            return inner
        found = token.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", token.position)

    def name_nud(self, token: Token) -> Node:
        name = token.text
        if name == VARIABLE:
            return Var()
        if name in CONSTANTS:
            return Const(CONSTANTS[name])
        if name in FUNCTIONS:
            if self.token.kind != "op" or self.token.text != "(":
                raise ExprSyntaxError(f"function {name!r} requires parentheses", self.token.position)
            self.advance()
            argument = self.expression(0)
            self.expect(")")
            return Call(name, argument)
        raise UnknownIdentifierError(f"unknown identifier {name!r}", token.position)

    def led(self, token: Token, left: Node) -> Node:
        op = token.text
        if op in ("^", "**"):
            exponent = self.expression(self.LBP[op] - 1)
            return Pow(left, self._fold_exponent(exponent, token))
        if op in ("+", "-", "*", "/"):
            return BinOp(op, left, self.expression(self.LBP[op]))
        raise ExprSyntaxError(f"unexpected {op!r}", token.position)

    @staticmethod
    def _fold_exponent(node: Node, token: Token) -> int:
        if not node.is_constant():
            raise ExprSyntaxError("exponent must be a constant integer", token.position)
        value = node.evaluate(0.0)
        if not float(value).is_integer():
            raise ExprSyntaxError(f"exponent {value!r} is not an integer", token.position)
        return int(value)


def parse_expr(text: str) -> ExprAST:
    """
    Parse a scalar expression in t.

    Raises:
        ExprSyntaxError: malformed input, with the byte offset of the problem
        UnknownIdentifierError: a name other than t, pi or a known function
    """
    parser = _Parser(text)
    root = parser.expression(0)
    if parser.token.kind != "end":
        raise ExprSyntaxError(f"unexpected {parser.token.text!r}", parser.token.position)
    return ExprAST(text, root)


def parse_number(text: Union[str, int, float]) -> float:
    """Evaluate a constant expression ("sqrt(2/3)") or pass a number through."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    ast = parse_expr(str(text))
    if not ast.is_constant():
        raise ExprSyntaxError(f"expression {text!r} must not depend on t", 0)
    return float(ast.evaluate(0.0))


if __name__ == "__main__":
    for sample, expected in [("2+sin(t)", 3.0), ("1/sqrt(2)", 1 / math.sqrt(2)), ("2^3^2", 512.0)]:
        value = parse_expr(sample)(0.0)
        mark = "✅" if abs(value - expected) < 1e-12 else "❌"
        print(f"{mark} {sample} -> {value}")
