"""A small expression language for growth laws.

Systems of autonomous first-order equations are written as

    dA = k * A^2
    dY = k1 * Y * A; dA = k2 * Y * A

with the grammar

    system   := equation (";" equation)*
    equation := "d" IDENT "=" expr
    expr     := term (("+" | "-") term)*
    term     := factor (("*" | "/") factor)*
    factor   := ("-")? power
    power    := atom ("^" factor)?
    atom     := NUMBER | IDENT | func | "(" expr ")"
    func     := ("ln" | "exp") "(" expr ")"

``^`` binds tighter than unary minus, which binds tighter than ``*``
and ``/``, which bind tighter than ``+`` and ``-``; ``^`` associates to
the right (``A^2^3`` is ``A^(2^3)``).  ``ln`` and ``exp`` are reserved
words and cannot name parameters or state variables.  NUMBER is an
unsigned decimal literal with optional exponent; a leading minus is
parsed as unary negation.

Expressions evaluate over plain floats with strict domain checking
(``ln`` of a nonpositive value or division by zero raise
:class:`~blowuplab.errors.DomainError`) or over numpy arrays, where
invalid operations follow IEEE semantics and produce ``nan``/``inf``
for the integrators to handle.

:func:`parse` returns a :class:`SystemSpec` for equation input and a
bare expression node otherwise; :func:`pretty_print` renders any node
back to source that reparses to an equal tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Union

import numpy as np

from .errors import BindingError, DomainError, DslSyntaxError

__all__ = [
    "Num",
    "Name",
    "Neg",
    "BinOp",
    "Call",
    "Expr",
    "SystemSpec",
    "parse",
    "parse_expression",
    "parse_system",
    "evaluate",
    "pretty_print",
    "free_names",
    "as_function",
    "to_field",
]

_RESERVED = frozenset({"ln", "exp"})


# --------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str  # "ln" or "exp"
    arg: "Expr"


Expr = Union[Num, Name, Neg, BinOp, Call]


@dataclass(frozen=True)
class SystemSpec:
    """A parsed equation system plus optional bindings.

    ``equations`` maps each state variable to its rate expression, in
    source order.  ``parameters`` provides values for free names;
    ``initial`` provides starting levels.  Both may be filled later via
    :meth:`bind`.
    """

    equations: tuple[tuple[str, Expr], ...]
    parameters: Mapping[str, float] = field(default_factory=dict)
    initial: Mapping[str, float] = field(default_factory=dict)

    @property
    def state_names(self) -> tuple[str, ...]:
        return tuple(var for var, _ in self.equations)

    def bind(self, parameters: Mapping[str, float] | None = None,
             initial: Mapping[str, float] | None = None) -> "SystemSpec":
        """Copy with bindings merged over the existing ones."""
        params = dict(self.parameters)
        params.update(parameters or {})
        init = dict(self.initial)
        init.update(initial or {})
        return replace(self, parameters=params, initial=init)


# --------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
      (?P<NUMBER>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<OP>[-+*/^();=])
    | (?P<WS>\s+)
    | (?P<BAD>.)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # NUMBER | IDENT | OP | END
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    for match in _TOKEN_RE.finditer(source):
        kind = match.lastgroup
        text = match.group()
        column = match.start() - line_start + 1
        if kind == "WS":
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = match.start() + text.rfind("\n") + 1
            continue
        if kind == "BAD":
            raise DslSyntaxError(f"unexpected character {text!r}", line, column)
        tokens.append(_Token(kind, text, line, column))
    tokens.append(_Token("END", "", line, len(source) - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def match_op(self, *ops: str) -> _Token | None:
        token = self.current
        if token.kind == "OP" and token.text in ops:
            return self.advance()
        return None

    def expect_op(self, op: str, context: str) -> _Token:
        token = self.current
        if token.kind != "OP" or token.text != op:
            raise DslSyntaxError(
                f"expected {op!r} {context}, found {token.text or 'end of input'!r}",
                token.line, token.column,
            )
        return self.advance()

    def fail(self, message: str) -> DslSyntaxError:
        token = self.current
        found = token.text if token.kind != "END" else "end of input"
        return DslSyntaxError(f"{message}, found {found!r}", token.line, token.column)

    # grammar rules

    def system(self) -> SystemSpec:
        equations = [self.equation()]
        while self.match_op(";"):
            equations.append(self.equation())
        self.end()
        seen: set[str] = set()
        for var, _ in equations:
            if var in seen:
                token = self.tokens[0]
                raise DslSyntaxError(
                    f"state variable {var!r} defined more than once",
                    token.line, token.column,
                )
            seen.add(var)
        return SystemSpec(equations=tuple(equations))

    def equation(self) -> tuple[str, Expr]:
        token = self.current
        if token.kind != "IDENT" or len(token.text) < 2 or not token.text.startswith("d"):
            raise self.fail("expected an equation of the form 'd<var> = <expr>'")
        self.advance()
        var = token.text[1:]
        if var in _RESERVED:
            raise DslSyntaxError(f"{var!r} is a reserved word", token.line, token.column)
        self.expect_op("=", f"after 'd{var}'")
        return var, self.expr()

    def expr(self) -> Expr:
        node = self.term()
        while (op := self.match_op("+", "-")) is not None:
            node = BinOp(op.text, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while (op := self.match_op("*", "/")) is not None:
            node = BinOp(op.text, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.match_op("-"):
            return Neg(self.power())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.match_op("^"):
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "NUMBER":
            self.advance()
            return Num(float(token.text))
        if token.kind == "IDENT":
            self.advance()
            if token.text in _RESERVED:
                self.expect_op("(", f"after function {token.text!r}")
                arg = self.expr()
                self.expect_op(")", f"to close {token.text!r} call")
                return Call(token.text, arg)
            return Name(token.text)
        if self.match_op("("):
            node = self.expr()
            self.expect_op(")", "to close parenthesized expression")
            return node
        raise self.fail("expected a number, name, function call, or '('")

    def end(self) -> None:
        if self.current.kind != "END":
            raise self.fail("unparsed input after expression")


def parse_expression(source: str) -> Expr:
    """Parse a single expression (no ``d<var> =`` prefix)."""
    parser = _Parser(source)
    node = parser.expr()
    parser.end()
    return node


def parse_system(source: str) -> SystemSpec:
    """Parse one or more semicolon-separated equations."""
    return _Parser(source).system()


def parse(source: str) -> Expr | SystemSpec:
    """Parse source as a system if it contains ``=``, else as an expression."""
    if any(tok.kind == "OP" and tok.text == "=" for tok in _tokenize(source)):
        return parse_system(source)
    return parse_expression(source)


# --------------------------------------------------------------------------
# evaluation


def _is_array(value: object) -> bool:
    return isinstance(value, np.ndarray)


def evaluate(expr: Expr, bindings: Mapping[str, float | np.ndarray]):
    """Evaluate an expression tree under the given name bindings.

    Scalar bindings give strict arithmetic: ``ln`` of a nonpositive
    value, division by zero, or a fractional power of a negative base
    raise :class:`~blowuplab.errors.DomainError`.  Array bindings give
    IEEE semantics instead (``nan``/``inf`` propagate silently), which
    is what the vectorized integrators want.
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Name):
        try:
            return bindings[expr.ident]
        except KeyError:
            raise BindingError(f"unbound name {expr.ident!r}") from None
    if isinstance(expr, Neg):
        return -evaluate(expr.operand, bindings)
    if isinstance(expr, Call):
        arg = evaluate(expr.arg, bindings)
        if _is_array(arg):
            with np.errstate(all="ignore"):
                return np.log(arg) if expr.func == "ln" else np.exp(arg)
        if expr.func == "ln":
            if arg <= 0.0 or not math.isfinite(arg):
                raise DomainError(
                    f"ln of non-positive value {arg!r} in {pretty_print(expr)!r}"
                )
            return math.log(arg)
        try:
            return math.exp(arg)
        except OverflowError:
            return math.inf
    # BinOp
    left = evaluate(expr.left, bindings)
    right = evaluate(expr.right, bindings)
    if _is_array(left) or _is_array(right):
        with np.errstate(all="ignore"):
            if expr.op == "+":
                return left + right
            if expr.op == "-":
                return left - right
            if expr.op == "*":
                return left * right
            if expr.op == "/":
                return left / right
            return left ** right
    try:
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if right == 0.0:
                raise ZeroDivisionError
            return left / right
        result = left ** right
    except ZeroDivisionError:
        raise DomainError(f"division by zero in {pretty_print(expr)!r}") from None
    except (ValueError, OverflowError) as exc:
        raise DomainError(f"invalid arithmetic in {pretty_print(expr)!r}: {exc}") from None
    if isinstance(result, complex):
        raise DomainError(
            f"fractional power of a negative base in {pretty_print(expr)!r}"
        )
    return result


def free_names(expr: Expr) -> frozenset[str]:
    """All identifiers an expression reads."""
    if isinstance(expr, Num):
        return frozenset()
    if isinstance(expr, Name):
        return frozenset((expr.ident,))
    if isinstance(expr, Neg):
        return free_names(expr.operand)
    if isinstance(expr, Call):
        return free_names(expr.arg)
    return free_names(expr.left) | free_names(expr.right)


# --------------------------------------------------------------------------
# pretty printer

# Precedence levels for rendering; parenthesization below follows the
# grammar slots exactly so that parse(pretty_print(e)) == e.
_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def _prec(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        if expr.op in "+-":
            return _PREC_ADD
        if expr.op in "*/":
            return _PREC_MUL
        return _PREC_POW
    if isinstance(expr, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def _render(expr: Expr) -> str:
    if isinstance(expr, Num):
        value = expr.value
        if value == int(value) and abs(value) < 1e16:
            return repr(int(value))
        return repr(value)
    if isinstance(expr, Name):
        return expr.ident
    if isinstance(expr, Call):
        return f"{expr.func}({_render(expr.arg)})"
    if isinstance(expr, Neg):
        # operand slot is `power`: anything below needs parentheses
        inner = _render(expr.operand)
        if _prec(expr.operand) < _PREC_POW:
            inner = f"({inner})"
        return f"-{inner}"
    if expr.op == "^":
        # left slot is `atom`, right slot is `factor` (right-associative)
        left = _render(expr.left)
        if _prec(expr.left) < _PREC_ATOM:
            left = f"({left})"
        right = _render(expr.right)
        if _prec(expr.right) < _PREC_NEG:
            right = f"({right})"
        return f"{left}^{right}"
    own = _prec(expr)
    left = _render(expr.left)
    if _prec(expr.left) < own:
        left = f"({left})"
    right = _render(expr.right)
    # + - * / parse left-associative: an equal-precedence right child
    # would reassociate into a different tree without parentheses
    if _prec(expr.right) <= own:
        right = f"({right})"
    return f"{left} {expr.op} {right}"


def pretty_print(node: Expr | SystemSpec) -> str:
    """Render a tree back to source text that reparses to an equal tree."""
    if isinstance(node, SystemSpec):
        return "; ".join(f"d{var} = {_render(rhs)}" for var, rhs in node.equations)
    return _render(node)


# --------------------------------------------------------------------------
# compilation to callables


def as_function(expr: Expr, var: str = "A",
                parameters: Mapping[str, float] | None = None) -> Callable:
    """Compile an expression to a function of one variable.

    Remaining free names must be covered by ``parameters``; otherwise
    :class:`~blowuplab.errors.BindingError` lists the culprits.  The
    returned callable accepts a float or a numpy array.
    """
    params = dict(parameters or {})
    missing = sorted(free_names(expr) - set(params) - {var})
    if missing:
        raise BindingError(
            f"unbound names {missing} in {pretty_print(expr)!r}; "
            f"bind them via parameters or use variable {var!r}"
        )

    def fn(value):
        env = dict(params)
        env[var] = value
        return evaluate(expr, env)

    fn.__name__ = f"law_{var}"
    fn.__doc__ = f"Evaluate {pretty_print(expr)!r} at {var}."
    return fn


def to_field(spec: SystemSpec, parameters: Mapping[str, float] | None = None):
    """Compile a system to an ODE vector field.

    Every free name must resolve to a state variable or a parameter
    (``parameters`` merged over ``spec.parameters``); unbound names
    raise :class:`~blowuplab.errors.BindingError` naming the equation.
    Returns a :class:`~blowuplab.ode.VectorField` whose state order
    follows the equation order.
    """
    from .ode import VectorField  # deferred: ode does not import dsl

    params = dict(spec.parameters)
    params.update(parameters or {})
    names = spec.state_names
    bound = set(params) | set(names)
    for var, rhs in spec.equations:
        missing = sorted(free_names(rhs) - bound)
        if missing:
            raise BindingError(
                f"unbound names {missing} in equation for d{var} "
                f"({pretty_print(rhs)!r})"
            )

    exprs = tuple(rhs for _, rhs in spec.equations)

    def rate(state):
        # 0-d arrays select IEEE semantics in evaluate(): an overflow in
        # a trial stage must yield inf for the step controller to reject,
        # not an exception
        env: dict[str, object] = dict(params)
        for name, component in zip(names, state):
            env[name] = np.asarray(component, dtype=float)
        return np.array([evaluate(e, env) for e in exprs], dtype=float)

    return VectorField(dimension=len(names), rate=rate, names=names)
