"""
LinAmalg core terms
Signatures, terms, equations, the term grammar and linear/equilinear classification
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from utils.exceptions import LinearityException, ParseException, SignatureMismatchException

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Signature:
    """Operation symbols with arities plus constant symbols (constants are not operations)"""

    operations: Tuple[Tuple[str, int], ...]
    constants: FrozenSet[str] = frozenset()

    def __init__(self, operations: Union[Mapping[str, int], Iterable[Tuple[str, int]]] = (),
                 constants: Iterable[str] = ()):
        items = operations.items() if isinstance(operations, Mapping) else operations
        ops = tuple(sorted((str(name), int(arity)) for name, arity in items))
        consts = frozenset(constants)
        names = [name for name, _ in ops]
        if len(set(names)) != len(names):
            raise SignatureMismatchException(f"duplicate operation symbol in {names}")
        for name, arity in ops:
            if arity < 1:
                raise SignatureMismatchException(
                    f"operation {name} has arity {arity}; nullary symbols are constants")
        clash = set(names) & consts
        if clash:
            raise SignatureMismatchException(f"symbols used both as operation and constant: {sorted(clash)}")
        object.__setattr__(self, "operations", ops)
        object.__setattr__(self, "constants", consts)

    @property
    def op_names(self) -> List[str]:
        return [name for name, _ in self.operations]

    @property
    def max_arity(self) -> int:
        return max((arity for _, arity in self.operations), default=0)

    def arity(self, op: str) -> int:
        for name, arity in self.operations:
            if name == op:
                return arity
        raise SignatureMismatchException(f"unknown operation symbol {op}")

    def has_op(self, op: str) -> bool:
        return any(name == op for name, _ in self.operations)

    def sorted_constants(self) -> List[str]:
        return sorted(self.constants)

    def extend(self, operations: Mapping[str, int] = None, constants: Iterable[str] = ()) -> "Signature":
        ops = dict(self.operations)
        ops.update(operations or {})
        return Signature(ops, set(self.constants) | set(constants))

    def restrict(self, op_names: Iterable[str]) -> "Signature":
        keep = set(op_names)
        return Signature({n: a for n, a in self.operations if n in keep}, self.constants)

    def __str__(self) -> str:
        parts = [f"{name}/{arity}" for name, arity in self.operations]
        parts += [f"'{c}" for c in self.sorted_constants()]
        return " ".join(parts)


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Constant:
    name: str

    def __str__(self) -> str:
        return f"'{self.name}"


@dataclass(frozen=True)
class Application:
    op: str
    args: Tuple["Term", ...] = field(default_factory=tuple)

    def __str__(self) -> str:
        return f"{self.op}({','.join(str(a) for a in self.args)})"


Term = Union[Variable, Constant, Application]


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"

    def flipped(self) -> "Equation":
        return Equation(self.rhs, self.lhs)


class Linearity(str, Enum):
    NONLINEAR = "nonlinear"
    LINEAR = "linear"
    EQUILINEAR = "equilinear"


def app(op: str, *args: Term) -> Application:
    return Application(op, tuple(args))


def is_atom(t: Term) -> bool:
    return isinstance(t, (Variable, Constant))


def is_flat(t: Term) -> bool:
    """Depth at most one: an atom or an application of atoms"""
    if is_atom(t):
        return True
    return all(is_atom(a) for a in t.args)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Application):
        for a in t.args:
            yield from subterms(a)


def variables_of(t: Term) -> FrozenSet[str]:
    """Variables occurring in t, without multiplicities"""
    return frozenset(s.name for s in subterms(t) if isinstance(s, Variable))


def constants_of(t: Term) -> FrozenSet[str]:
    return frozenset(s.name for s in subterms(t) if isinstance(s, Constant))


def equation_variables(eq: Equation) -> FrozenSet[str]:
    return variables_of(eq.lhs) | variables_of(eq.rhs)


def check_term(signature: Signature, t: Term) -> None:
    """Raise SignatureMismatchException unless t is well formed over signature"""
    for s in subterms(t):
        if isinstance(s, Constant) and s.name not in signature.constants:
            raise SignatureMismatchException(f"unknown constant '{s.name} in {t}")
        if isinstance(s, Application):
            if not signature.has_op(s.op):
                raise SignatureMismatchException(f"unknown operation {s.op} in {t}")
            if len(s.args) != signature.arity(s.op):
                raise SignatureMismatchException(
                    f"{s.op} expects {signature.arity(s.op)} arguments, got {len(s.args)} in {t}")


def check_equation(signature: Signature, eq: Equation) -> None:
    check_term(signature, eq.lhs)
    check_term(signature, eq.rhs)


def classify_equation(eq: Equation, signature: Optional[Signature] = None) -> Linearity:
    """
    Classify an equation as nonlinear, linear or equilinear

    Linear means both sides are flat. Equilinear additionally requires an
    operation-free side, or two applications with the same variable set and
    no constants (equations mixing constants into two applications stay
    merely linear).

    Args:
        eq: the equation
        signature: when given, the equation is checked against it first

    Returns:
        Linearity
    """
    if signature is not None:
        check_equation(signature, eq)
    if not (is_flat(eq.lhs) and is_flat(eq.rhs)):
        return Linearity.NONLINEAR
    if is_atom(eq.lhs) or is_atom(eq.rhs):
        return Linearity.EQUILINEAR
    if constants_of(eq.lhs) or constants_of(eq.rhs):
        return Linearity.LINEAR
    if variables_of(eq.lhs) == variables_of(eq.rhs):
        return Linearity.EQUILINEAR
    return Linearity.LINEAR


@dataclass(frozen=True)
class EquationalTheory:
    """A signature with arbitrary axioms (used by the brute-force oracles)"""

    signature: Signature
    axioms: Tuple[Equation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "axioms", tuple(self.axioms))
        for eq in self.axioms:
            check_equation(self.signature, eq)

    def classifications(self) -> List[Tuple[Equation, Linearity]]:
        return [(eq, classify_equation(eq)) for eq in self.axioms]

    def is_linear(self) -> bool:
        return all(c is not Linearity.NONLINEAR for _, c in self.classifications())

    def is_equilinear(self) -> bool:
        return all(c is Linearity.EQUILINEAR for _, c in self.classifications())


@dataclass(frozen=True)
class LinearTheory(EquationalTheory):
    """A theory whose axioms are all linear (possibly equilinear)"""

    def __post_init__(self):
        super().__post_init__()
        for eq in self.axioms:
            if classify_equation(eq) is Linearity.NONLINEAR:
                raise LinearityException(
                    f"axiom {eq} is not linear",
                    details={"axiom": str(eq)})

    @classmethod
    def from_theory(cls, theory: EquationalTheory) -> "LinearTheory":
        return cls(theory.signature, theory.axioms)


# ---------------------------------------------------------------------------
# Term grammar: ident = variable, 'ident = constant, f(t1,...,tn) = application
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(?P<punct>[(),=])|(?P<const>'[^\s(),=']+)|(?P<name>[^\s(),=']+[^\s(),=]*))")


def _tokenize(text: str) -> List[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseException(f"unexpected character {text[pos]!r} in {text!r}")
        tokens.append(m.group("punct") or m.group("const") or m.group("name"))
        pos = m.end()
    return tokens


class _TermParser:
    def __init__(self, tokens: List[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ParseException(f"expected {expected or 'a token'}, found {tok!r}")
        self.pos += 1
        return tok

    def term(self) -> Term:
        tok = self.take()
        if tok in "(),=":
            raise ParseException(f"unexpected {tok!r}")
        if tok.startswith("'"):
            return Constant(tok[1:])
        if self.peek() != "(":
            return Variable(tok)
        self.take("(")
        args = [self.term()]
        while self.peek() == ",":
            self.take(",")
            args.append(self.term())
        self.take(")")
        return Application(tok, tuple(args))


def parse_term(text: str, signature: Optional[Signature] = None) -> Term:
    parser = _TermParser(_tokenize(text))
    t = parser.term()
    if parser.peek() is not None:
        raise ParseException(f"trailing input after term in {text!r}")
    if signature is not None:
        check_term(signature, t)
    return t


def parse_equation(text: str, signature: Optional[Signature] = None) -> Equation:
    parser = _TermParser(_tokenize(text))
    lhs = parser.term()
    parser.take("=")
    rhs = parser.term()
    if parser.peek() is not None:
        raise ParseException(f"trailing input after equation in {text!r}")
    eq = Equation(lhs, rhs)
    if signature is not None:
        check_equation(signature, eq)
    return eq


def parse_signature(text: str) -> Signature:
    """Parse a `f/3 g/2 'c` style signature listing"""
    ops: Dict[str, int] = {}
    consts = []
    for item in text.replace(",", " ").split():
        if item.startswith("'"):
            consts.append(item[1:])
        elif "/" in item:
            name, _, arity = item.rpartition("/")
            try:
                ops[name] = int(arity)
            except ValueError:
                raise ParseException(f"bad arity in signature entry {item!r}")
        else:
            raise ParseException(f"signature entry {item!r} is neither f/n nor 'c")
    return Signature(ops, consts)
