"""
LinAmalg amalgamation engine
Forced values, strong amalgams on the union, joint embeddings, default-value
policies, h/k expansions, n-element models and the brute-force oracles
"""

import itertools
import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import AppConfig
from utils.algebra import (
    FiniteAlgebra,
    enumerate_models,
    find_embedding,
    is_model,
    is_subalgebra,
    satisfies,
    verification_cost,
)
from utils.exceptions import (
    BudgetExceededException,
    ConstantClashException,
    EmptyBaseException,
    HkPreconditionException,
    InvariantViolationException,
    JepUnsupportedException,
    NotAModelException,
    OverlapMismatchException,
    PolicyPartialException,
    SignatureMismatchException,
    SubalgebraFailureException,
    TrivialTheoryException,
    ValidationException,
)
from utils.model_search import CompletionSearch, random_model
from utils.terms import (
    Constant,
    Equation,
    EquationalTheory,
    Linearity,
    Signature,
    Variable,
    app,
)
from utils.theory_engine import ConstNode, Pattern, SaturatedTheory, VarClass

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Default policies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedElement:
    """Every unforced entry takes one element; None picks the least element of C (else of A)"""
    element: Optional[str] = None


@dataclass(frozen=True)
class MaxUnderCarrierOrder:
    """Unforced entries take the last ordinary element in the carrier order of D"""


@dataclass(frozen=True)
class FreshElement:
    """Unforced entries take a new element outside A and B"""
    name: str = AppConfig.FRESH_ELEMENT


@dataclass(frozen=True)
class CustomEta:
    """Explicit default per set of ordinary elements"""
    table: Mapping[FrozenSet[str], str] = field(default_factory=dict, hash=False, compare=False)


DefaultPolicy = Union[FixedElement, MaxUnderCarrierOrder, FreshElement, CustomEta]


def parse_policy(text: Optional[str]) -> DefaultPolicy:
    """`fixed`, `fixed:<e>`, `max`, `fresh` or `fresh:<name>`"""
    if not text:
        return FixedElement()
    kind, _, arg = text.partition(":")
    if kind == "fixed":
        return FixedElement(arg or None)
    if kind == "max":
        return MaxUnderCarrierOrder()
    if kind == "fresh":
        return FreshElement(arg or AppConfig.FRESH_ELEMENT)
    raise ValidationException(f"unknown policy {text!r}; use fixed:<e>, max or fresh")


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------

class E2Mode(str, Enum):
    PADDED = "padded"   # ordinary elements within one side, exceptional slots padded from C
    WHOLE = "whole"     # the whole argument tuple within one side (C empty, equilinear)


@dataclass(frozen=True)
class AmalgamationInput:
    """The triple (A, B, C); C None stands for the empty common part"""

    A: FiniteAlgebra
    B: FiniteAlgebra
    C: Optional[FiniteAlgebra] = None

    def union_carrier(self) -> List[str]:
        return list(self.A.carrier) + [e for e in self.B.carrier if e not in self.A]

    def common(self) -> List[str]:
        return list(self.C.carrier) if self.C is not None else []


@dataclass(frozen=True, eq=False)
class ValidatedTriple:
    """A checked triple plus the theory with the algebras' constant identifications merged in"""

    input: AmalgamationInput
    sat: Optional[SaturatedTheory]
    const_elements: Dict[str, str]

    @property
    def A(self) -> FiniteAlgebra:
        return self.input.A

    @property
    def B(self) -> FiniteAlgebra:
        return self.input.B

    @property
    def C(self) -> Optional[FiniteAlgebra]:
        return self.input.C


@dataclass(frozen=True)
class AssociatedTerm:
    """
    The flat term behind an expression f(d1, ..., dn): elements interpreting
    constants become constant slots, equal elements share a class
    """

    pattern: Pattern
    elements: Tuple[str, ...]
    class_elements: Tuple[str, ...]
    ordinary: Tuple[int, ...]
    exceptional: Tuple[int, ...]

    @property
    def ordinary_elements(self) -> FrozenSet[str]:
        return frozenset(self.class_elements[i] for i in self.ordinary)


def validate_triple(inp: AmalgamationInput, sat: Optional[SaturatedTheory] = None) -> ValidatedTriple:
    """
    Check the amalgamation setup and merge constants the algebras identify

    Args:
        inp: the triple
        sat: saturated theory; when given the inputs are also model-checked

    Returns:
        ValidatedTriple
    """
    A, B, C = inp.A, inp.B, inp.C
    for X in (B, C):
        if X is not None and X.signature != A.signature:
            raise SignatureMismatchException(f"{X.signature} differs from {A.signature}")
    if sat is not None and sat.signature != A.signature:
        raise SignatureMismatchException(f"theory over {sat.signature}, algebras over {A.signature}")

    overlap = set(A.carrier) & set(B.carrier)
    if overlap != set(inp.common()):
        raise OverlapMismatchException(
            f"A and B share {sorted(overlap)}, C is {sorted(inp.common())}",
            details={"overlap": sorted(overlap), "common": sorted(inp.common())})

    if A.constants != B.constants:
        raise ConstantClashException(
            f"A interprets constants as {A.constants}, B as {B.constants}",
            details={"A": A.constants, "B": B.constants})
    if C is None:
        if A.signature.constants:
            raise EmptyBaseException("constants need a nonempty common subalgebra")
    else:
        for X, label in ((A, "A"), (B, "B")):
            if not is_subalgebra(C, X):
                raise SubalgebraFailureException(f"C is not a subalgebra of {label}")

    merged = sat
    if sat is not None:
        pairs = []
        for names in A.constant_elements().values():
            pairs += [(names[0], other) for other in names[1:]]
        merged = sat.with_merged_constants(pairs)
        if merged is not sat:
            logger.info(f"merged constants identified by the inputs: {pairs}")
        for X, label in ((A, "A"), (B, "B"), (C, "C")):
            if X is None:
                continue
            if verification_cost(X.size, sat.base) <= AppConfig.VERIFICATION_BUDGET and not is_model(X, sat.base):
                raise NotAModelException(f"{label} is not a model of the theory")

    const_elements = {}
    for element, names in A.constant_elements().items():
        const_elements[element] = merged.merged_constant_rep(names[0]) if merged is not None else names[0]
    return ValidatedTriple(inp, merged, const_elements)


# ---------------------------------------------------------------------------
# Forced values
# ---------------------------------------------------------------------------

def associate_term(sat: SaturatedTheory, f: str, elements: Sequence[str],
                   const_elems: Mapping[str, str]) -> AssociatedTerm:
    """
    Build the associated term of f(elements)

    Args:
        sat: saturated theory (nontrivial)
        f: operation symbol
        elements: argument tuple
        const_elems: element -> constant it interprets

    Returns:
        AssociatedTerm
    """
    arity = sat.signature.arity(f)
    if len(elements) != arity:
        raise SignatureMismatchException(f"{f} expects {arity} arguments, got {len(elements)}")
    slots = []
    class_elements: List[str] = []
    for e in elements:
        if e in const_elems:
            slots.append(const_elems[e])
        else:
            if e not in class_elements:
                class_elements.append(e)
            slots.append(class_elements.index(e))
    pattern = Pattern(f, tuple(slots))
    exceptional = sat.exceptional_variables(pattern)
    ordinary = tuple(i for i in range(len(class_elements)) if i not in exceptional)
    return AssociatedTerm(pattern, tuple(elements), tuple(class_elements), ordinary, tuple(sorted(exceptional)))


def _padded_args(at: AssociatedTerm, X: FiniteAlgebra, d: str) -> List[str]:
    ordinary = set(at.ordinary)
    args = []
    for s in at.pattern.slots:
        if isinstance(s, int):
            args.append(at.class_elements[s] if s in ordinary else d)
        else:
            args.append(X.const(s))
    return args


def _e2_value(at: AssociatedTerm, triple: ValidatedTriple, d: Optional[str], mode: E2Mode) -> Optional[str]:
    op = at.pattern.op
    if mode is E2Mode.WHOLE:
        for X in (triple.A, triple.B):
            if all(e in X for e in at.elements):
                return X.op(op, *at.elements)
        return None
    values = []
    for X in (triple.A, triple.B):
        if all(e in X for e in at.ordinary_elements):
            values.append(X.op(op, *_padded_args(at, X, d)))
    if len(set(values)) > 1:
        raise InvariantViolationException(f"{at.pattern} evaluates differently in A and B over C: {values}")
    return values[0] if values else None


def forced_value(sat: SaturatedTheory, at: AssociatedTerm, triple: ValidatedTriple,
                 d_in_c: Optional[str] = None, mode: E2Mode = E2Mode.PADDED) -> Optional[str]:
    """
    The value a strong amalgam must give to the expression, or None when unforced

    A collapse of the associated term decides first; otherwise the ordinary
    elements (or, in WHOLE mode, all arguments) lying within A or within B
    decide by evaluation there. Agreement of the two rules, and independence
    from the padding element, are checked.
    """
    e1 = None
    target = sat.collapse_target(at.pattern)
    if isinstance(target, VarClass):
        e1 = at.class_elements[target.index]
    elif isinstance(target, ConstNode):
        e1 = triple.A.const(target.name)

    if mode is E2Mode.PADDED and d_in_c is None:
        raise EmptyBaseException("padding exceptional positions needs an element of C")
    e2 = _e2_value(at, triple, d_in_c, mode)

    if e1 is not None and e2 is not None and e1 != e2:
        raise InvariantViolationException(
            f"collapse gives {e1} but evaluation gives {e2} for {at.pattern} at {at.elements}",
            details={"pattern": str(at.pattern), "elements": list(at.elements)})

    if e2 is not None and mode is E2Mode.PADDED and at.exceptional and triple.C.size > 1:
        other_d = next(c for c in triple.C.carrier if c != d_in_c)
        again = _e2_value(at, triple, other_d, mode)
        if again != e2:
            raise InvariantViolationException(
                f"padding {at.pattern} with {d_in_c} gives {e2}, with {other_d} gives {again}")
    return e1 if e1 is not None else e2


# ---------------------------------------------------------------------------
# Amalgamation
# ---------------------------------------------------------------------------

def _policy_value(policy: DefaultPolicy, ordinary: FrozenSet[str], order: Sequence[str],
                  fallback: str) -> str:
    if isinstance(policy, FixedElement):
        return policy.element if policy.element is not None else fallback
    if isinstance(policy, MaxUnderCarrierOrder):
        ranked = [e for e in order if e in ordinary]
        return ranked[-1] if ranked else order[0]
    if isinstance(policy, FreshElement):
        return policy.name
    if ordinary not in policy.table:
        raise PolicyPartialException(f"custom default has no value for {sorted(ordinary)}",
                                     details={"set": sorted(ordinary)})
    return policy.table[ordinary]


def _choose_mode(sat: SaturatedTheory, triple: ValidatedTriple) -> E2Mode:
    if triple.C is not None:
        return E2Mode.PADDED
    if sat.base.is_equilinear() and not sat.signature.constants:
        return E2Mode.WHOLE
    raise EmptyBaseException("an empty common subalgebra needs an equilinear theory without constants")


def verify_model(D: FiniteAlgebra, theory: EquationalTheory, what: str = "amalgam") -> FiniteAlgebra:
    """Exhaustive model check within the verification budget; failures are invariant violations"""
    cost = verification_cost(D.size, theory)
    if cost > AppConfig.VERIFICATION_BUDGET:
        logger.warning(f"skipping verification of {what}: {cost} evaluations exceed "
                       f"{AppConfig.VERIFICATION_BUDGET}")
        return D.with_verified(None)
    for eq in theory.axioms:
        if not satisfies(D, eq):
            raise InvariantViolationException(f"{what} violates {eq}", details={"axiom": str(eq)})
    return D.with_verified(True)


def amalgamate(sat: SaturatedTheory,
               inp: AmalgamationInput,
               policy: Optional[DefaultPolicy] = None,
               extra_elements: Sequence[str] = (),
               name: str = "D") -> FiniteAlgebra:
    """
    Strong amalgam of A and B over C on the union of their carriers

    Args:
        sat: saturated linear theory
        inp: the triple
        policy: default for unforced entries (FixedElement() when omitted)
        extra_elements: further new elements, so D may be larger than A ∪ B
        name: label of the result

    Returns:
        FiniteAlgebra: D extending A and B, model-checked within budget
    """
    policy = policy or FixedElement()
    if sat.is_trivial():
        if inp.C is None:
            raise TrivialTheoryException("a trivial theory has no joint extension of disjoint singletons")
        validate_triple(inp)
        logger.info("trivial theory: the amalgam is C itself")
        return inp.C.with_verified(True)

    triple = validate_triple(inp, sat)
    work = triple.sat
    if work.is_trivial():
        logger.info("the inputs identify constants so that the theory becomes trivial; returning C")
        return inp.C.with_verified(True)
    mode = _choose_mode(sat, triple)

    carrier = inp.union_carrier()
    for e in extra_elements:
        if e in carrier:
            raise ValidationException(f"extra element {e} already belongs to A or B")
        carrier.append(e)
    if isinstance(policy, FreshElement):
        if policy.name in carrier:
            raise ValidationException(f"fresh element {policy.name} collides with an existing element")
        carrier.append(policy.name)
    if isinstance(policy, FixedElement) and policy.element is not None \
            and policy.element not in inp.union_carrier():
        raise ValidationException(f"default element {policy.element} is not in A ∪ B")

    d_in_c = inp.C.carrier[0] if inp.C is not None else None
    fallback = d_in_c if d_in_c is not None else carrier[0]
    index = {e: i for i, e in enumerate(carrier)}
    n = len(carrier)

    tables = {}
    forced = 0
    for op, arity in work.signature.operations:
        table = np.empty((n,) * arity, dtype=np.int64)
        for combo in itertools.product(range(n), repeat=arity):
            elements = tuple(carrier[i] for i in combo)
            at = associate_term(work, op, elements, triple.const_elements)
            value = forced_value(work, at, triple, d_in_c, mode)
            if value is None:
                value = _policy_value(policy, at.ordinary_elements, carrier, fallback)
                if value not in index:
                    raise PolicyPartialException(f"default value {value} is not an element of D")
            else:
                forced += 1
            table[combo] = index[value]
        tables[op] = table

    D = FiniteAlgebra(sat.signature, carrier, tables, inp.A.constants, name=name)
    for X, label in ((inp.A, "A"), (inp.B, "B")):
        if not is_subalgebra(X, D):
            raise InvariantViolationException(f"{name} does not extend {label}")
    D = verify_model(D, sat.base, name)
    logger.info(f"amalgamated |A|={inp.A.size} |B|={inp.B.size} "
                f"|C|={len(inp.common())} into |D|={n} ({mode.value}, {forced} forced entries)")
    return D


# ---------------------------------------------------------------------------
# Joint embedding
# ---------------------------------------------------------------------------

def rename_apart(A: FiniteAlgebra, B: FiniteAlgebra,
                 identify: Optional[Mapping[str, str]] = None) -> Tuple[FiniteAlgebra, Dict[str, str]]:
    """
    Rename B's elements so that B meets A only where `identify` says

    Returns:
        (renamed B, mapping from B's old names to new names)
    """
    identify = dict(identify or {})
    taken = set(A.carrier) | set(identify.values())
    mapping: Dict[str, str] = {}
    for e in B.carrier:
        if e in identify:
            mapping[e] = identify[e]
            continue
        new = e
        while new in taken:
            new += AppConfig.RENAME_SUFFIX
        taken.add(new)
        mapping[e] = new
    return B.renamed(mapping), mapping


def _jep_case(sat: SaturatedTheory) -> str:
    """'equilinear' or 'pointed'; raises JepUnsupportedException otherwise"""
    sig = sat.signature
    if not sig.constants:
        for eq, kind in sat.base.classifications():
            if kind is not Linearity.EQUILINEAR:
                raise JepUnsupportedException(
                    f"axiom {eq} is not equilinear; joint embedding needs equilinear axioms",
                    details={"axiom": str(eq)})
        return "equilinear"
    if len(sig.constants) > 1:
        raise JepUnsupportedException(
            f"joint embedding needs at most one constant, found {sig.sorted_constants()}",
            details={"constants": sig.sorted_constants()})
    c = Constant(sig.sorted_constants()[0])
    for op, arity in sig.operations:
        eq = Equation(app(op, *([c] * arity)), c)
        if not sat.is_valid_flat(eq):
            raise JepUnsupportedException(f"{eq} is not valid, so {{{c}}} is no subalgebra",
                                          details={"equation": str(eq)})
    return "pointed"


def joint_embed(sat: SaturatedTheory, A: FiniteAlgebra, B: FiniteAlgebra,
                policy: Optional[DefaultPolicy] = None) -> FiniteAlgebra:
    """
    Common extension of A and a renamed copy of B

    Equilinear constant-free theories amalgamate over the empty set; theories
    with a single constant forming a subalgebra amalgamate over that point.
    """
    if sat.is_trivial():
        validate_triple(AmalgamationInput(A, A, A))
        return A.with_verified(True)
    case = _jep_case(sat)
    if case == "equilinear":
        B2, _ = rename_apart(A, B)
        return amalgamate(sat, AmalgamationInput(A, B2, None), policy)
    c = sat.signature.sorted_constants()[0]
    B2, _ = rename_apart(A, B, {B.const(c): A.const(c)})
    C = A.subalgebra([A.const(c)], name="C")
    return amalgamate(sat, AmalgamationInput(A, B2, C), policy)


def singleton(signature: Signature, element: str = "0") -> FiniteAlgebra:
    """The one-element algebra; it satisfies every equation"""
    return FiniteAlgebra(signature, [element],
                         {op: np.zeros((1,) * arity, dtype=np.int64) for op, arity in signature.operations},
                         {c: element for c in signature.constants}, verified=True)


def build_n_element(sat: SaturatedTheory, n: int, policy: Optional[DefaultPolicy] = None) -> FiniteAlgebra:
    """
    A model with exactly n elements, grown from a singleton by one
    amalgamation with n - 1 extra elements
    """
    if n < 1:
        raise ValidationException("algebras are nonempty")
    if sat.is_trivial() and n > 1:
        raise TrivialTheoryException(f"a trivial theory has no {n}-element model")
    seed = singleton(sat.signature, "0")
    if n == 1:
        return seed
    extra = [str(i) for i in range(1, n)]
    return amalgamate(sat, AmalgamationInput(seed, seed, seed), policy or FixedElement("0"),
                      extra_elements=extra, name=f"M{n}")


# ---------------------------------------------------------------------------
# h/k expansions
# ---------------------------------------------------------------------------

def hk_signature(base: Signature) -> Signature:
    return base.extend({AppConfig.H_OP: 1, AppConfig.K_OP: 1})


def hk_laws(signature: Signature, respected_ops: Sequence[str]) -> List[Equation]:
    """k(h(x)) = x, h(k(x)) = x, h(c) = c and h(f(x1,...)) = f(h(x1),...) for respected f"""
    h, k = AppConfig.H_OP, AppConfig.K_OP
    x = Variable("x")
    laws = [Equation(app(k, app(h, x)), x), Equation(app(h, app(k, x)), x)]
    laws += [Equation(app(h, Constant(c)), Constant(c)) for c in signature.sorted_constants()]
    for f in respected_ops:
        xs = [Variable(f"x{i}") for i in range(signature.arity(f))]
        laws.append(Equation(app(h, app(f, *xs)), app(f, *[app(h, v) for v in xs])))
    return laws


def _check_hk_inputs(sat: SaturatedTheory, algebras: Sequence[Tuple[str, FiniteAlgebra]],
                     respected_ops: Sequence[str]) -> List[Equation]:
    expected = hk_signature(sat.signature)
    unknown = set(respected_ops) - set(sat.signature.op_names)
    if unknown:
        raise HkPreconditionException(f"respected operations {sorted(unknown)} are not in the base signature")
    laws = hk_laws(expected, respected_ops)
    for label, X in algebras:
        if X.signature != expected:
            raise SignatureMismatchException(f"{label} is over {X.signature}, expected {expected}")
        for law in laws:
            if not satisfies(X, law):
                raise HkPreconditionException(f"{label} violates {law}", details={"law": str(law)})
    return laws


def _extend_hk(D0: FiniteAlgebra, sources: Sequence[FiniteAlgebra], fresh: Sequence[str],
               signature: Signature) -> FiniteAlgebra:
    index = {e: i for i, e in enumerate(D0.carrier)}
    tables = {}
    for op in (AppConfig.H_OP, AppConfig.K_OP):
        table = np.empty(D0.size, dtype=np.int64)
        for e in D0.carrier:
            if e in fresh:
                table[index[e]] = index[e]
                continue
            X = next(S for S in sources if e in S)
            table[index[e]] = index[X.op(op, e)]
        tables[op] = table
    return D0.expanded(signature, tables)


def _verify_hk(D: FiniteAlgebra, laws: Sequence[Equation], sat: SaturatedTheory) -> FiniteAlgebra:
    for law in laws:
        if not satisfies(D, law):
            raise InvariantViolationException(f"h/k expansion violates {law}", details={"law": str(law)})
    for eq in sat.base.axioms:
        if not satisfies(D, eq):
            raise InvariantViolationException(f"h/k expansion violates {eq}")
    return D.with_verified(True)


def amalgamate_hk(sat: SaturatedTheory, inp: AmalgamationInput,
                  respected_ops: Sequence[str] = ()) -> FiniteAlgebra:
    """
    Strong amalgam of algebras carrying a bijection h with inverse k

    The reducts are amalgamated with a fresh default element, h and k are
    extended from A and B and fixed at the fresh element, and the h/k laws
    are re-checked on the result.

    Args:
        sat: saturated base theory (without h and k)
        inp: triple over the base signature extended by h and k
        respected_ops: operations h is assumed to commute with

    Returns:
        FiniteAlgebra: the expanded amalgam
    """
    algebras = [("A", inp.A), ("B", inp.B)] + ([("C", inp.C)] if inp.C is not None else [])
    laws = _check_hk_inputs(sat, algebras, respected_ops)
    base_ops = sat.signature.op_names
    reduct = AmalgamationInput(inp.A.reduct(base_ops), inp.B.reduct(base_ops),
                               inp.C.reduct(base_ops) if inp.C is not None else None)
    fresh = FreshElement()
    D0 = amalgamate(sat, reduct, fresh, name="D_hk")
    D = _extend_hk(D0, [inp.A, inp.B], [fresh.name], inp.A.signature)
    if not (is_subalgebra(inp.A, D) and is_subalgebra(inp.B, D)):
        raise InvariantViolationException("h/k expansion does not extend the inputs")
    logger.info(f"h/k amalgam of size {D.size}, respected operations {list(respected_ops)}")
    return _verify_hk(D, laws, sat)


def joint_embed_hk(sat: SaturatedTheory, A: FiniteAlgebra, B: FiniteAlgebra,
                   respected_ops: Sequence[str] = ()) -> FiniteAlgebra:
    """Joint embedding of h/k-expanded algebras, in the same two cases as joint_embed"""
    _check_hk_inputs(sat, [("A", A), ("B", B)], respected_ops)
    case = _jep_case(sat)
    if case == "equilinear":
        B2, _ = rename_apart(A, B)
        return amalgamate_hk(sat, AmalgamationInput(A, B2, None), respected_ops)
    c = sat.signature.sorted_constants()[0]
    B2, _ = rename_apart(A, B, {B.const(c): A.const(c)})
    return amalgamate_hk(sat, AmalgamationInput(A, B2, A.subalgebra([A.const(c)], name="C")), respected_ops)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def search_amalgam_on_union(theory: EquationalTheory, inp: AmalgamationInput,
                            budget: Optional[int] = None) -> Optional[FiniteAlgebra]:
    """
    Exhaustive search for a model on A ∪ B extending A and B

    Args:
        theory: arbitrary equations
        inp: the triple (only overlap and subalgebra conditions are checked)
        budget: cap on |D|^(free entries)

    Returns:
        Optional[FiniteAlgebra]: a witness, or None when no completion exists
    """
    budget = budget if budget is not None else AppConfig.SEARCH_BUDGET
    A, B = inp.A, inp.B
    overlap = set(A.carrier) & set(B.carrier)
    if overlap != set(inp.common()):
        raise OverlapMismatchException(f"A and B share {sorted(overlap)}, C is {sorted(inp.common())}")
    if inp.C is not None:
        for X, label in ((A, "A"), (B, "B")):
            if not is_subalgebra(inp.C, X):
                raise SubalgebraFailureException(f"C is not a subalgebra of {label}")
    if A.constants != B.constants:
        logger.info("A and B interpret constants differently; no common extension on the union")
        return None

    carrier = inp.union_carrier()
    n = len(carrier)
    position = {e: i for i, e in enumerate(carrier)}
    partial = {}
    free = 0
    for op, arity in theory.signature.operations:
        table = np.full((n,) * arity, -1, dtype=np.int64)
        for X in (A, B):
            idx = np.array([position[e] for e in X.carrier], dtype=np.int64)
            table[np.ix_(*([idx] * arity))] = idx[X.tables[op]]
        free += int(np.count_nonzero(table < 0))
        partial[op] = table
    needed = n ** free
    if needed > budget:
        raise BudgetExceededException(needed, budget, "amalgam-on-union search")
    logger.info(f"searching {free} free entries on a {n}-element union")

    search = CompletionSearch(theory, n, partial, {c: position[e] for c, e in A.constants.items()},
                              budget, "amalgam-on-union search")
    tables = search.first()
    if tables is None:
        return None
    return FiniteAlgebra(theory.signature, carrier, tables, A.constants, verified=True, name="D")


@dataclass(frozen=True)
class JointEmbeddingWitness:
    D: FiniteAlgebra
    embed_A: Dict[str, str]
    embed_B: Dict[str, str]


def search_joint_embedding(theory: EquationalTheory, A: FiniteAlgebra, B: FiniteAlgebra,
                           max_size: int, budget: Optional[int] = None) -> Optional[JointEmbeddingWitness]:
    """Scan all models up to max_size for one that both A and B embed into"""
    for size in range(max(A.size, B.size, 1), max_size + 1):
        for D in enumerate_models(theory.signature, theory, size, budget):
            embed_A = find_embedding(A, D)
            if embed_A is None:
                continue
            embed_B = find_embedding(B, D)
            if embed_B is not None:
                logger.info(f"joint embedding found at size {size}")
                return JointEmbeddingWitness(D, embed_A, embed_B)
    logger.info(f"no joint embedding up to size {max_size}")
    return None


def random_triple(theory: EquationalTheory, C: FiniteAlgebra, rng: random.Random,
                  max_size: int = 4, budget: Optional[int] = None) -> Optional[AmalgamationInput]:
    """
    Two random models extending C, on carriers C + a<i> and C + b<i>

    Returns:
        Optional[AmalgamationInput]: None when C has no extension of the drawn size
    """
    if max_size < C.size:
        raise ValidationException(f"max_size {max_size} is below |C| = {C.size}")
    sides = []
    for label, prefix in (("A", "a"), ("B", "b")):
        extra = rng.randint(0, max_size - C.size)
        carrier = list(C.carrier) + [f"{prefix}{i}" for i in range(extra)]
        X = random_model(theory, carrier, rng, base=C, budget=budget)
        if X is None:
            logger.debug(f"no {len(carrier)}-element model extends C")
            return None
        sides.append(X.renamed({}, name=label))
    return AmalgamationInput(sides[0], sides[1], C)
