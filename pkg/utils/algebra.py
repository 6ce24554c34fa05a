"""
LinAmalg finite algebras
Dense operation tables, satisfaction checks, subalgebras and embedding search
"""

import itertools
import logging
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config.settings import AppConfig
from utils.exceptions import (
    BudgetExceededException,
    MissingBindingException,
    SignatureMismatchException,
    ValidationException,
)
from utils.terms import (
    Application,
    Constant,
    Equation,
    EquationalTheory,
    Signature,
    Term,
    Variable,
    check_term,
    equation_variables,
    variables_of,
)

logger = logging.getLogger(__name__)

Assignment = Mapping[str, str]


class FiniteAlgebra:
    """
    A finite algebra with named elements.

    Tables are read-only numpy integer arrays of shape (n,) * arity whose
    entries are carrier positions. `verified` is True once the algebra was
    exhaustively model-checked, None when the check was skipped.
    """

    def __init__(self,
                 signature: Signature,
                 carrier: Sequence[str],
                 tables: Mapping[str, np.ndarray],
                 constants: Optional[Mapping[str, str]] = None,
                 verified: Optional[bool] = None,
                 name: str = ""):
        self.signature = signature
        self.carrier: Tuple[str, ...] = tuple(str(e) for e in carrier)
        self.name = name
        self.verified = verified
        if not self.carrier:
            raise ValidationException("algebras must have a nonempty carrier")
        if len(set(self.carrier)) != len(self.carrier):
            raise ValidationException(f"duplicate element names in carrier {self.carrier}")
        self._index: Dict[str, int] = {e: i for i, e in enumerate(self.carrier)}

        n = len(self.carrier)
        self.tables: Dict[str, np.ndarray] = {}
        for op, arity in signature.operations:
            if op not in tables:
                raise SignatureMismatchException(f"missing table for {op}")
            table = np.array(tables[op], dtype=np.int64)
            if table.shape != (n,) * arity:
                raise SignatureMismatchException(
                    f"table of {op} has shape {table.shape}, expected {(n,) * arity}")
            if table.size and (table.min() < 0 or table.max() >= n):
                raise ValidationException(f"table of {op} leaves the carrier")
            table.setflags(write=False)
            self.tables[op] = table
        extra = set(tables) - set(signature.op_names)
        if extra:
            raise SignatureMismatchException(f"tables for unknown operations {sorted(extra)}")

        constants = dict(constants or {})
        if set(constants) != set(signature.constants):
            raise SignatureMismatchException(
                f"constant interpretation covers {sorted(constants)}, "
                f"signature has {signature.sorted_constants()}")
        for c, e in constants.items():
            if e not in self._index:
                raise ValidationException(f"constant '{c} interpreted outside the carrier by {e}")
        self.constants: Dict[str, str] = constants

    # -- construction helpers ----------------------------------------------

    @classmethod
    def from_function(cls,
                      signature: Signature,
                      carrier: Sequence[str],
                      operations: Mapping[str, Callable[..., str]],
                      constants: Optional[Mapping[str, str]] = None,
                      name: str = "") -> "FiniteAlgebra":
        """Tabulate Python callables over the carrier (callables take and return element names)"""
        carrier = tuple(carrier)
        index = {e: i for i, e in enumerate(carrier)}
        tables = {}
        for op, arity in signature.operations:
            table = np.empty((len(carrier),) * arity, dtype=np.int64)
            for combo in itertools.product(range(len(carrier)), repeat=arity):
                table[combo] = index[operations[op](*(carrier[i] for i in combo))]
            tables[op] = table
        return cls(signature, carrier, tables, constants, name=name)

    @classmethod
    def from_entries(cls,
                     signature: Signature,
                     carrier: Sequence[str],
                     entries: Mapping[str, Mapping[Tuple[str, ...], str]],
                     constants: Optional[Mapping[str, str]] = None,
                     name: str = "") -> "FiniteAlgebra":
        """Build from explicit per-tuple entries; every tuple must be present"""
        carrier = tuple(carrier)

        def lookup(op):
            table = entries.get(op, {})

            def f(*args):
                if args not in table:
                    raise ValidationException(f"table of {op} is partial: no entry for {op}({','.join(args)})")
                return table[args]
            return f

        return cls.from_function(signature, carrier, {op: lookup(op) for op in signature.op_names},
                                 constants, name)

    # -- accessors ---------------------------------------------------------

    @property
    def size(self) -> int:
        return len(self.carrier)

    def __len__(self) -> int:
        return len(self.carrier)

    def __contains__(self, element: str) -> bool:
        return element in self._index

    def index(self, element: str) -> int:
        try:
            return self._index[element]
        except KeyError:
            raise ValidationException(f"{element} is not an element of {self.name or 'the algebra'}")

    def op(self, name: str, *args: str) -> str:
        """Table lookup by element names"""
        return self.carrier[int(self.tables[name][tuple(self.index(a) for a in args)])]

    def const(self, c: str) -> str:
        return self.constants[c]

    def constant_elements(self) -> Dict[str, List[str]]:
        """element -> constants it interprets"""
        out: Dict[str, List[str]] = {}
        for c in sorted(self.constants):
            out.setdefault(self.constants[c], []).append(c)
        return out

    def entries(self, op: str) -> Iterable[Tuple[Tuple[str, ...], str]]:
        arity = self.signature.arity(op)
        for combo in itertools.product(range(self.size), repeat=arity):
            yield tuple(self.carrier[i] for i in combo), self.carrier[int(self.tables[op][combo])]

    # -- derived algebras --------------------------------------------------

    def renamed(self, mapping: Mapping[str, str], name: Optional[str] = None) -> "FiniteAlgebra":
        carrier = [mapping.get(e, e) for e in self.carrier]
        return FiniteAlgebra(self.signature, carrier, self.tables,
                             {c: mapping.get(e, e) for c, e in self.constants.items()},
                             self.verified, name if name is not None else self.name)

    def reordered(self, order: Sequence[str]) -> "FiniteAlgebra":
        """Same algebra with the carrier listed in the given order"""
        if sorted(order) != sorted(self.carrier):
            raise ValidationException("reordering must list every element exactly once")
        perm = np.array([self.index(e) for e in order], dtype=np.int64)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(len(perm))
        tables = {op: inverse[self.tables[op][np.ix_(*([perm] * arity))]]
                  for op, arity in self.signature.operations}
        return FiniteAlgebra(self.signature, order, tables, self.constants, self.verified, self.name)

    def canonical(self) -> "FiniteAlgebra":
        return self.reordered(sorted(self.carrier))

    def generated(self, elements: Iterable[str]) -> List[str]:
        """Carrier of the subalgebra generated by the elements and the constants, in carrier order"""
        inside = np.zeros(self.size, dtype=bool)
        for e in list(elements) + list(self.constants.values()):
            inside[self.index(e)] = True
        while True:
            members = np.flatnonzero(inside)
            grown = inside.copy()
            for op, arity in self.signature.operations:
                if members.size:
                    grown[self.tables[op][np.ix_(*([members] * arity))].ravel()] = True
            if np.array_equal(grown, inside):
                break
            inside = grown
        return [self.carrier[i] for i in np.flatnonzero(inside)]

    def subalgebra(self, elements: Iterable[str], name: str = "") -> "FiniteAlgebra":
        """The subalgebra on exactly these elements; they must be closed"""
        wanted = set(elements)
        members = [e for e in self.carrier if e in wanted]
        if set(self.generated(members)) != set(members):
            raise ValidationException(f"{sorted(members)} is not closed under the operations")
        idx = np.array([self.index(e) for e in members], dtype=np.int64)
        local = np.full(self.size, -1, dtype=np.int64)
        local[idx] = np.arange(len(idx))
        tables = {op: local[self.tables[op][np.ix_(*([idx] * arity))]]
                  for op, arity in self.signature.operations}
        return FiniteAlgebra(self.signature, members, tables, self.constants, self.verified, name)

    def reduct(self, op_names: Iterable[str]) -> "FiniteAlgebra":
        sig = self.signature.restrict(op_names)
        return FiniteAlgebra(sig, self.carrier, {op: self.tables[op] for op in sig.op_names},
                             self.constants, None, self.name)

    def expanded(self, signature: Signature, tables: Mapping[str, np.ndarray]) -> "FiniteAlgebra":
        merged = dict(self.tables)
        merged.update(tables)
        return FiniteAlgebra(signature, self.carrier, merged, self.constants, None, self.name)

    def with_verified(self, verified: Optional[bool]) -> "FiniteAlgebra":
        return FiniteAlgebra(self.signature, self.carrier, self.tables, self.constants, verified, self.name)

    # -- comparison --------------------------------------------------------

    def _key(self):
        return (self.signature, self.carrier,
                tuple((op, self.tables[op].tobytes()) for op in self.signature.op_names),
                tuple(sorted(self.constants.items())))

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteAlgebra) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        label = f"{self.name} " if self.name else ""
        return f"FiniteAlgebra({label}{{{','.join(self.carrier)}}}, {self.signature})"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate(alg: FiniteAlgebra, t: Term, a: Assignment) -> str:
    """
    Evaluate a term under an assignment

    Args:
        alg: the algebra
        t: term over alg's signature
        a: variable name -> element name, covering variables_of(t)

    Returns:
        str: the value
    """
    missing = variables_of(t) - set(a)
    if missing:
        raise MissingBindingException(f"no value for {sorted(missing)} in {t}",
                                      details={"missing": sorted(missing)})
    check_term(alg.signature, t)

    def walk(s: Term) -> int:
        if isinstance(s, Variable):
            return alg.index(a[s.name])
        if isinstance(s, Constant):
            return alg.index(alg.const(s.name))
        return int(alg.tables[s.op][tuple(walk(x) for x in s.args)])

    return alg.carrier[walk(t)]


def evaluate_all(alg: FiniteAlgebra, t: Term, names: Sequence[str]) -> np.ndarray:
    """Values of t under every assignment of `names`, as an array of shape (n,) * len(names)"""
    shape = (alg.size,) * len(names)
    grids = np.indices(shape, dtype=np.int64) if names else np.zeros((0,), dtype=np.int64)
    position = {name: i for i, name in enumerate(names)}

    def walk(s: Term) -> np.ndarray:
        if isinstance(s, Variable):
            return grids[position[s.name]]
        if isinstance(s, Constant):
            return np.full(shape, alg.index(alg.const(s.name)), dtype=np.int64)
        return np.asarray(alg.tables[s.op][tuple(walk(x) for x in s.args)])

    return walk(t)


def satisfies(alg: FiniteAlgebra, eq: Equation) -> bool:
    """True iff lhs = rhs under every assignment"""
    check_term(alg.signature, eq.lhs)
    check_term(alg.signature, eq.rhs)
    names = sorted(equation_variables(eq))
    return bool(np.array_equal(evaluate_all(alg, eq.lhs, names), evaluate_all(alg, eq.rhs, names)))


def counterexample(alg: FiniteAlgebra, eq: Equation) -> Optional[Dict[str, str]]:
    """An assignment violating eq, or None"""
    names = sorted(equation_variables(eq))
    diff = evaluate_all(alg, eq.lhs, names) != evaluate_all(alg, eq.rhs, names)
    if not np.any(diff):
        return None
    first = np.argwhere(diff)[0] if names else []
    return {name: alg.carrier[int(i)] for name, i in zip(names, first)}


def is_model(alg: FiniteAlgebra, theory: EquationalTheory) -> bool:
    if alg.signature != theory.signature:
        raise SignatureMismatchException(f"algebra over {alg.signature}, theory over {theory.signature}")
    return all(satisfies(alg, eq) for eq in theory.axioms)


def verification_cost(size: int, theory: EquationalTheory) -> int:
    """Number of assignments an exhaustive is_model sweep evaluates"""
    return sum(size ** len(equation_variables(eq)) for eq in theory.axioms)


# ---------------------------------------------------------------------------
# Subalgebras and embeddings
# ---------------------------------------------------------------------------

def is_subalgebra(C: FiniteAlgebra, A: FiniteAlgebra) -> bool:
    """
    Literal substructure test: C's elements are A's elements (by name), and
    constants and tables agree on C
    """
    if C.signature != A.signature:
        raise SignatureMismatchException(f"{C.signature} vs {A.signature}")
    if not set(C.carrier) <= set(A.carrier):
        return False
    if C.constants != A.constants:
        return False
    cmap = np.array([A.index(e) for e in C.carrier], dtype=np.int64)
    for op, arity in C.signature.operations:
        block = A.tables[op][np.ix_(*([cmap] * arity))]
        if not np.array_equal(block, cmap[C.tables[op]]):
            return False
    return True


def is_homomorphism(mapping: Mapping[str, str], A: FiniteAlgebra, D: FiniteAlgebra) -> bool:
    """Exhaustive check of h(f_A(e)) = f_D(h(e)) and h(c_A) = c_D"""
    if set(mapping) != set(A.carrier):
        return False
    m = np.array([D.index(mapping[e]) for e in A.carrier], dtype=np.int64)
    for op, arity in A.signature.operations:
        if not np.array_equal(m[A.tables[op]], D.tables[op][np.ix_(*([m] * arity))]):
            return False
    return all(mapping[A.const(c)] == D.const(c) for c in A.signature.constants)


def _propagate(A: FiniteAlgebra, D: FiniteAlgebra, m: np.ndarray, used: np.ndarray) -> bool:
    """Extend the partial map m along the operations; False on conflict"""
    while True:
        assigned = np.flatnonzero(m >= 0)
        grew = False
        for op, arity in A.signature.operations:
            src = A.tables[op][np.ix_(*([assigned] * arity))]
            dst = D.tables[op][np.ix_(*([m[assigned]] * arity))]
            img = m[src]
            if np.any((img >= 0) & (img != dst)):
                return False
            pending = img < 0
            for a_idx, d_idx in zip(src[pending].tolist(), dst[pending].tolist()):
                if m[a_idx] >= 0:
                    if m[a_idx] != d_idx:
                        return False
                    continue
                if used[d_idx]:
                    return False
                m[a_idx] = d_idx
                used[d_idx] = True
                grew = True
        if not grew:
            return True


def find_embedding(A: FiniteAlgebra, D: FiniteAlgebra,
                   fixed: Optional[Mapping[str, str]] = None) -> Optional[Dict[str, str]]:
    """
    Backtracking search for an injective homomorphism A -> D

    Args:
        A: source algebra
        D: target algebra over the same signature
        fixed: images prescribed in advance

    Returns:
        Optional[Dict]: element map, first in carrier order, or None
    """
    if A.signature != D.signature:
        raise SignatureMismatchException(f"{A.signature} vs {D.signature}")
    if A.size > D.size:
        return None
    m = np.full(A.size, -1, dtype=np.int64)
    used = np.zeros(D.size, dtype=bool)
    seeds = [(A.const(c), D.const(c)) for c in A.signature.sorted_constants()]
    seeds += list((fixed or {}).items())
    for a, d in seeds:
        ai, di = A.index(a), D.index(d)
        if m[ai] >= 0:
            if m[ai] != di:
                return None
            continue
        if used[di]:
            return None
        m[ai], used[di] = di, True
    if not _propagate(A, D, m, used):
        return None

    def search(m: np.ndarray, used: np.ndarray) -> Optional[np.ndarray]:
        free = np.flatnonzero(m < 0)
        if free.size == 0:
            return m
        a = int(free[0])
        for d in np.flatnonzero(~used).tolist():
            m2, used2 = m.copy(), used.copy()
            m2[a], used2[d] = d, True
            if _propagate(A, D, m2, used2):
                found = search(m2, used2)
                if found is not None:
                    return found
        return None

    found = search(m, used)
    if found is None:
        return None
    mapping = {A.carrier[i]: D.carrier[int(j)] for i, j in enumerate(found)}
    logger.debug(f"embedding {A!r} -> {D!r}: {mapping}")
    return mapping


def is_isomorphic(A: FiniteAlgebra, B: FiniteAlgebra) -> bool:
    if A.size != B.size or A.signature != B.signature:
        return False
    for op in A.signature.op_names:
        if sorted(np.bincount(A.tables[op].ravel(), minlength=A.size)) != \
                sorted(np.bincount(B.tables[op].ravel(), minlength=B.size)):
            return False
    return find_embedding(A, B) is not None


def iso_filter(algebras: Iterable[FiniteAlgebra], max_size: Optional[int] = None) -> List[FiniteAlgebra]:
    """Keep the first representative of each isomorphism class, preserving order"""
    max_size = max_size if max_size is not None else AppConfig.ISO_MAX_SIZE
    kept: List[FiniteAlgebra] = []
    for alg in algebras:
        if alg.size > max_size:
            raise BudgetExceededException(alg.size, max_size, "isomorphism filtering")
        if not any(is_isomorphic(alg, k) for k in kept):
            kept.append(alg)
    return kept


def enumerate_models(signature: Signature, theory: EquationalTheory, n: int,
                     budget: Optional[int] = None) -> List[FiniteAlgebra]:
    """All models of theory on the carrier {0,...,n-1}, up to table identity"""
    from utils.model_search import enumerate_models as _enumerate
    if theory.signature != signature:
        raise SignatureMismatchException(f"theory is over {theory.signature}, not {signature}")
    return _enumerate(theory, n, budget)
