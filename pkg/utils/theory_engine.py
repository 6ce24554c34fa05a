"""
LinAmalg theory engine
Saturates a linear theory under its derivable flat consequences and answers
validity, collapse, triviality, constant-merge and exceptional-variable queries
"""

import itertools
import logging
import threading
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from config.settings import AppConfig
from utils.exceptions import (
    BudgetExceededException,
    InvariantViolationException,
    LinearityException,
    TrivialTheoryException,
)
from utils.terms import (
    Application,
    Constant,
    Equation,
    LinearTheory,
    Term,
    Variable,
    check_equation,
    is_flat,
    variables_of,
)

logger = logging.getLogger(__name__)

Slot = Union[int, str]


@dataclass(frozen=True)
class VarClass:
    index: int

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class ConstNode:
    name: str

    def __str__(self) -> str:
        return f"'{self.name}"


@dataclass(frozen=True)
class Pattern:
    """A flat application whose variable slots hold class ids (int) and constant slots hold names (str)"""

    op: str
    slots: Tuple[Slot, ...]

    @property
    def class_ids(self) -> List[int]:
        seen: List[int] = []
        for s in self.slots:
            if isinstance(s, int) and s not in seen:
                seen.append(s)
        return seen

    @property
    def width(self) -> int:
        """Number of variables needed to host the pattern (max class id + 1)"""
        ids = [s for s in self.slots if isinstance(s, int)]
        return max(ids) + 1 if ids else 0

    def is_canonical(self) -> bool:
        return self.class_ids == list(range(len(self.class_ids)))

    def canonical(self) -> Tuple["Pattern", Dict[int, int]]:
        """Renumber classes in first-occurrence order; returns the pattern and the old->new map"""
        remap = {old: new for new, old in enumerate(self.class_ids)}
        return Pattern(self.op, tuple(remap[s] if isinstance(s, int) else s for s in self.slots)), remap

    def replace_class(self, old: int, new: int) -> "Pattern":
        return Pattern(self.op, tuple(new if s == old and isinstance(s, int) else s for s in self.slots))

    def to_term(self) -> Application:
        return Application(self.op, tuple(
            Variable(f"x{s}") if isinstance(s, int) else Constant(s) for s in self.slots))

    def __str__(self) -> str:
        return str(self.to_term())


Node = Union[Pattern, VarClass, ConstNode]


def slot_node(slot: Slot) -> Node:
    return VarClass(slot) if isinstance(slot, int) else ConstNode(slot)


def canonical_patterns(op: str, arity: int, constants: Sequence[str] = ()) -> Iterator[Pattern]:
    """Every canonical pattern of op: restricted-growth class ids mixed with constants"""

    def grow(prefix: List[Slot], used: int) -> Iterator[Pattern]:
        if len(prefix) == arity:
            yield Pattern(op, tuple(prefix))
            return
        for cls in range(used + 1):
            yield from grow(prefix + [cls], max(used, cls + 1))
        for c in constants:
            yield from grow(prefix + [c], used)

    yield from grow([], 0)


def term_to_node(t: Term, index: Mapping[str, int]) -> Node:
    """Encode a flat term given a variable-name -> class-id index"""

    def slot(a: Term) -> Slot:
        return index[a.name] if isinstance(a, Variable) else a.name

    if isinstance(t, Variable):
        return VarClass(index[t.name])
    if isinstance(t, Constant):
        return ConstNode(t.name)
    return Pattern(t.op, tuple(slot(a) for a in t.args))


class UnionFind:
    def __init__(self) -> None:
        self.parent: Dict[Node, Node] = {}
        self.rank: Dict[Node, int] = {}

    def add(self, x: Node) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.rank[x] = 0

    def find(self, x: Node) -> Node:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: Node, b: Node) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


class FlatClosure:
    """
    Ground congruence closure over every flat term built from k variables and the constants.

    Axiom instances under all atom substitutions are asserted; a variable that
    meets another atom makes the theory trivial, constants that meet are merged
    and congruence is propagated through applications.
    """

    def __init__(self, theory: LinearTheory, k: int, budget: Optional[int] = None):
        self.k = k
        self.signature = theory.signature
        self.constants = theory.signature.sorted_constants()
        self.trivial = False
        self.uf = UnionFind()

        slots: List[Slot] = list(range(k)) + list(self.constants)
        size = sum(len(slots) ** arity for _, arity in self.signature.operations)
        instances = sum(len(slots) ** len(variables_of(eq.lhs) | variables_of(eq.rhs))
                        for eq in theory.axioms)
        limit = budget if budget is not None else AppConfig.VERIFICATION_BUDGET
        if size + instances > limit:
            raise BudgetExceededException(size + instances, limit, f"flat closure k={k}")

        self.atoms: List[Node] = [slot_node(s) for s in slots]
        self.patterns: List[Pattern] = []
        for node in self.atoms:
            self.uf.add(node)
        for op, arity in self.signature.operations:
            for combo in itertools.product(slots, repeat=arity):
                p = Pattern(op, combo)
                self.patterns.append(p)
                self.uf.add(p)

        for eq in theory.axioms:
            names = sorted(variables_of(eq.lhs) | variables_of(eq.rhs))
            for combo in itertools.product(slots, repeat=len(names)):
                binding = dict(zip(names, combo))
                self.uf.union(self._instantiate(eq.lhs, binding), self._instantiate(eq.rhs, binding))

        self._close()
        self._index_classes()
        logger.debug(f"flat closure k={k}: {len(self.patterns)} patterns, "
                     f"{len(self.classes)} classes, trivial={self.trivial}")

    @staticmethod
    def _instantiate(t: Term, binding: Mapping[str, Slot]) -> Node:
        if isinstance(t, Variable):
            return slot_node(binding[t.name])
        if isinstance(t, Constant):
            return ConstNode(t.name)
        return Pattern(t.op, tuple(binding[a.name] if isinstance(a, Variable) else a.name for a in t.args))

    def _atom_merge_state(self) -> Tuple[bool, bool]:
        """(variable met another atom, two constants met)"""
        roots: Dict[Node, Node] = {}
        const_merge = False
        for atom in self.atoms:
            root = self.uf.find(atom)
            if root in roots:
                if isinstance(atom, VarClass) or isinstance(roots[root], VarClass):
                    return True, const_merge
                const_merge = True
            else:
                roots[root] = atom
        return False, const_merge

    def _close(self) -> None:
        while True:
            var_merge, const_merge = self._atom_merge_state()
            if var_merge:
                self.trivial = True
                return
            if not const_merge:
                return
            changed = False
            table: Dict[Tuple[str, Tuple[Node, ...]], Pattern] = {}
            for p in self.patterns:
                key = (p.op, tuple(self.uf.find(slot_node(s)) for s in p.slots))
                rep = table.setdefault(key, p)
                if rep is not p and self.uf.union(rep, p):
                    changed = True
            if not changed:
                return

    def _index_classes(self) -> None:
        buckets: Dict[Node, List[Node]] = {}
        for node in self.atoms + self.patterns:
            buckets.setdefault(self.uf.find(node), []).append(node)
        self.classes: List[List[Node]] = list(buckets.values())
        self.class_of: Dict[Node, int] = {}
        for i, members in enumerate(self.classes):
            for node in members:
                self.class_of[node] = i

    def same(self, a: Node, b: Node) -> bool:
        return self.class_of[a] == self.class_of[b]

    def atoms_with(self, node: Node) -> List[Node]:
        return [n for n in self.classes[self.class_of[node]] if not isinstance(n, Pattern)]


class SaturatedTheory:
    """
    Closure of a linear theory under its flat consequences.

    Closures for each variable budget k are built lazily and cached; the object
    is otherwise immutable and safe to query from several threads.
    """

    def __init__(self, base: LinearTheory, budget: Optional[int] = None):
        self.base = base
        self.budget = budget
        self._closures: Dict[int, FlatClosure] = {}
        self._lock = threading.Lock()
        self._exceptional_cache: Dict[Pattern, FrozenSet[int]] = {}
        self._collapse_cache: Dict[Pattern, Optional[Node]] = {}

        probe = self.closure(2)
        self.trivial = probe.trivial
        self._const_rep: Dict[str, str] = {}
        if not self.trivial:
            for c in base.signature.sorted_constants():
                merged = [a.name for a in probe.atoms_with(ConstNode(c)) if isinstance(a, ConstNode)]
                self._const_rep[c] = min(merged)
        else:
            for c in base.signature.sorted_constants():
                self._const_rep[c] = min(base.signature.constants)
        logger.info(f"saturated theory: {len(base.axioms)} axioms, trivial={self.trivial}, "
                    f"merged constants={self.merged_constant_classes()}")

    @property
    def signature(self):
        return self.base.signature

    def closure(self, k: int) -> FlatClosure:
        k = max(k, 1)
        with self._lock:
            cached = self._closures.get(k)
            if cached is None:
                cached = FlatClosure(self.base, k, self.budget)
                self._closures[k] = cached
            return cached

    def is_trivial(self) -> bool:
        return self.trivial

    def _require_nontrivial(self) -> None:
        if self.trivial:
            raise TrivialTheoryException("query needs a nontrivial theory")

    # -- constants ---------------------------------------------------------

    def merged_constant_rep(self, c: str) -> str:
        return self._const_rep.get(c, c)

    def merged_constant_classes(self) -> List[List[str]]:
        groups: Dict[str, List[str]] = {}
        for c, rep in sorted(self._const_rep.items()):
            groups.setdefault(rep, []).append(c)
        return [g for g in groups.values() if len(g) > 1]

    def with_merged_constants(self, pairs: Iterable[Tuple[str, str]]) -> "SaturatedTheory":
        """Saturate the theory extended by c1 = c2 for each pair"""
        extra = [Equation(Constant(a), Constant(b)) for a, b in pairs
                 if self.merged_constant_rep(a) != self.merged_constant_rep(b)]
        if not extra:
            return self
        return SaturatedTheory(LinearTheory(self.signature, self.base.axioms + tuple(extra)), self.budget)

    # -- queries -----------------------------------------------------------

    def is_valid_flat(self, eq: Equation) -> bool:
        """
        Decide a flat equation against the saturated theory

        Args:
            eq: equation whose two sides are flat

        Returns:
            bool: True when both sides fall into one class
        """
        if not (is_flat(eq.lhs) and is_flat(eq.rhs)):
            raise LinearityException(f"{eq} has a side of depth > 1", details={"equation": str(eq)})
        check_equation(self.signature, eq)
        if self.trivial:
            return True
        names = sorted(variables_of(eq.lhs) | variables_of(eq.rhs))
        index = {name: i for i, name in enumerate(names)}
        closure = self.closure(len(names))
        return closure.same(term_to_node(eq.lhs, index), term_to_node(eq.rhs, index))

    def collapse_target(self, p: Pattern) -> Optional[Node]:
        """
        The atom the pattern is forced to equal, if any

        Returns:
            VarClass(j) for a class occurring in p, ConstNode(rep) for a
            (merged) constant, or None
        """
        self._require_nontrivial()
        if p in self._collapse_cache:
            return self._collapse_cache[p]
        atoms = self.closure(p.width).atoms_with(p)
        variables = [a for a in atoms if isinstance(a, VarClass)]
        constants = sorted(a.name for a in atoms if isinstance(a, ConstNode))
        if len(variables) > 1 or (variables and constants):
            raise InvariantViolationException(
                f"{p} collapses to several atoms {[str(a) for a in atoms]} in a nontrivial theory")
        if variables:
            if variables[0].index not in p.class_ids:
                raise InvariantViolationException(f"{p} collapses to an absent variable {variables[0]}")
            target = variables[0]
        elif constants:
            target = ConstNode(self.merged_constant_rep(constants[0]))
        else:
            target = None
        with self._lock:
            self._collapse_cache[p] = target
        return target

    def exceptional_variables(self, p: Pattern) -> FrozenSet[int]:
        """Classes i such that p equals p with class i replaced by a fresh class"""
        self._require_nontrivial()
        cached = self._exceptional_cache.get(p)
        if cached is not None:
            return cached
        width = p.width
        closure = self.closure(width + 1)
        result = frozenset(i for i in p.class_ids if closure.same(p, p.replace_class(i, width)))
        with self._lock:
            self._exceptional_cache[p] = result
        return result

    # -- reports -----------------------------------------------------------

    def patterns_of(self, op: str) -> Iterator[Pattern]:
        return canonical_patterns(op, self.signature.arity(op), self.signature.sorted_constants())

    def collapse_table(self) -> Dict[Pattern, Node]:
        self._require_nontrivial()
        table = {}
        for op in self.signature.op_names:
            for p in self.patterns_of(op):
                target = self.collapse_target(p)
                if target is not None:
                    table[p] = target
        return table

    def exceptional_table(self) -> Dict[Pattern, FrozenSet[int]]:
        self._require_nontrivial()
        table = {}
        for op in self.signature.op_names:
            for p in self.patterns_of(op):
                exc = self.exceptional_variables(p)
                if exc:
                    table[p] = exc
        return table

    def as_theory(self) -> LinearTheory:
        """The base axioms plus every derived collapse, as a theory"""
        derived = []
        for p, target in self.collapse_table().items():
            rhs = Variable(f"x{target.index}") if isinstance(target, VarClass) else Constant(target.name)
            derived.append(Equation(p.to_term(), rhs))
        return LinearTheory(self.signature, self.base.axioms + tuple(derived))


def saturate(theory: LinearTheory, budget: Optional[int] = None) -> SaturatedTheory:
    if not isinstance(theory, LinearTheory):
        theory = LinearTheory.from_theory(theory)
    return SaturatedTheory(theory, budget)


def is_valid_flat(sat: SaturatedTheory, eq: Equation) -> bool:
    return sat.is_valid_flat(eq)


def collapse_target(sat: SaturatedTheory, p: Pattern) -> Optional[Node]:
    return sat.collapse_target(p)


def exceptional_variables(sat: SaturatedTheory, p: Pattern) -> FrozenSet[int]:
    return sat.exceptional_variables(p)


def is_trivial(sat: SaturatedTheory) -> bool:
    return sat.is_trivial()


def merged_constant_rep(sat: SaturatedTheory, c: str) -> str:
    return sat.merged_constant_rep(c)
