"""
LinAmalg model search
Backtracking completion of partial operation tables against arbitrary equations,
shared by the model enumerator and the amalgam-on-union oracle
"""

import itertools
import logging
import random
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from config.settings import AppConfig
from utils.exceptions import BudgetExceededException
from utils.terms import Application, Constant, EquationalTheory, Term, Variable, equation_variables

logger = logging.getLogger(__name__)


class CompletionSearch:
    """
    Depth-first completion of partial tables.

    Tables are padded to shape (n+1,) * arity; the index n stands for an
    unknown value and propagates through evaluation. An equation is violated
    when both sides are known and differ. When one side is known and the other
    is an application with known arguments and an unknown entry, that entry
    is forced.
    """

    def __init__(self,
                 theory: EquationalTheory,
                 n: int,
                 partial: Mapping[str, np.ndarray],
                 constants: Mapping[str, int],
                 budget: Optional[int] = None,
                 what: str = "table completion",
                 rng: Optional[random.Random] = None):
        self.theory = theory
        self.n = n
        self.constants = dict(constants)
        self.budget = budget if budget is not None else AppConfig.SEARCH_BUDGET
        self.what = what
        self.rng = rng
        self.nodes = 0

        self.start: Dict[str, np.ndarray] = {}
        for op, arity in theory.signature.operations:
            ext = np.full((n + 1,) * arity, n, dtype=np.int64)
            block = np.asarray(partial[op], dtype=np.int64)
            ext[(slice(0, n),) * arity] = np.where(block < 0, n, block)
            self.start[op] = ext

        self._equations: List[Tuple[Term, Term, Dict[str, int], Tuple[int, ...], np.ndarray]] = []
        for eq in theory.axioms:
            names = sorted(equation_variables(eq))
            shape = (n,) * len(names)
            grids = np.indices(shape, dtype=np.int64) if names else np.zeros((0,), dtype=np.int64)
            self._equations.append((eq.lhs, eq.rhs, {v: i for i, v in enumerate(names)}, shape, grids))

    def _eval(self, t: Term, tables, position, shape, grids) -> np.ndarray:
        if isinstance(t, Variable):
            return grids[position[t.name]]
        if isinstance(t, Constant):
            return np.full(shape, self.constants[t.name], dtype=np.int64)
        return np.asarray(tables[t.op][tuple(self._eval(a, tables, position, shape, grids) for a in t.args)])

    def _force(self, side: Term, other: np.ndarray, tables, position, shape, grids) -> Optional[bool]:
        """Write entries forced by `other`; None on conflict, else whether anything was written"""
        if not isinstance(side, Application):
            return False
        n = self.n
        args = [self._eval(a, tables, position, shape, grids) for a in side.args]
        table = tables[side.op]
        values = table[tuple(args)]
        mask = (values == n) & (other < n)
        for a in args:
            mask &= a < n
        if not np.any(mask):
            return False
        cells = np.stack([a[mask] for a in args], axis=1).tolist()
        for cell, v in zip(cells, other[mask].tolist()):
            cell = tuple(cell)
            current = table[cell]
            if current == n:
                table[cell] = v
            elif current != v:
                return None
        return True

    def propagate(self, tables) -> bool:
        while True:
            wrote = False
            for lhs, rhs, position, shape, grids in self._equations:
                left = self._eval(lhs, tables, position, shape, grids)
                right = self._eval(rhs, tables, position, shape, grids)
                if np.any((left < self.n) & (right < self.n) & (left != right)):
                    return False
                for side, other in ((lhs, right), (rhs, left)):
                    forced = self._force(side, other, tables, position, shape, grids)
                    if forced is None:
                        return False
                    wrote = wrote or forced
            if not wrote:
                return True

    def _next_cell(self, tables) -> Optional[Tuple[str, Tuple[int, ...]]]:
        n = self.n
        for op, arity in self.theory.signature.operations:
            core = tables[op][(slice(0, n),) * arity]
            unknown = np.argwhere(core == n)
            if len(unknown):
                return op, tuple(int(i) for i in unknown[0])
        return None

    def solutions(self) -> Iterator[Dict[str, np.ndarray]]:
        """Every completion satisfying the theory, in lexicographic cell/value order"""
        tables = {op: t.copy() for op, t in self.start.items()}
        if not self.propagate(tables):
            return
        stack = [tables]
        while stack:
            tables = stack.pop()
            cell = self._next_cell(tables)
            if cell is None:
                yield {op: t[(slice(0, self.n),) * t.ndim].copy() for op, t in tables.items()}
                continue
            op, idx = cell
            children = []
            values = list(range(self.n))
            if self.rng is not None:
                self.rng.shuffle(values)
            for v in values:
                self.nodes += 1
                if self.nodes > self.budget:
                    raise BudgetExceededException(self.nodes, self.budget, self.what)
                child = {name: t.copy() for name, t in tables.items()}
                child[op][idx] = v
                if self.propagate(child):
                    children.append(child)
            stack.extend(reversed(children))

    def first(self) -> Optional[Dict[str, np.ndarray]]:
        return next(iter(self.solutions()), None)


def naive_table_count(n: int, max_arity: int) -> int:
    return n ** (n ** max_arity)


def enumerate_models(theory: EquationalTheory, n: int, budget: Optional[int] = None):
    """
    All models of the theory on the carrier {0,...,n-1}, up to table identity

    Args:
        theory: arbitrary equations
        n: carrier size
        budget: cap on n^(n^max-arity) candidate tables

    Returns:
        List[FiniteAlgebra]: verified models in deterministic order
    """
    from utils.algebra import FiniteAlgebra

    budget = budget if budget is not None else AppConfig.ENUMERATION_BUDGET
    sig = theory.signature
    naive = naive_table_count(n, sig.max_arity)
    if naive > budget:
        raise BudgetExceededException(naive, budget, f"enumerating {n}-element models")
    carrier = [str(i) for i in range(n)]
    constants = sig.sorted_constants()
    models = []
    for interp in itertools.product(range(n), repeat=len(constants)):
        partial = {op: np.full((n,) * arity, -1, dtype=np.int64) for op, arity in sig.operations}
        search = CompletionSearch(theory, n, partial, dict(zip(constants, interp)),
                                  budget, f"enumerating {n}-element models")
        for tables in search.solutions():
            models.append(FiniteAlgebra(sig, carrier, tables,
                                        {c: carrier[i] for c, i in zip(constants, interp)},
                                        verified=True))
    logger.info(f"enumerated {len(models)} models of size {n}")
    return models


def random_model(theory: EquationalTheory,
                 carrier,
                 rng: random.Random,
                 base=None,
                 budget: Optional[int] = None):
    """
    A model on `carrier` chosen by randomized completion, extending `base` when given

    Returns:
        Optional[FiniteAlgebra]: None when no completion exists
    """
    from utils.algebra import FiniteAlgebra

    carrier = list(carrier)
    n = len(carrier)
    sig = theory.signature
    position = {e: i for i, e in enumerate(carrier)}
    partial = {op: np.full((n,) * arity, -1, dtype=np.int64) for op, arity in sig.operations}
    if base is not None:
        idx = np.array([position[e] for e in base.carrier], dtype=np.int64)
        for op, arity in sig.operations:
            partial[op][np.ix_(*([idx] * arity))] = idx[base.tables[op]]
        constants = {c: position[e] for c, e in base.constants.items()}
    else:
        constants = {c: rng.randrange(n) for c in sig.sorted_constants()}
    search = CompletionSearch(theory, n, partial, constants, budget, f"random {n}-element model", rng)
    tables = search.first()
    if tables is None:
        return None
    return FiniteAlgebra(sig, carrier, tables, {c: carrier[i] for c, i in constants.items()}, verified=True)
