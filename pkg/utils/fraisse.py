"""
LinAmalg Fraisse chains
Finite stages of iterated amalgamation, with universality and one-point
extension checks
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from config.settings import AppConfig
from utils.algebra import FiniteAlgebra, enumerate_models, find_embedding, iso_filter, is_subalgebra
from utils.amalgam import (
    AmalgamationInput,
    DefaultPolicy,
    amalgamate,
    build_n_element,
    joint_embed,
    singleton,
)
from utils.exceptions import (
    BudgetExceededException,
    EmptyBaseException,
    SubalgebraFailureException,
    TrivialTheoryException,
    ValidationException,
)
from utils.theory_engine import SaturatedTheory

logger = logging.getLogger(__name__)


@dataclass
class ChainStep:
    """One scheduled extension: which seed, over which of its subalgebras, and where it landed"""

    step: int
    target: str
    over: Optional[List[str]]
    action: str
    mapping: Dict[str, str]
    size: int

    def to_dict(self) -> Dict:
        return {
            "step": self.step,
            "target": self.target,
            "over": self.over,
            "action": self.action,
            "mapping": self.mapping,
            "size": self.size
        }


@dataclass
class FraisseChain:
    sat: SaturatedTheory
    seeds: List[FiniteAlgebra]
    stages: List[FiniteAlgebra] = field(default_factory=list)
    log: List[ChainStep] = field(default_factory=list)

    @property
    def theory(self):
        return self.sat.base

    @property
    def final(self) -> FiniteAlgebra:
        return self.stages[-1]

    def seed(self, name: str) -> FiniteAlgebra:
        return next(s for s in self.seeds if s.name == name)


@dataclass
class UniversalityReport:
    stage_size: int
    embeddings: Dict[str, Optional[Dict[str, str]]]

    @property
    def missing(self) -> List[str]:
        return [name for name, emb in self.embeddings.items() if emb is None]

    @property
    def all_embedded(self) -> bool:
        return not self.missing


def generate_small_algebras(sat: SaturatedTheory, max_size: int,
                            count_budget: Optional[int] = None,
                            budget: Optional[int] = None) -> List[FiniteAlgebra]:
    """
    Pairwise non-isomorphic models of size 1..max_size

    Sizes within the enumeration budget are enumerated exhaustively; larger
    sizes fall back to one constructed model.

    Args:
        sat: saturated nontrivial theory
        max_size: largest carrier size
        count_budget: cap on the number of returned algebras
        budget: enumeration budget

    Returns:
        List[FiniteAlgebra]: named S<size>.<i>, in size then enumeration order
    """
    if sat.is_trivial():
        raise TrivialTheoryException("a trivial theory only has one-element models")
    count_budget = count_budget if count_budget is not None else AppConfig.SMALL_ALGEBRA_COUNT_BUDGET
    found: List[FiniteAlgebra] = []
    for n in range(1, max_size + 1):
        try:
            models = enumerate_models(sat.signature, sat.base, n, budget)
        except BudgetExceededException:
            logger.info(f"size {n} exceeds the enumeration budget; constructing one model instead")
            models = [build_n_element(sat, n)]
        distinct = iso_filter(models) if len(models) > 1 else models
        for i, alg in enumerate(distinct):
            found.append(alg.renamed({}, name=f"S{n}.{i}"))
        if len(found) > count_budget:
            raise BudgetExceededException(len(found), count_budget, "small algebra generation")
    logger.info(f"generated {len(found)} small algebras up to size {max_size}")
    return found


def _fresh_names(stage: FiniteAlgebra, count: int) -> List[str]:
    names, i = [], stage.size
    while len(names) < count:
        candidate = f"e{i}"
        if candidate not in stage:
            names.append(candidate)
        i += 1
    return names


def _place(stage: FiniteAlgebra, target: FiniteAlgebra,
           identify: Dict[str, str]) -> Tuple[FiniteAlgebra, Dict[str, str]]:
    """Rename target: identified elements take stage names, the rest fresh e<i> names"""
    rest = [e for e in target.carrier if e not in identify]
    mapping = dict(identify)
    mapping.update(zip(rest, _fresh_names(stage, len(rest))))
    return target.renamed(mapping), mapping


def extend_stage(sat: SaturatedTheory,
                 stage: FiniteAlgebra,
                 target: FiniteAlgebra,
                 over: Optional[FiniteAlgebra] = None,
                 embedding: Optional[Dict[str, str]] = None,
                 policy: Optional[DefaultPolicy] = None,
                 step: int = 0) -> Tuple[FiniteAlgebra, ChainStep]:
    """
    Extend the stage so that target embeds over the given common part

    Args:
        sat: saturated theory
        stage: current stage
        target: algebra to embed
        over: subalgebra of target shared with the stage (None: joint embedding)
        embedding: where `over` sits in the stage (found by search when omitted)
        policy: default policy for the amalgamation

    Returns:
        (next stage, log entry)
    """
    over_names = list(over.carrier) if over is not None else None
    if over is None:
        existing = find_embedding(target, stage)
    else:
        if not is_subalgebra(over, target):
            raise SubalgebraFailureException("the common part is not a subalgebra of the target")
        if embedding is None:
            embedding = find_embedding(over, stage)
        if embedding is None:
            raise ValidationException("the common part does not embed into the stage")
        existing = find_embedding(target, stage, fixed=embedding)

    if existing is not None:
        logger.debug(f"step {step}: {target.name} already embeds, skipping")
        return stage, ChainStep(step, target.name, over_names, "skip", existing, stage.size)

    if over is None:
        placed, mapping = _place(stage, target, {})
        nxt = joint_embed(sat, stage, placed, policy)
        action = "joint-embed"
    else:
        placed, mapping = _place(stage, target, dict(embedding))
        C = stage.subalgebra(embedding.values(), name="C")
        nxt = amalgamate(sat, AmalgamationInput(stage, placed, C), policy)
        action = "amalgamate"
    nxt = nxt.renamed({}, name=f"stage{step + 1}")
    logger.info(f"step {step}: {action} {target.name}, stage size {stage.size} -> {nxt.size}")
    return nxt, ChainStep(step, target.name, over_names, action, mapping, nxt.size)


def _schedule(seeds: Sequence[FiniteAlgebra]) -> List[Tuple[FiniteAlgebra, Optional[FiniteAlgebra]]]:
    """Whole seeds first, then each seed over each proper one-generated subalgebra"""
    tasks: List[Tuple[FiniteAlgebra, Optional[FiniteAlgebra]]] = [(s, None) for s in seeds]
    for s in seeds:
        seen = []
        for e in s.carrier:
            part = s.generated([e])
            if len(part) < s.size and part not in seen:
                seen.append(part)
                tasks.append((s, s.subalgebra(part)))
    return tasks


def _needs_base(sat: SaturatedTheory) -> bool:
    return bool(sat.signature.constants) or not sat.base.is_equilinear()


def _base_over(base: FiniteAlgebra, target: FiniteAlgebra,
               stage: FiniteAlgebra) -> Optional[Tuple[FiniteAlgebra, Dict[str, str]]]:
    into_target = find_embedding(base, target)
    into_stage = find_embedding(base, stage)
    if into_target is None or into_stage is None:
        return None
    over = target.subalgebra(into_target.values())
    return over, {into_target[b]: into_stage[b] for b in base.carrier}


def run_chain(sat: SaturatedTheory,
              seeds: Sequence[FiniteAlgebra],
              steps: int,
              base: Optional[FiniteAlgebra] = None,
              policy: Optional[DefaultPolicy] = None) -> FraisseChain:
    """
    Round-robin chain over the seeds, starting from the first one

    Whole-seed tasks are joint embeddings for equilinear constant-free
    theories when no shared point exists; otherwise every task amalgamates
    over the image of `base` (default: the subalgebra generated by the
    constants of the first seed, or a one-element algebra).
    """
    if sat.is_trivial():
        raise TrivialTheoryException("chains need a nontrivial theory")
    if not seeds:
        raise ValidationException("at least one seed is required")
    seeds = [s if s.name else s.renamed({}, name=f"seed{i}") for i, s in enumerate(seeds)]
    if base is None:
        first = seeds[0]
        base = first.subalgebra(first.generated([])) if sat.signature.constants else singleton(sat.signature)

    chain = FraisseChain(sat, list(seeds), [seeds[0].renamed({}, name="stage0")])
    tasks = _schedule(seeds)
    for step in range(steps):
        target, over = tasks[step % len(tasks)]
        stage = chain.final
        embedding = None
        if over is None:
            placed = _base_over(base, target, stage)
            if placed is not None:
                over, embedding = placed
            elif _needs_base(sat):
                raise EmptyBaseException(f"the base does not embed into {target.name} and the stage")
        elif find_embedding(over, stage) is None:
            chain.stages.append(stage)
            chain.log.append(ChainStep(step, target.name, list(over.carrier), "skip", {}, stage.size))
            continue
        nxt, entry = extend_stage(sat, stage, target, over, embedding, policy, step)
        chain.stages.append(nxt)
        chain.log.append(entry)
    logger.info(f"chain of {steps} steps ends at size {chain.final.size}")
    return chain


def check_universality(stage: FiniteAlgebra, family: Sequence[FiniteAlgebra]) -> UniversalityReport:
    embeddings = {}
    for i, alg in enumerate(family):
        embeddings[alg.name or f"member{i}"] = find_embedding(alg, stage)
    return UniversalityReport(stage.size, embeddings)


def check_step_witnesses(chain: FraisseChain) -> List[Tuple[int, bool]]:
    """For every logged step: the previous stage and the placed target are subalgebras of the next stage"""
    results = []
    for entry, before, after in zip(chain.log, chain.stages, chain.stages[1:]):
        ok = is_subalgebra(before, after)
        if entry.mapping:
            placed = chain.seed(entry.target).renamed(entry.mapping)
            ok = ok and is_subalgebra(placed, after)
        results.append((entry.step, ok))
    return results
