"""
LinAmalg fixtures
Bundled theories with small algebras and the outcome each bundle is documented to have
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from config.settings import AppConfig
from utils.algebra import FiniteAlgebra, find_embedding, is_model, is_subalgebra
from utils.amalgam import (
    AmalgamationInput,
    amalgamate,
    amalgamate_hk,
    joint_embed,
    search_amalgam_on_union,
    search_joint_embedding,
)
from utils.exceptions import ValidationException
from utils.file_handler import FileHandler
from utils.terms import EquationalTheory, LinearTheory
from utils.theory_engine import SaturatedTheory, saturate

logger = logging.getLogger(__name__)

EXPECTATIONS = ("amalgamate", "jep", "hk", "jep-refuted", "sap-union-refuted")

JEP_SEARCH_MAX_SIZE = 4


@dataclass(frozen=True)
class Fixture:
    """A named bundle: theory.txt plus A/B/C algebra files and what running it should show"""

    name: str
    description: str
    expectation: str
    algebras: Tuple[str, ...] = ("A", "B", "C")
    respected_ops: Tuple[str, ...] = ()


@dataclass
class LoadedFixture:
    fixture: Fixture
    theory: EquationalTheory
    algebras: Dict[str, FiniteAlgebra]

    @property
    def name(self) -> str:
        return self.fixture.name

    def triple(self) -> AmalgamationInput:
        return AmalgamationInput(self.algebras["A"], self.algebras["B"], self.algebras.get("C"))

    def saturated(self, budget: Optional[int] = None) -> SaturatedTheory:
        return saturate(LinearTheory.from_theory(self.theory), budget)


@dataclass
class FixtureResult:
    name: str
    expectation: str
    passed: bool
    witness: Optional[FiniteAlgebra] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "expectation": self.expectation,
            "passed": self.passed,
            "witness_size": self.witness.size if self.witness is not None else None,
            "details": self.details
        }


VARIETY_FIXTURES = ("maltsev", "pixley", "near-unanimity-3", "day-2", "jonsson-3", "hagemann-mitschke-3")

FIXTURES: Dict[str, Fixture] = {f.name: f for f in (
    Fixture("maltsev", "Z2 with x+y+z on {0,a} and {0,b} over {0}", "amalgamate"),
    Fixture("pixley", "two-element Pixley algebras over {0}", "amalgamate"),
    Fixture("near-unanimity-3", "two-element majority algebras over {0}", "amalgamate"),
    Fixture("day-2", "two-element algebras with Day terms m0, m1, m2 over {0}", "amalgamate"),
    Fixture("jonsson-3", "two-element algebras with Jonsson terms d0, ..., d3 over {0}", "amalgamate"),
    Fixture("hagemann-mitschke-3", "two-element algebras with terms p1, p2 over {0}", "amalgamate"),
    Fixture("weak-projection", "f(x,x,y) = f(x,x,z): exceptional last argument", "amalgamate"),
    Fixture("pointed-maltsev", "Z2 and Z3 Maltsev algebras sharing the point 'e", "jep", ("A", "B")),
    Fixture("maltsev-hk", "Maltsev algebras with an involution h = k respecting f", "hk",
            respected_ops=("f",)),
    Fixture("remark-4-1a", "no axioms; A identifies 'c1 and 'c2, B does not", "jep-refuted", ("A", "B")),
    Fixture("remark-4-1b", "f(x) = f(y) with incompatible g on the image of f", "jep-refuted", ("A", "B")),
    Fixture("example-5-3", "distributive lattices with join-preserving h; complements collide",
            "sap-union-refuted"),
)}


class FixtureSet:
    """Registry of the bundled fixtures under AppConfig.FIXTURES_DIR"""

    def __init__(self, root: Optional[Path] = None):
        self.root = Path(root) if root is not None else AppConfig.FIXTURES_DIR
        self.file_handler = FileHandler()

    def names(self) -> List[str]:
        return list(FIXTURES)

    def get(self, name: str) -> Fixture:
        if name not in FIXTURES:
            raise ValidationException(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
        return FIXTURES[name]

    def load(self, name: str) -> LoadedFixture:
        """
        Read a fixture's theory and algebras

        Args:
            name: fixture name

        Returns:
            LoadedFixture
        """
        fixture = self.get(name)
        directory = self.root / name
        theory = self.file_handler.load_theory(directory / "theory.txt")
        algebras = {label: self.file_handler.load_algebra(directory / f"{label}.alg")
                    for label in fixture.algebras}
        logger.debug(f"loaded fixture {name}: {', '.join(f'{k}={v.size}' for k, v in algebras.items())}")
        return LoadedFixture(fixture, theory, algebras)

    def self_check(self, loaded: LoadedFixture) -> List[str]:
        """Problems with the bundled algebras themselves; empty when all is as documented"""
        problems = []
        base_ops = loaded.theory.signature.op_names
        for label, alg in loaded.algebras.items():
            reduct = alg.reduct(base_ops) if loaded.fixture.expectation == "hk" else alg
            if not is_model(reduct, loaded.theory):
                problems.append(f"{label} is not a model")
        C = loaded.algebras.get("C")
        if C is not None:
            for label in ("A", "B"):
                if not is_subalgebra(C, loaded.algebras[label]):
                    problems.append(f"C is not a subalgebra of {label}")
        return problems

    def run(self, name: str, budget: Optional[int] = None) -> FixtureResult:
        """
        Run a fixture against its documented expectation

        Args:
            name: fixture name
            budget: search budget for the oracles

        Returns:
            FixtureResult: passed is True when the outcome matches
        """
        loaded = self.load(name)
        fixture = loaded.fixture
        problems = self.self_check(loaded)
        if problems:
            return FixtureResult(name, fixture.expectation, False, details={"problems": problems})

        A, B = loaded.algebras["A"], loaded.algebras["B"]
        if fixture.expectation == "jep-refuted":
            witness = search_joint_embedding(loaded.theory, A, B, JEP_SEARCH_MAX_SIZE, budget)
            result = FixtureResult(name, fixture.expectation, witness is None,
                                   witness.D if witness is not None else None,
                                   {"max_size": JEP_SEARCH_MAX_SIZE})
        elif fixture.expectation == "sap-union-refuted":
            witness = search_amalgam_on_union(loaded.theory, loaded.triple(), budget)
            result = FixtureResult(name, fixture.expectation, witness is None, witness)
        else:
            sat = loaded.saturated()
            if fixture.expectation == "jep":
                D = joint_embed(sat, A, B)
            elif fixture.expectation == "hk":
                D = amalgamate_hk(sat, loaded.triple(), fixture.respected_ops)
            else:
                D = amalgamate(sat, loaded.triple())
            if fixture.expectation == "jep":
                embedded = find_embedding(A, D) is not None and find_embedding(B, D) is not None
            else:
                embedded = is_subalgebra(A, D) and is_subalgebra(B, D)
            result = FixtureResult(name, fixture.expectation, bool(embedded and D.verified is not False), D,
                                   {"size": D.size, "verified": D.verified})
        logger.info(f"fixture {name} ({fixture.expectation}): {'pass' if result.passed else 'FAIL'}")
        return result
