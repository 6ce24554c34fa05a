import random

import pytest

from config.settings import AppConfig
from utils.algebra import FiniteAlgebra
from utils.fixtures import FixtureSet
from utils.terms import EquationalTheory, LinearTheory, parse_equation, parse_signature
from utils.theory_engine import saturate


def make_theory(signature: str, *axioms: str, linear: bool = True) -> EquationalTheory:
    sig = parse_signature(signature)
    cls = LinearTheory if linear else EquationalTheory
    return cls(sig, tuple(parse_equation(a, sig) for a in axioms))


def z2_maltsev(other: str = "a", zero: str = "0", name: str = "") -> FiniteAlgebra:
    """x + y + z on {zero, other}"""
    sig = parse_signature("f/3")
    bit = {zero: 0, other: 1}
    back = {0: zero, 1: other}
    return FiniteAlgebra.from_function(sig, [zero, other], {"f": lambda x, y, z: back[(bit[x] + bit[y] + bit[z]) % 2]},
                                       name=name)


@pytest.fixture(scope="session")
def fixture_set():
    return FixtureSet()


@pytest.fixture(scope="session")
def loaded(fixture_set):
    cache = {}

    def load(name):
        if name not in cache:
            cache[name] = fixture_set.load(name)
        return cache[name]

    return load


@pytest.fixture(scope="session")
def maltsev_theory():
    return make_theory("f/3", "f(x,y,y) = x", "f(x,x,y) = y")


@pytest.fixture(scope="session")
def maltsev_sat(maltsev_theory):
    return saturate(maltsev_theory)


@pytest.fixture
def rng():
    return random.Random(AppConfig.DEFAULT_SEED)
