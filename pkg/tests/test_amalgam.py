import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from config.settings import AppConfig
from conftest import make_theory, z2_maltsev
from utils.algebra import FiniteAlgebra, find_embedding, is_model, is_subalgebra
from utils.amalgam import (
    AmalgamationInput,
    CustomEta,
    FixedElement,
    FreshElement,
    MaxUnderCarrierOrder,
    amalgamate,
    amalgamate_hk,
    associate_term,
    build_n_element,
    joint_embed,
    joint_embed_hk,
    parse_policy,
    random_triple,
    rename_apart,
    search_amalgam_on_union,
    search_joint_embedding,
    singleton,
)
from utils.exceptions import (
    ConstantClashException,
    EmptyBaseException,
    HkPreconditionException,
    JepUnsupportedException,
    NotAModelException,
    OverlapMismatchException,
    PolicyPartialException,
    SubalgebraFailureException,
    ValidationException,
)
from utils.fixtures import FIXTURES, VARIETY_FIXTURES
from utils.fraisse import generate_small_algebras
from utils.terms import parse_signature
from utils.theory_engine import saturate

LINEAR_FIXTURES = [name for name in FIXTURES if name != "example-5-3"]


@pytest.fixture
def maltsev_triple():
    A = z2_maltsev("a", name="A")
    B = z2_maltsev("b", name="B")
    return AmalgamationInput(A, B, A.subalgebra(["0"], name="C"))


def pointed_z2(zero, other, point):
    sig = parse_signature("f/3 'e")
    bit = {zero: 0, other: 1}
    back = {0: zero, 1: other}
    return FiniteAlgebra.from_function(sig, [zero, other],
                                       {"f": lambda x, y, z: back[(bit[x] + bit[y] + bit[z]) % 2]},
                                       {"e": point})


def test_maltsev_strong_amalgam(maltsev_sat, maltsev_triple):
    D = amalgamate(maltsev_sat, maltsev_triple)
    assert D.carrier == ("0", "a", "b")
    assert D.verified is True
    assert is_subalgebra(maltsev_triple.A, D) and is_subalgebra(maltsev_triple.B, D)
    assert D.op("f", "a", "b", "b") == "a"
    assert D.op("f", "a", "a", "b") == "b"
    assert D.op("f", "a", "b", "a") == "0"
    assert D.tables["f"].size == 27


def test_associated_term_marks_constants_and_repeats(maltsev_sat):
    at = associate_term(maltsev_sat, "f", ("a", "b", "b"), {})
    assert at.pattern.slots == (0, 1, 1)
    assert at.class_elements == ("a", "b")
    assert at.exceptional == (1,)
    assert at.ordinary_elements == frozenset({"a"})


@pytest.mark.parametrize("policy, expected", [
    (FixedElement(), "0"),
    (FixedElement("b"), "b"),
    (MaxUnderCarrierOrder(), "b"),
    (FreshElement(), AppConfig.FRESH_ELEMENT),
])
def test_policies_choose_unforced_entries(maltsev_sat, maltsev_triple, policy, expected):
    D = amalgamate(maltsev_sat, maltsev_triple, policy)
    assert D.op("f", "a", "b", "a") == expected
    assert D.verified is True


def test_forced_entries_do_not_depend_on_the_policy(maltsev_sat, maltsev_triple):
    results = [amalgamate(maltsev_sat, maltsev_triple, p)
               for p in (FixedElement(), MaxUnderCarrierOrder(), FreshElement())]
    for args in itertools.product(["0", "a", "b"], repeat=3):
        forced = args[0] == args[1] or args[1] == args[2] or set(args) <= {"0", "a"} or set(args) <= {"0", "b"}
        if forced:
            assert len({D.op("f", *args) for D in results}) == 1, args


def test_fresh_policy_adds_one_element(maltsev_sat, maltsev_triple):
    D = amalgamate(maltsev_sat, maltsev_triple, FreshElement("z"))
    assert D.carrier == ("0", "a", "b", "z")
    assert D.op("f", "z", "a", "a") == "z"
    assert D.op("f", "z", "a", "b") == "z"


def test_custom_policy(maltsev_sat, maltsev_triple):
    partial = CustomEta({frozenset({"a", "b"}): "a"})
    with pytest.raises(PolicyPartialException):
        amalgamate(maltsev_sat, maltsev_triple, partial)
    total = CustomEta({frozenset({"a", "b"}): "a", frozenset({"0", "a", "b"}): "b"})
    D = amalgamate(maltsev_sat, maltsev_triple, total)
    assert D.op("f", "a", "b", "a") == "a"
    assert D.op("f", "0", "a", "b") == "b"


def test_parse_policy():
    assert parse_policy(None) == FixedElement()
    assert parse_policy("fixed:a") == FixedElement("a")
    assert parse_policy("max") == MaxUnderCarrierOrder()
    assert parse_policy("fresh:z") == FreshElement("z")
    with pytest.raises(ValidationException):
        parse_policy("random")


def test_extra_elements_enlarge_the_amalgam(maltsev_sat, maltsev_triple):
    D = amalgamate(maltsev_sat, maltsev_triple, extra_elements=["x1", "x2"])
    assert D.size == 5
    assert D.op("f", "x1", "x2", "x2") == "x1"
    with pytest.raises(ValidationException):
        amalgamate(maltsev_sat, maltsev_triple, extra_elements=["a"])
    with pytest.raises(ValidationException):
        amalgamate(maltsev_sat, maltsev_triple, FixedElement("x1"), extra_elements=["x1"])


def test_overlap_must_equal_the_common_part(maltsev_sat):
    A = z2_maltsev()
    with pytest.raises(OverlapMismatchException):
        amalgamate(maltsev_sat, AmalgamationInput(A, z2_maltsev(), A.subalgebra(["0"])))


def test_common_part_must_be_a_subalgebra(maltsev_sat):
    sig = parse_signature("f/3")
    A = FiniteAlgebra.from_function(sig, ["0", "a"], {"f": lambda x, y, z: "a"})
    C = singleton(sig, "0")
    with pytest.raises(SubalgebraFailureException):
        amalgamate(maltsev_sat, AmalgamationInput(A, z2_maltsev("b"), C))


def test_inputs_must_be_models(maltsev_sat):
    sig = parse_signature("f/3")
    A = FiniteAlgebra.from_function(sig, ["0", "a"], {"f": lambda x, y, z: x})
    with pytest.raises(NotAModelException):
        amalgamate(maltsev_sat, AmalgamationInput(A, z2_maltsev("b"), A.subalgebra(["0"])))


def test_constants_must_agree():
    sat = saturate(make_theory("f/3 'e", "f(x,y,y) = x", "f(x,x,y) = y"))
    A = pointed_z2("e", "a", "e")
    B = pointed_z2("e", "b", "b")
    with pytest.raises(ConstantClashException):
        amalgamate(sat, AmalgamationInput(A, B, A.subalgebra(["e"])))


def test_empty_common_part_needs_an_equilinear_theory():
    sat = saturate(make_theory("f/1 g/1", "f(x) = f(y)"))
    with pytest.raises(EmptyBaseException):
        amalgamate(sat, AmalgamationInput(singleton(sat.signature, "p"), singleton(sat.signature, "q")))


def test_constants_identified_by_the_inputs_are_merged():
    sat = saturate(make_theory("g/1 'c1 'c2"))
    sig = sat.signature
    A = FiniteAlgebra.from_function(sig, ["0", "a"], {"g": lambda x: "0"}, {"c1": "0", "c2": "0"})
    B = FiniteAlgebra.from_function(sig, ["0", "b"], {"g": lambda x: x}, {"c1": "0", "c2": "0"})
    D = amalgamate(sat, AmalgamationInput(A, B, A.subalgebra(["0"])))
    assert is_subalgebra(A, D) and is_subalgebra(B, D)
    assert D.const("c1") == D.const("c2") == "0"


def test_amalgam_over_a_common_subalgebra_where_jep_fails():
    sat = saturate(make_theory("f/1 g/1", "f(x) = f(y)"))
    sig = sat.signature
    C = FiniteAlgebra.from_function(sig, ["c"], {"f": lambda x: "c", "g": lambda x: "c"})
    A = FiniteAlgebra.from_function(sig, ["c", "a1"], {"f": lambda x: "c", "g": lambda x: x})
    B = FiniteAlgebra.from_function(sig, ["c", "b1"], {"f": lambda x: "c", "g": lambda x: "c"})
    D = amalgamate(sat, AmalgamationInput(A, B, C))
    assert D.carrier == ("c", "a1", "b1")
    assert D.op("f", "b1") == "c"
    assert D.op("g", "a1") == "a1"
    assert D.op("g", "b1") == "c"


def test_trivial_theory_returns_the_common_part(maltsev_triple):
    sat = saturate(make_theory("f/3", "f(x,y,z) = x", "f(x,y,z) = z"))
    assert sat.is_trivial()
    assert amalgamate(sat, maltsev_triple) == maltsev_triple.C


@pytest.mark.parametrize("name", LINEAR_FIXTURES)
@pytest.mark.parametrize("n", range(1, 7))
def test_build_n_element(loaded, name, n):
    fixture = loaded(name)
    sat = fixture.saturated()
    M = build_n_element(sat, n)
    assert M.size == n
    assert is_model(M, fixture.theory)
    assert M.verified is not False


def test_build_n_element_rejects_empty(maltsev_sat):
    with pytest.raises(ValidationException):
        build_n_element(maltsev_sat, 0)


def test_rename_apart():
    A = z2_maltsev()
    B2, mapping = rename_apart(A, z2_maltsev())
    assert mapping == {"0": "0'", "a": "a'"}
    assert not set(B2.carrier) & set(A.carrier)


def test_joint_embedding_of_disjoint_copies(maltsev_sat):
    A = z2_maltsev()
    D = joint_embed(maltsev_sat, A, z2_maltsev())
    assert D.size == 4
    assert is_subalgebra(A, D)
    assert find_embedding(z2_maltsev(), D.subalgebra(["0'", "a'"])) is not None


def test_joint_embedding_over_a_point(loaded):
    fixture = loaded("pointed-maltsev")
    A, B = fixture.algebras["A"], fixture.algebras["B"]
    D = joint_embed(fixture.saturated(), A, B)
    assert D.size == A.size + B.size - 1
    assert find_embedding(A, D) is not None
    assert find_embedding(B, D) is not None


@pytest.mark.parametrize("name", ["remark-4-1a", "remark-4-1b"])
def test_joint_embedding_outside_its_cases(loaded, name):
    fixture = loaded(name)
    with pytest.raises(JepUnsupportedException):
        joint_embed(fixture.saturated(), fixture.algebras["A"], fixture.algebras["B"])


@pytest.mark.parametrize("name", ["remark-4-1a", "remark-4-1b"])
def test_no_joint_embedding_exists_up_to_size_four(loaded, name):
    fixture = loaded(name)
    assert search_joint_embedding(fixture.theory, fixture.algebras["A"], fixture.algebras["B"], 4) is None


def test_joint_embedding_search_finds_a_point():
    theory = make_theory("g/1")
    found = search_joint_embedding(theory, singleton(theory.signature, "p"), singleton(theory.signature, "q"), 2)
    assert found is not None
    assert found.D.size == 1


def test_hk_amalgam(loaded):
    fixture = loaded("maltsev-hk")
    D = amalgamate_hk(fixture.saturated(), fixture.triple(), ("f",))
    assert D.verified is True
    assert D.op("h", "b1") == "b2"
    assert D.op("h", AppConfig.FRESH_ELEMENT) == AppConfig.FRESH_ELEMENT
    assert is_subalgebra(fixture.algebras["A"], D) and is_subalgebra(fixture.algebras["B"], D)


def test_hk_inputs_need_inverse_bijections(loaded):
    fixture = loaded("maltsev-hk")
    B = fixture.algebras["B"]
    broken = B.expanded(B.signature, {"k": np.arange(B.size)})
    inp = AmalgamationInput(fixture.algebras["A"], broken, fixture.algebras["C"])
    with pytest.raises(HkPreconditionException):
        amalgamate_hk(fixture.saturated(), inp, ("f",))
    with pytest.raises(HkPreconditionException):
        joint_embed_hk(fixture.saturated(), fixture.algebras["A"], broken, ("f",))


def test_hk_joint_embedding(loaded):
    fixture = loaded("maltsev-hk")
    A, B = fixture.algebras["A"], fixture.algebras["B"]
    D = joint_embed_hk(fixture.saturated(), A, B, ("f",))
    assert D.size == A.size + B.size + 1
    assert D.verified is True
    assert is_subalgebra(A, D)
    assert find_embedding(B, D) is not None
    assert D.op("h", AppConfig.FRESH_ELEMENT) == AppConfig.FRESH_ELEMENT


def test_union_search_finds_the_maltsev_amalgam(maltsev_theory, maltsev_triple):
    D = search_amalgam_on_union(maltsev_theory, maltsev_triple)
    assert D is not None
    assert D.carrier == ("0", "a", "b")
    assert is_model(D, maltsev_theory)


def test_union_search_refutes_the_lattice_triple(loaded):
    fixture = loaded("example-5-3")
    assert search_amalgam_on_union(fixture.theory, fixture.triple()) is None


def test_random_triple_extends_the_common_part(maltsev_theory, rng):
    C = singleton(maltsev_theory.signature, "0")
    inp = random_triple(maltsev_theory, C, rng, max_size=3)
    assert inp is not None
    assert is_subalgebra(C, inp.A) and is_subalgebra(C, inp.B)
    assert set(inp.A.carrier) & set(inp.B.carrier) == {"0"}
    with pytest.raises(ValidationException):
        random_triple(maltsev_theory, z2_maltsev(), rng, max_size=1)


@pytest.mark.slow
@pytest.mark.parametrize("name", VARIETY_FIXTURES)
def test_random_triples_amalgamate(loaded, rng, name):
    fixture = loaded(name)
    sat = fixture.saturated()
    C = fixture.algebras["C"]
    built = 0
    for _ in range(AppConfig.RANDOM_TRIPLES_PER_VARIETY):
        inp = random_triple(fixture.theory, C, rng, max_size=4)
        if inp is None:
            continue
        D = amalgamate(sat, inp)
        assert list(D.carrier) == inp.union_carrier()
        assert is_subalgebra(inp.A, D) and is_subalgebra(inp.B, D)
        assert D.verified is not False
        built += 1
    assert built > 0


@pytest.mark.parametrize("name", ["maltsev", "weak-projection", "pixley", "near-unanimity-3"])
@pytest.mark.parametrize("policy", [FixedElement(), MaxUnderCarrierOrder(), FreshElement()])
def test_amalgams_over_a_two_element_common_part(loaded, rng, name, policy):
    fixture = loaded(name)
    sat = fixture.saturated()
    C = fixture.algebras["A"]
    assert C.size == 2
    built = 0
    for _ in range(20):
        inp = random_triple(fixture.theory, C, rng, max_size=4)
        if inp is None:
            continue
        D = amalgamate(sat, inp, policy)
        union = inp.union_carrier()
        assert list(D.carrier)[:len(union)] == union
        assert is_subalgebra(inp.A, D) and is_subalgebra(inp.B, D)
        assert D.verified is True
        built += 1
    assert built > 0


@given(st.sampled_from(["0", "a", "b"]))
def test_forced_entries_hold_under_every_fixed_default(maltsev_sat, default):
    A, B = z2_maltsev("a"), z2_maltsev("b")
    inp = AmalgamationInput(A, B, A.subalgebra(["0"]))
    D = amalgamate(maltsev_sat, inp, FixedElement(default))
    for x, y in itertools.product(D.carrier, repeat=2):
        assert D.op("f", x, y, y) == x
        assert D.op("f", x, x, y) == y
    assert D.op("f", "a", "b", "a") == default


@pytest.mark.slow
@pytest.mark.parametrize("name", VARIETY_FIXTURES)
def test_generated_algebras_embed_jointly(loaded, name):
    sat = loaded(name).saturated()
    algebras = generate_small_algebras(sat, 3)
    for A, B in itertools.product(algebras, repeat=2):
        D = joint_embed(sat, A, B)
        assert D.verified is not False
        assert is_subalgebra(A, D)
        assert find_embedding(B, D) is not None
