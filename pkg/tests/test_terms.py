import pytest
from hypothesis import given, strategies as st

from utils.exceptions import LinearityException, ParseException, SignatureMismatchException
from utils.terms import (
    Application,
    Constant,
    Equation,
    EquationalTheory,
    Linearity,
    LinearTheory,
    Signature,
    Variable,
    classify_equation,
    is_flat,
    parse_equation,
    parse_signature,
    parse_term,
    variables_of,
)


@pytest.mark.parametrize("text, expected", [
    ("f(x,y,y) = x", Linearity.EQUILINEAR),
    ("f(x,x,y) = y", Linearity.EQUILINEAR),
    ("f(x,y,y) = f(x,z,z)", Linearity.LINEAR),
    ("x = x", Linearity.EQUILINEAR),
    ("f(x,y) = g(y,x)", Linearity.EQUILINEAR),
    ("f(x,f(y,z)) = f(f(x,y),z)", Linearity.NONLINEAR),
    ("f(x) = f(y)", Linearity.LINEAR),
    ("f(x,'c) = g(x,x)", Linearity.LINEAR),
    ("f('c,'c) = 'c", Linearity.EQUILINEAR),
    ("h(join(x,y)) = join(h(x),h(y))", Linearity.NONLINEAR),
])
def test_classify_equation(text, expected):
    assert classify_equation(parse_equation(text)) is expected


def test_associativity_is_nonlinear_despite_equal_variables():
    eq = parse_equation("f(x,f(y,z)) = f(f(x,y),z)")
    assert variables_of(eq.lhs) == variables_of(eq.rhs)
    assert classify_equation(eq) is Linearity.NONLINEAR


names = st.sampled_from(["x", "y", "z", "u"])
flat_terms = st.one_of(
    names.map(Variable),
    st.lists(names, min_size=1, max_size=4).map(lambda xs: Application("f", tuple(Variable(x) for x in xs))),
    st.lists(names, min_size=1, max_size=4).map(lambda xs: Application("g", tuple(Variable(x) for x in xs))),
)


@given(flat_terms, flat_terms)
def test_classification_is_symmetric(lhs, rhs):
    assert classify_equation(Equation(lhs, rhs)) is classify_equation(Equation(rhs, lhs))


@given(flat_terms, flat_terms)
def test_flat_equations_are_never_nonlinear(lhs, rhs):
    assert is_flat(lhs) and is_flat(rhs)
    assert classify_equation(Equation(lhs, rhs)) is not Linearity.NONLINEAR


def _rename(t, mapping):
    if isinstance(t, Variable):
        return Variable(mapping[t.name])
    if isinstance(t, Application):
        return Application(t.op, tuple(_rename(a, mapping) for a in t.args))
    return t


any_terms = st.one_of(flat_terms, flat_terms.map(lambda t: Application("h", (t,))))


@given(any_terms, any_terms, st.permutations(["x", "y", "z", "u"]))
def test_classification_ignores_variable_names(lhs, rhs, image):
    mapping = dict(zip(["x", "y", "z", "u"], image))
    renamed = Equation(_rename(lhs, mapping), _rename(rhs, mapping))
    assert classify_equation(renamed) is classify_equation(Equation(lhs, rhs))


def test_parse_term_round_trips_through_str():
    t = parse_term("f(x,'c,g(y))")
    assert t == Application("f", (Variable("x"), Constant("c"), Application("g", (Variable("y"),))))
    assert str(t) == "f(x,'c,g(y))"


def test_parse_accepts_primed_names():
    t = parse_term("f(a',b)")
    assert t.args[0] == Variable("a'")


@pytest.mark.parametrize("text", ["f(x,", "f(x))", "= x", "f(x) = ", "f(x) = y = z"])
def test_parse_errors(text):
    with pytest.raises(ParseException):
        parse_equation(text)


def test_signature_parsing_and_checks():
    sig = parse_signature("f/3 g/1 'c")
    assert sig.arity("f") == 3
    assert sig.constants == frozenset({"c"})
    assert str(sig) == "f/3 g/1 'c"
    with pytest.raises(SignatureMismatchException):
        parse_equation("f(x,y) = x", sig)
    with pytest.raises(SignatureMismatchException):
        parse_equation("h(x) = x", sig)
    with pytest.raises(SignatureMismatchException):
        parse_equation("g('d) = x", sig)


def test_signature_rejects_nullary_and_clashing_symbols():
    with pytest.raises(SignatureMismatchException):
        Signature({"f": 0})
    with pytest.raises(SignatureMismatchException):
        Signature({"f": 1}, ["f"])
    with pytest.raises(ParseException):
        parse_signature("f/x")


def test_linear_theory_rejects_nested_axioms():
    sig = parse_signature("f/2")
    assoc = parse_equation("f(x,f(y,z)) = f(f(x,y),z)", sig)
    theory = EquationalTheory(sig, (assoc,))
    assert not theory.is_linear()
    with pytest.raises(LinearityException):
        LinearTheory.from_theory(theory)


def test_theory_level_classification():
    sig = parse_signature("f/1 g/1")
    theory = EquationalTheory(sig, (parse_equation("f(x) = f(y)", sig),))
    assert theory.is_linear()
    assert not theory.is_equilinear()
