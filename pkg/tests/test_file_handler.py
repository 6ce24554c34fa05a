import pytest

from conftest import z2_maltsev
from utils.exceptions import ParseException, SignatureMismatchException
from utils.file_handler import FileHandler
from utils.terms import parse_signature

THEORY = """
# Maltsev
signature: f/3
axioms:
f(x,y,y) = x
f(x,x,y) = y
"""

POINTED = """
elements: e a
const 'e = e
table g:
g(e) = a
g(a) = e
"""


@pytest.fixture
def handler():
    return FileHandler()


def test_parse_theory(handler):
    theory = handler.parse_theory(THEORY)
    assert str(theory.signature) == "f/3"
    assert [str(eq) for eq in theory.axioms] == ["f(x,y,y) = x", "f(x,x,y) = y"]


def test_theory_on_one_line(handler):
    theory = handler.parse_theory("signature: g/1\naxioms: g(x) = x\n")
    assert len(theory.axioms) == 1


@pytest.mark.parametrize("text", [
    "axioms:\nf(x) = x\n",
    "signature: f/1\nf(x) = x\n",
    "signature: f/1\naxioms:\nf(x,y) = x\n",
    "axioms:\n",
])
def test_malformed_theories(handler, text):
    with pytest.raises(ParseException):
        handler.parse_theory(text, "bad.txt")


def test_parse_errors_carry_the_line_number(handler):
    with pytest.raises(ParseException) as info:
        handler.parse_theory("signature: f/1\naxioms:\nf(x = x\n", "bad.txt")
    assert info.value.details["line"] == 3
    assert info.value.message.startswith("bad.txt:3:")


def test_parse_algebra_with_constants(handler):
    alg = handler.parse_algebra(POINTED, "P.alg")
    assert alg.carrier == ("e", "a")
    assert alg.const("e") == "e"
    assert alg.op("g", "e") == "a"
    assert alg.name == "P"


def test_algebra_text_survives_a_round_trip(handler):
    A = z2_maltsev()
    text = handler.format_algebra(A)
    assert text.splitlines()[:3] == ["elements: 0 a", "table f:", "f(0,0,0) = 0"]
    assert handler.parse_algebra(text) == A


def test_canonical_output_sorts_the_carrier(handler):
    A = z2_maltsev().reordered(["a", "0"])
    assert handler.format_algebra(A, canonical=True) == handler.format_algebra(z2_maltsev())


@pytest.mark.parametrize("text", [
    "elements: 0 1\ntable g:\ng(0) = 1\n",
    "elements: 0 1\ntable g:\ng(0) = 1\ng(0) = 0\ng(1) = 1\n",
    "elements: 0 1\ntable g:\ng(0) = 2\ng(1) = 1\n",
    "elements: 0 0\n",
    "table g:\ng(0) = 0\n",
    "elements: 0\nconst c = 0\n",
    "elements: 0\ntable g:\ng(0,0) = 0\ng(0) = 0\n",
    "elements: 0\nconst 'c = 1\n",
])
def test_malformed_algebras(handler, text):
    with pytest.raises(ParseException):
        handler.parse_algebra(text)


def test_expected_signature_is_enforced(handler):
    with pytest.raises(SignatureMismatchException):
        handler.parse_algebra(POINTED, signature=parse_signature("g/1"))


def test_validate_file(handler, tmp_path):
    ok, error = handler.validate_file(tmp_path / "missing.alg")
    assert not ok and "no such file" in error
    path = tmp_path / "A.alg"
    path.write_text("elements: 0\n", encoding="utf-8")
    assert handler.validate_file(path) == (True, "")


def test_oversized_files_are_rejected(handler, tmp_path):
    handler.max_size_mb = 0
    path = tmp_path / "big.alg"
    path.write_text("elements: 0\n", encoding="utf-8")
    ok, error = handler.validate_file(path)
    assert not ok
    with pytest.raises(ParseException):
        handler.load_algebra(path)


def test_write_and_load(handler, tmp_path):
    A = z2_maltsev()
    path = handler.write_algebra(A, tmp_path / "out" / "D.alg")
    assert path.exists()
    assert handler.load_algebra(path) == A
    theory = handler.parse_theory(THEORY)
    written = handler.write_theory(theory, tmp_path / "theory.txt", canonical=True)
    assert handler.load_theory(written).axioms == tuple(sorted(theory.axioms, key=str))
