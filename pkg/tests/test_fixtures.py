import pytest

from utils.exceptions import ValidationException
from utils.fixtures import EXPECTATIONS, FIXTURES, FixtureSet


@pytest.mark.parametrize("name", list(FIXTURES))
def test_bundled_algebras_are_as_documented(fixture_set, loaded, name):
    assert fixture_set.self_check(loaded(name)) == []


@pytest.mark.parametrize("name", list(FIXTURES))
def test_fixture_meets_its_expectation(fixture_set, name):
    result = fixture_set.run(name)
    assert result.passed, result.details
    assert result.expectation in EXPECTATIONS


def test_refuting_fixtures_carry_no_witness(fixture_set):
    for name in ("remark-4-1a", "remark-4-1b", "example-5-3"):
        assert fixture_set.run(name).witness is None


def test_example_theory_is_not_linear(loaded):
    assert not loaded("example-5-3").theory.is_linear()


def test_unknown_fixture(fixture_set):
    with pytest.raises(ValidationException):
        fixture_set.get("no-such-fixture")


def test_result_record(fixture_set):
    record = fixture_set.run("maltsev").to_dict()
    assert record["passed"] is True
    assert record["witness_size"] == 3
    assert record["details"]["verified"] is True


def test_missing_fixture_directory(tmp_path):
    with pytest.raises(ValidationException):
        FixtureSet(tmp_path).load("maltsev")
