from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal
from fractions import Fraction

import pytest

from pwlcomplexity.bounds import (
    Direction,
    b_recurrence,
    binary_entropy,
    ckn_expansion,
    ckn_recurrence,
    deep_set_guide,
    entropy_bounds_fc,
    fc_asymptotic_guide,
    fc_entropy_lower,
    generalized_factorial,
    invariant_regions_guide,
    invariant_upper_bound,
    leading_coefficient,
    leading_term_lower,
    montufar_count,
    multinomial,
    schlafli,
    shallow_invariant_guide,
    theorem_one_lower,
)
from pwlcomplexity.constants import BoundDomainError, MissingBaseValueError


F = Fraction


@pytest.mark.parametrize(
    "n0, n1, expected",
    [(2, 4, 11), (1, 3, 4), (3, 2, 4), (0, 5, 1), (2, 0, 1), (4, 6, 57)],
)
def test_schlafli(n0: int, n1: int, expected: int) -> None:
    assert schlafli(n0, n1) == expected


@pytest.mark.parametrize(
    "m, n, level, expected",
    [(2, 1, 1, 3), (2, 2, 2, 11), (2, 3, 3, 39), (3, 1, 1, 4), (0, 4, 4, 1), (2, 2, -1, 0)],
)
def test_b_recurrence(m: int, n: int, level: int, expected: int) -> None:
    assert b_recurrence(m, n, level) == expected


def test_coxeter_augmentation() -> None:
    base = [b_recurrence(2, j, j) for j in range(4)]
    assert base == [1, 3, 11, 39]
    assert ckn_recurrence(3, base) == ckn_expansion(3, base) == 78
    # Two blocks in the plane: 11 chambers become 14 with the line x1 = x2.
    assert ckn_recurrence(2, base[:3]) == 14
    assert ckn_recurrence(3, {j: 1 for j in range(4)}) == 6
    assert ckn_recurrence(2, [1, 1, 1], printed_form=True) == 6
    assert ckn_expansion(2, [1, 1, 1], printed_form=True) == 6


def test_entropy() -> None:
    assert binary_entropy(0) == 0
    assert binary_entropy(1) == 0
    assert binary_entropy(F(1, 2)) == 1
    assert binary_entropy(F(1, 3)) == binary_entropy(F(2, 3))

    lower_short = binary_entropy(F(1, 3), 10, ROUND_FLOOR)
    lower_long = binary_entropy(F(1, 3), 20, ROUND_FLOOR)
    upper_long = binary_entropy(F(1, 3), 20, ROUND_CEILING)
    upper_short = binary_entropy(F(1, 3), 10, ROUND_CEILING)
    assert lower_short <= lower_long < upper_long <= upper_short

    with pytest.raises(BoundDomainError, match="0 <= p <= 1"):
        binary_entropy(F(3, 2))


def test_entropy_sandwich() -> None:
    lower, upper = entropy_bounds_fc(2, 4)
    assert lower.value <= 11 <= upper.value
    assert (lower.direction, upper.direction) == (Direction.LOWER, Direction.UPPER)

    empty = entropy_bounds_fc(0, 3)
    assert (empty[0].value, empty[1].value) == (1, 1)

    with pytest.raises(BoundDomainError, match="n0 <= n1/2"):
        entropy_bounds_fc(3, 4)


def test_fully_connected_lower_bound() -> None:
    # n0/n1 = 1/2 makes every intermediate exact.
    bound = fc_entropy_lower(2, 1)
    assert bound.value == 2
    assert bound.inputs == (("m", 2), ("n", 1))
    assert theorem_one_lower(1, 2).value == 2
    assert fc_entropy_lower(3, 2).value <= schlafli(2, 6)

    with pytest.raises(BoundDomainError, match="m >= 2"):
        fc_entropy_lower(1, 2)


def test_generalized_factorial() -> None:
    assert generalized_factorial(4) == 24
    assert generalized_factorial(0) == 1
    assert generalized_factorial(F(5, 2)) == F(15, 8)
    assert generalized_factorial(Decimal("1.5")) == Decimal("0.75")
    with pytest.raises(BoundDomainError):
        generalized_factorial(-1)


def test_invariant_upper_bound() -> None:
    exact = invariant_upper_bound(2, 2)
    assert exact.value == 15
    assert exact.precision is None
    assert exact.as_row() == {
        "formula": "invariant_upper_bound",
        "inputs": "m=2, n=2",
        "value": "15",
        "direction": "upper",
        "reference": "refined complexity of invariant shallow models",
    }
    assert invariant_upper_bound(2, 0).value == 1

    # For m = 3 the base is 27/4 and n = 1 gives 31/4, approached from above.
    rounded = invariant_upper_bound(3, 1)
    assert rounded.direction == Direction.UPPER
    assert Decimal("7.75") <= rounded.value < Decimal("7.7501")

    with pytest.raises(BoundDomainError, match="m >= 2"):
        invariant_upper_bound(1, 3)


def test_leading_term() -> None:
    assert leading_coefficient(1) == 1
    assert leading_coefficient(2) == 2
    assert leading_coefficient(3) == 4

    report = leading_term_lower(2, 2)
    assert report.leading_sum == leading_coefficient(2)
    assert report.quarter_term == 1
    assert report.bound.value <= report.leading_sum
    assert report.bound.direction == Direction.LOWER
    assert leading_term_lower(2, 3).leading_sum == 4

    with pytest.raises(BoundDomainError, match="m > n/2"):
        leading_term_lower(1, 2)


def test_guides() -> None:
    regions = invariant_regions_guide(2, 2)
    assert regions.direction == Direction.GUIDE
    assert abs(regions.value - 8) < Decimal("1e-20")
    assert fc_asymptotic_guide(2, 1).reference == "asymptotic guide, not exact count"
    assert deep_set_guide([2, 3], 2).value > shallow_invariant_guide([2, 3], 2).value
    assert abs(deep_set_guide([2, 2], 2).value - shallow_invariant_guide([2, 2], 2).value) < 1


def test_counting_helpers() -> None:
    assert multinomial(4, (1, 1, 2)) == 12
    assert montufar_count((2, 2), 1, 1) == 8
    assert montufar_count((4,), 2, 4) == 4 * 11
    with pytest.raises(BoundDomainError, match="do not split"):
        multinomial(4, (1, 1))
    with pytest.raises(BoundDomainError, match="at least n = 2"):
        montufar_count((1,), 2, 4)


def test_base_values_required() -> None:
    with pytest.raises(MissingBaseValueError, match=r"\[2, 3\]"):
        ckn_recurrence(3, {0: 1, 1: 3})
    with pytest.raises(BoundDomainError):
        b_recurrence(-1, 2, 2)
