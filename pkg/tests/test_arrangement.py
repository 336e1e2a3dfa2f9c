import itertools
import random
from fractions import Fraction
from typing import Dict

import pytest

from pwlcomplexity.arrangement import (
    Arrangement,
    Box,
    Hyperplane,
    auto_box,
    build_invariant_arrangement,
    count_chambers,
    count_chambers_deletion_restriction,
    coxeter_arrangement,
    deletion,
    enumerate_chambers,
    invariant_intersection_report,
    is_general_position,
    restrict,
)
from pwlcomplexity.bounds import b_recurrence, entropy_bounds_fc, schlafli
from pwlcomplexity.constants import (
    AmbientModeError,
    DegenerateHyperplaneError,
    DimensionMismatchError,
)
from pwlcomplexity.network import (
    build_fc_shallow,
    first_layer_arrangement,
    random_invariant_params,
)
from pwlcomplexity.presets import (
    APPENDIX_A2_PARAMS,
    appendix_a1a,
    appendix_a1b,
    appendix_a1b_literal,
    cut,
)


F = Fraction


@pytest.mark.parametrize(
    "arr, expected",
    [
        (appendix_a1a(), 9),
        (appendix_a1b(), 11),
        (appendix_a1b_literal(), 10),
        (cut(0, F(1, 3), 1), 4),
        (coxeter_arrangement(3), 6),
        (build_invariant_arrangement(APPENDIX_A2_PARAMS, 2), 11),
    ],
)
def test_chamber_counts(arr: Arrangement, expected: int) -> None:
    chambers = enumerate_chambers(arr, ambient=True)
    assert len(chambers) == expected
    assert count_chambers_deletion_restriction(arr) == expected
    assert count_chambers(arr) == expected
    assert len(chambers) <= schlafli(arr.dim, len(arr))
    for chamber in chambers:
        assert arr.sign_vector(chamber.witness) == chamber.sign_vector
        assert 0 not in chamber.sign_vector


def test_general_position() -> None:
    assert is_general_position(appendix_a1b())

    parallel = is_general_position(appendix_a1a())
    assert not parallel
    assert parallel.violating == ("H_1", "H_2")

    concurrent = is_general_position(appendix_a1b_literal())
    assert not concurrent
    assert concurrent.violating == ("H_1", "H_3", "H_4")
    assert "common point" in concurrent.reason

    assert is_general_position(cut(0, 1, 2))
    assert not is_general_position(
        Arrangement((Hyperplane.of((1,), 0, "a"), Hyperplane.of((2,), 0, "b")), 1)
    )


def test_general_position_meets_the_region_bound() -> None:
    arr = appendix_a1b()
    assert count_chambers(arr) == schlafli(2, 4) == 11


def test_deletion_and_restriction() -> None:
    arr = appendix_a1b()
    deleted = deletion(arr, 3)
    restricted = restrict(arr, 3)
    assert [h.label for h in deleted.hyperplanes] == ["H_1", "H_2", "H_3"]
    assert restricted.dim == 1
    assert [h.label for h in restricted.hyperplanes] == ["H_1", "H_2", "H_3"]
    assert count_chambers(deleted) + count_chambers(restricted) == count_chambers(arr)

    # A parallel line leaves no trace and two lines through one point leave one.
    assert len(restrict(appendix_a1a(), 0)) == 1


def test_count_cache() -> None:
    arr = appendix_a1a()
    cache: Dict[str, int] = {}
    assert count_chambers_deletion_restriction(arr, cache) == 9
    assert list(cache.values()) == [9]

    key = next(iter(cache))
    cache[key] = 99
    assert count_chambers_deletion_restriction(arr, cache) == 99

    # The key depends on the hyperplanes as sets, not on their order or scaling.
    shuffled = Arrangement(
        tuple(
            Hyperplane(tuple(2 * a for a in h.normal), 2 * h.offset, h.label)
            for h in reversed(arr.hyperplanes)
        ),
        2,
    )
    assert count_chambers_deletion_restriction(shuffled, cache) == 99


def test_box_mode() -> None:
    arr = appendix_a1b()
    box = auto_box(arr)
    chambers = enumerate_chambers(arr.with_box(box))
    assert len(chambers) == 11
    assert sum(c.volume() for c in chambers) == box.volume()

    unit = Box.cube(2, 0, 1)
    clipped = enumerate_chambers(arr.with_box(unit))
    assert len(clipped) < 11
    assert sum(c.volume() for c in clipped) == 1


def test_chamber_signs() -> None:
    chambers = enumerate_chambers(cut(F(1, 2)), ambient=True)
    assert [c.signs() for c in chambers] == ["-", "+"]


def test_zero_dimensional_space() -> None:
    assert count_chambers(Arrangement((), 0)) == 1
    assert count_chambers_deletion_restriction(Arrangement((), 3)) == 1


def test_arrangement_errors() -> None:
    with pytest.raises(AmbientModeError, match="ambient=True"):
        enumerate_chambers(appendix_a1b())
    with pytest.raises(DegenerateHyperplaneError, match="zero normal"):
        Hyperplane.of((0, 0), 1, "zero")
    with pytest.raises(DimensionMismatchError, match="expected 3"):
        Arrangement((Hyperplane.of((1, 0), 0, "a"),), 3)
    with pytest.raises(ValueError, match="not unique"):
        Arrangement((Hyperplane.of((1,), 0, "a"), Hyperplane.of((1,), 1, "a")), 1)
    with pytest.raises(ValueError, match="empty interior"):
        Box((F(0), F(1)), (F(1), F(1)))
    with pytest.raises(DimensionMismatchError, match="different dimensions"):
        Box((F(0),), (F(1), F(1)))


def test_invariant_arrangement() -> None:
    arr = build_invariant_arrangement(APPENDIX_A2_PARAMS, 2)
    assert [h.label for h in arr.hyperplanes] == ["H_{1,1}", "H_{1,2}", "H_{2,1}", "H_{2,2}"]
    assert arr.hyperplanes[1].normal == (F(1, 2), F(2))
    assert invariant_intersection_report(arr, 2) == []


def test_trivial_invariant_arrangement() -> None:
    # a = b makes every hyperplane of the block the same set.
    arr = build_invariant_arrangement([(1, 1, -1)], 2, warn=False)
    assert count_chambers(arr) == 2
    assert invariant_intersection_report(arr, 1) == [
        "block 1: a_i = b_i, its 2 hyperplanes coincide"
    ]


def test_coxeter_arrangement() -> None:
    arr = coxeter_arrangement(4)
    assert len(arr) == 6
    assert count_chambers_deletion_restriction(arr) == 24
    with pytest.raises(DimensionMismatchError):
        coxeter_arrangement(1)


def _generic_arrangement(n0: int, n1: int, seed: int) -> Arrangement:
    """Switching hyperplanes of a seeded network, redrawn until in general position."""
    for attempt in itertools.count():
        net = build_fc_shallow(n0, n1, 1, seed=100 * seed + attempt)
        arr = first_layer_arrangement(net)
        if is_general_position(arr):
            return arr
    raise AssertionError("unreachable")


@pytest.mark.parametrize("n1", range(1, 9))
@pytest.mark.parametrize("n0", [1, 2, 3])
def test_generic_arrangements(n0: int, n1: int) -> None:
    for seed in range(20):
        arr = _generic_arrangement(n0, n1, seed)
        count = count_chambers(arr)
        assert count == schlafli(n0, n1)
        if 2 * n0 <= n1:
            lower, upper = entropy_bounds_fc(n0, n1)
            assert lower.value <= count <= upper.value
        if n1 > 6:
            continue
        for index in range(n1):
            assert count == count_chambers(deletion(arr, index)) + count_chambers(
                restrict(arr, index)
            )


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_generic_invariant_arrangements(m: int, n: int) -> None:
    params = random_invariant_params(m, n, random.Random(10 * m + n))
    arr = build_invariant_arrangement(params, n)
    assert count_chambers(arr) == b_recurrence(m, n, n)
