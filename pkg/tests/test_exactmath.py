from fractions import Fraction

import pytest

from pwlcomplexity.constants import (
    DimensionMismatchError,
    InconsistentError,
    UnboundedPolytopeError,
    UnderdeterminedError,
)
from pwlcomplexity.exactmath import (
    Constraint,
    HPolytope,
    affine_dimension,
    characteristic_polynomial,
    convex_hull_hrep,
    determinant,
    enumerate_vertices,
    inverse,
    is_orthogonal,
    lp_feasible,
    matrix,
    nullspace,
    rank,
    solve_affine_from_point_pairs,
    solve_linear_system,
    transform_polytope,
    vector,
)


F = Fraction


def _triangle() -> HPolytope:
    return HPolytope.from_inequalities([((-1, 0), 0), ((0, -1), 0), ((1, 1), 1)], 2)


def test_linear_algebra() -> None:
    m = matrix([[1, 2], [3, 4]])
    assert determinant(m) == -2
    assert rank(m) == 2
    assert rank(matrix([[1, 2], [2, 4]])) == 1
    assert inverse(matrix([[2, 0], [0, 4]])) == matrix([[F(1, 2), 0], [0, F(1, 4)]])
    assert characteristic_polynomial(matrix([[2, 0], [0, 3]])) == vector([1, -5, 6])
    assert nullspace(matrix([[1, 1]]), 2) == [vector([-1, 1])]
    assert is_orthogonal(matrix([[0, -1], [1, 0]]))
    assert not is_orthogonal(matrix([[2, 0], [0, 1]]))
    assert not is_orthogonal(matrix([[1, 0]]))


def test_singular_inverse() -> None:
    with pytest.raises(UnderdeterminedError, match="singular"):
        inverse(matrix([[1, 2], [2, 4]]))
    with pytest.raises(DimensionMismatchError, match="non-square"):
        determinant(matrix([[1, 2]]))


def test_solve_linear_system() -> None:
    assert solve_linear_system(matrix([[1, 1], [1, -1]]), vector([2, 0])) == vector([1, 1])
    assert solve_linear_system(matrix([[1, 1], [1, 1]]), vector([0, 1])) is None


def test_solve_affine_from_point_pairs() -> None:
    sources = [vector(p) for p in [(0, 0), (1, 0), (0, 1)]]
    targets = [vector(p) for p in [(1, 1), (1, 2), (3, 1)]]
    a, b = solve_affine_from_point_pairs(sources, targets)
    assert a == matrix([[0, 2], [1, 0]])
    assert b == vector([1, 1])


def test_solve_affine_from_point_pairs_errors() -> None:
    collinear = [vector(p) for p in [(0, 0), (1, 1), (2, 2)]]
    with pytest.raises(UnderdeterminedError, match="do not affinely span"):
        solve_affine_from_point_pairs(collinear, [vector([0])] * 3)

    square = [vector(p) for p in [(0, 0), (1, 0), (0, 1), (1, 1)]]
    values = [vector([v]) for v in (0, 1, 1, 3)]
    with pytest.raises(InconsistentError, match="no affine map"):
        solve_affine_from_point_pairs(square, values)

    with pytest.raises(DimensionMismatchError):
        solve_affine_from_point_pairs(square, values[:2])


def test_polytope_vertices_and_volume() -> None:
    triangle = _triangle()
    assert enumerate_vertices(triangle) == [vector([0, 0]), vector([0, 1]), vector([1, 0])]
    assert triangle.volume() == F(1, 2)
    assert HPolytope.box(vector([0, 0]), vector([2, 3])).volume() == 6
    assert triangle.contains(vector([F(1, 3), F(1, 3)]), strict=True)
    assert not triangle.contains(vector([0, 0]), strict=True)
    assert triangle.contains(vector([0, 0]))


def test_volume_of_truncated_cube() -> None:
    cube = HPolytope.box(vector([0, 0, 0]), vector([1, 1, 1]))
    truncated = cube.with_constraints([Constraint(vector([-1, -1, -1]), F(-1, 2))])
    assert truncated.volume() == F(47, 48)


def test_degenerate_polytopes() -> None:
    empty = HPolytope.from_inequalities([((1,), 0), ((-1,), -1)], 1)
    assert empty.is_empty()
    assert empty.volume() == 0
    assert enumerate_vertices(empty) == []

    half_line = HPolytope.from_inequalities([((-1,), 0)], 1)
    assert not half_line.is_bounded()
    with pytest.raises(UnboundedPolytopeError):
        enumerate_vertices(half_line)

    segment = HPolytope.from_inequalities([((1, 0), 0), ((-1, 0), 0)], 2).with_constraints(
        HPolytope.box(vector([-1, -1]), vector([1, 1])).constraints
    )
    assert segment.volume() == 0
    assert segment.interior_point() is None


def test_lp_feasible() -> None:
    point = HPolytope.from_inequalities([((1,), 0), ((-1,), 0)], 1)
    assert lp_feasible(point).feasible
    assert lp_feasible(point).witness == vector([0])
    strict = lp_feasible(point, [True, True])
    assert not strict.feasible
    assert strict.witness is None

    with pytest.raises(DimensionMismatchError, match="strict_mask"):
        lp_feasible(point, [True])

    inside = _triangle().interior_point()
    assert inside is not None
    assert _triangle().contains(inside, strict=True)


def test_irredundant() -> None:
    box = HPolytope.box(vector([0, 0]), vector([1, 1]))
    loose = box.with_constraints(
        [Constraint(vector([1, 0]), F(5)), Constraint(vector([1, 1]), F(2))]
    )
    assert len(loose.irredundant().constraints) == 4
    assert loose.irredundant().volume() == 1


def test_convex_hull_and_transform() -> None:
    points = [vector(p) for p in [(0, 0), (1, 0), (0, 1), (1, 1), (F(1, 2), F(1, 2))]]
    hull = convex_hull_hrep(points)
    assert len(hull.constraints) == 4
    assert hull.volume() == 1
    assert affine_dimension(points) == 2

    rotated = transform_polytope(hull, matrix([[0, -1], [1, 0]]), vector([0, 0]))
    assert enumerate_vertices(rotated) == [
        vector([-1, 0]),
        vector([-1, 1]),
        vector([0, 0]),
        vector([0, 1]),
    ]

    with pytest.raises(DimensionMismatchError, match="affine space of dimension 1"):
        convex_hull_hrep([vector([0, 0]), vector([1, 1])])
