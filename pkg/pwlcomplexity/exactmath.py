"""
Exact rational linear algebra and polytope primitives.

Everything here works on ``fractions.Fraction``; there is no floating point anywhere.
Vectors and matrices are plain tuples so they are hashable and safe to share between
threads and processes.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Any,
    Dict,
    FrozenSet,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

from pwlcomplexity.constants import (
    DimensionMismatchError,
    InconsistentError,
    UnboundedPolytopeError,
    UnderdeterminedError,
)
from pwlcomplexity.rationals import to_fraction


__all__ = [
    "Constraint",
    "HPolytope",
    "LPResult",
    "QMatrix",
    "QVector",
    "add",
    "affine_dimension",
    "characteristic_polynomial",
    "convex_hull_hrep",
    "determinant",
    "dot",
    "enumerate_vertices",
    "identity",
    "inverse",
    "is_orthogonal",
    "lp_feasible",
    "mat_mul",
    "mat_vec",
    "matrix",
    "nullspace",
    "polytope_volume",
    "rank",
    "scale",
    "solve_affine_from_point_pairs",
    "solve_linear_system",
    "squared_distance",
    "sub",
    "transform_polytope",
    "transpose",
    "vector",
]


logger = logging.getLogger(__name__)

QVector = Tuple[Fraction, ...]
QMatrix = Tuple[QVector, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


def vector(values: Iterable[Any]) -> QVector:
    return tuple(to_fraction(v) for v in values)


def matrix(rows: Iterable[Iterable[Any]]) -> QMatrix:
    result = tuple(vector(row) for row in rows)
    if result and any(len(row) != len(result[0]) for row in result):
        raise DimensionMismatchError("matrix rows have different lengths")
    return result


def identity(n: int) -> QMatrix:
    return tuple(tuple(_ONE if i == j else _ZERO for j in range(n)) for i in range(n))


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise DimensionMismatchError(f"dot product of lengths {len(u)} and {len(v)}")
    return sum((a * b for a, b in zip(u, v) if a and b), _ZERO)


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> QVector:
    if len(u) != len(v):
        raise DimensionMismatchError(f"sum of lengths {len(u)} and {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[Fraction], v: Sequence[Fraction]) -> QVector:
    if len(u) != len(v):
        raise DimensionMismatchError(f"difference of lengths {len(u)} and {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def scale(c: Fraction, u: Sequence[Fraction]) -> QVector:
    return tuple(c * a for a in u)


def squared_distance(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    d = sub(u, v)
    return dot(d, d)


def transpose(m: Sequence[Sequence[Fraction]]) -> QMatrix:
    return tuple(zip(*m)) if m else ()


def mat_vec(m: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> QVector:
    return tuple(dot(row, v) for row in m)


def mat_mul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> QMatrix:
    if a and len(a[0]) != len(b):
        raise DimensionMismatchError(
            f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0]) if b else 0}"
        )
    columns = transpose(b)
    return tuple(tuple(dot(row, col) for col in columns) for row in a)


def _row_reduce(
    rows: Sequence[Sequence[Fraction]],
) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    work = [list(row) for row in rows]
    pivots: List[int] = []
    if not work:
        return work, pivots
    ncols = len(work[0])
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        p = work[r][c]
        work[r] = [x / p for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return work, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(_row_reduce(rows)[1])


def solve_linear_system(
    a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]
) -> Optional[QVector]:
    """A particular solution of ``a x = b`` (free variables set to 0), or None."""
    if len(a) != len(b):
        raise DimensionMismatchError(f"{len(a)} equations but {len(b)} right-hand sides")
    if not a:
        return None
    nvars = len(a[0])
    reduced, pivots = _row_reduce([list(row) + [rhs] for row, rhs in zip(a, b)])
    if nvars in pivots:
        return None
    x = [_ZERO] * nvars
    for row, col in zip(reduced, pivots):
        x[col] = row[nvars]
    return tuple(x)


def nullspace(a: Sequence[Sequence[Fraction]], ncols: int) -> List[QVector]:
    """Basis of ``{x : a x = 0}``, one vector per free column."""
    if not a:
        return list(identity(ncols))
    reduced, pivots = _row_reduce(a)
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        x = [_ZERO] * ncols
        x[free] = _ONE
        for row, col in zip(reduced, pivots):
            x[col] = -row[free]
        basis.append(tuple(x))
    return basis


def determinant(m: Sequence[Sequence[Fraction]]) -> Fraction:
    n = len(m)
    if any(len(row) != n for row in m):
        raise DimensionMismatchError("determinant of a non-square matrix")
    work = [list(row) for row in m]
    det = _ONE
    for c in range(n):
        pivot = next((i for i in range(c, n) if work[i][c] != 0), None)
        if pivot is None:
            return _ZERO
        if pivot != c:
            work[c], work[pivot] = work[pivot], work[c]
            det = -det
        p = work[c][c]
        det *= p
        for i in range(c + 1, n):
            if work[i][c] != 0:
                f = work[i][c] / p
                work[i] = [x - f * y for x, y in zip(work[i], work[c])]
    return det


def inverse(m: Sequence[Sequence[Fraction]]) -> QMatrix:
    n = len(m)
    if any(len(row) != n for row in m):
        raise DimensionMismatchError("inverse of a non-square matrix")
    reduced, pivots = _row_reduce([list(row) + list(e) for row, e in zip(m, identity(n))])
    if pivots[:n] != list(range(n)):
        raise UnderdeterminedError("matrix is singular")
    return tuple(tuple(row[n:]) for row in reduced)


def is_orthogonal(a: Sequence[Sequence[Fraction]]) -> bool:
    """Exact check of AᵀA = I. Non-square input is not orthogonal."""
    n = len(a)
    if any(len(row) != n for row in a):
        return False
    return mat_mul(transpose(a), a) == identity(n)


def characteristic_polynomial(m: Sequence[Sequence[Fraction]]) -> QVector:
    """Coefficients of det(tI − m), highest degree first (Faddeev–LeVerrier)."""
    n = len(m)
    coefficients = [_ONE]
    current: QMatrix = tuple(tuple(_ZERO for _ in range(n)) for _ in range(n))
    for k in range(1, n + 1):
        shifted = tuple(
            tuple(x + (coefficients[-1] if i == j else _ZERO) for j, x in enumerate(row))
            for i, row in enumerate(current)
        )
        current = mat_mul(m, shifted)
        coefficients.append(-sum((current[i][i] for i in range(n)), _ZERO) / k)
    return tuple(coefficients)


def affine_dimension(points: Sequence[Sequence[Fraction]]) -> int:
    """Dimension of the affine hull; -1 for no points."""
    if not points:
        return -1
    base = points[0]
    return rank([sub(p, base) for p in points[1:]]) if len(points) > 1 else 0


def solve_affine_from_point_pairs(
    sources: Sequence[Sequence[Fraction]], targets: Sequence[Sequence[Fraction]]
) -> Tuple[QMatrix, QVector]:
    """Find the affine map ``x -> A x + b`` sending every source to its target.

    Args:
        sources: Points of ℝⁿ, at least n + 1 of them, affinely spanning ℝⁿ.
        targets: Points of ℝᵏ, one per source.

    Returns:
        The pair ``(A, b)``.

    Raises:
        UnderdeterminedError: the sources do not affinely span ℝⁿ.
        InconsistentError: no affine map sends every source to its target.
    """
    if len(sources) != len(targets):
        raise DimensionMismatchError(
            f"{len(sources)} sources but {len(targets)} targets"
        )
    if not sources:
        raise UnderdeterminedError("no point pairs given")
    n = len(sources[0])
    k = len(targets[0])
    if any(len(s) != n for s in sources) or any(len(t) != k for t in targets):
        raise DimensionMismatchError("point pairs have inconsistent dimensions")

    system = [list(s) + [_ONE] for s in sources]
    if rank(system) < n + 1:
        raise UnderdeterminedError(
            f"{len(sources)} source points do not affinely span a space of dimension {n}"
        )

    solutions = []
    for r in range(k):
        solution = solve_linear_system(system, [t[r] for t in targets])
        if solution is None:
            raise InconsistentError(
                f"no affine map sends the sources to the targets (coordinate {r})"
            )
        solutions.append(solution)
    a = tuple(tuple(sol[:n]) for sol in solutions)
    b = tuple(sol[n] for sol in solutions)
    return a, b


class Constraint(NamedTuple):
    """The half-space ``normal · x <= offset``."""

    normal: QVector
    offset: Fraction

    def canonical(self) -> "Constraint":
        """Scale by a positive factor so the first nonzero normal entry is ±1."""
        lead = next((abs(x) for x in self.normal if x != 0), None)
        if lead is None or lead == 1:
            return self
        return Constraint(tuple(x / lead for x in self.normal), self.offset / lead)

    def slack(self, x: Sequence[Fraction]) -> Fraction:
        return self.offset - dot(self.normal, x)


@dataclass(frozen=True)
class HPolytope:
    """An H-polytope ``{x : normal_i · x <= offset_i for all i}``."""

    constraints: Tuple[Constraint, ...]
    ambient_dim: int

    def __post_init__(self) -> None:
        if self.ambient_dim < 1:
            raise DimensionMismatchError("polytopes live in a space of dimension >= 1")
        for c in self.constraints:
            if len(c.normal) != self.ambient_dim:
                raise DimensionMismatchError(
                    f"constraint normal has {len(c.normal)} entries, "
                    f"expected {self.ambient_dim}"
                )

    @classmethod
    def from_inequalities(
        cls, rows: Iterable[Tuple[Iterable[Any], Any]], ambient_dim: int
    ) -> "HPolytope":
        return cls(
            tuple(Constraint(vector(n), to_fraction(o)) for n, o in rows), ambient_dim
        )

    @classmethod
    def box(cls, lo: Sequence[Fraction], hi: Sequence[Fraction]) -> "HPolytope":
        n = len(lo)
        if len(hi) != n:
            raise DimensionMismatchError("box corners have different dimensions")
        rows = []
        for i in range(n):
            e = tuple(_ONE if j == i else _ZERO for j in range(n))
            rows.append(Constraint(e, hi[i]))
            rows.append(Constraint(tuple(-x for x in e), -lo[i]))
        return cls(tuple(rows), n)

    def with_constraints(self, extra: Iterable[Constraint]) -> "HPolytope":
        return HPolytope(self.constraints + tuple(extra), self.ambient_dim)

    def canonical(self) -> "HPolytope":
        """Positive rescaling of every constraint, duplicates and trivial rows removed."""
        seen: Dict[Constraint, None] = {}
        for c in self.constraints:
            if not any(c.normal):
                if c.offset >= 0:
                    continue
                c = Constraint(c.normal, -_ONE)
            seen.setdefault(c.canonical(), None)
        return HPolytope(tuple(sorted(seen)), self.ambient_dim)

    def contains(self, x: Sequence[Fraction], strict: bool = False) -> bool:
        if strict:
            return all(c.slack(x) > 0 for c in self.constraints)
        return all(c.slack(x) >= 0 for c in self.constraints)

    def is_empty(self) -> bool:
        return not lp_feasible(self).feasible

    def interior_point(self) -> Optional[QVector]:
        """A point strictly inside every constraint, if the polytope is full-dimensional."""
        return lp_feasible(self, [True] * len(self.constraints)).witness

    def is_bounded(self) -> bool:
        """True when the recession cone ``{d : normal_i · d <= 0}`` is ``{0}``."""
        n = self.ambient_dim
        cone = [Constraint(c.normal, _ZERO) for c in self.constraints]
        for i in range(n):
            for sign in (_ONE, -_ONE):
                direction = Constraint(
                    tuple(-sign if j == i else _ZERO for j in range(n)), _ZERO
                )
                trial = HPolytope(tuple(cone) + (direction,), n)
                mask = [False] * len(cone) + [True]
                if lp_feasible(trial, mask).feasible:
                    return False
        return True

    def irredundant(self) -> "HPolytope":
        """Drop every constraint implied by the others.

        Assumes the polytope is full-dimensional; a constraint is kept exactly when some
        point violates it while satisfying all the remaining ones.
        """
        kept = list(self.canonical().constraints)
        i = 0
        while i < len(kept):
            others = kept[:i] + kept[i + 1 :]
            flipped = Constraint(tuple(-x for x in kept[i].normal), -kept[i].offset)
            trial = HPolytope(tuple(others) + (flipped,), self.ambient_dim)
            if lp_feasible(trial, [False] * len(others) + [True]).feasible:
                i += 1
            else:
                kept = others
        return HPolytope(tuple(kept), self.ambient_dim)

    def vertices(self) -> List[QVector]:
        return enumerate_vertices(self)

    def volume(self) -> Fraction:
        return polytope_volume(self)


@dataclass(frozen=True)
class LPResult:
    """Outcome of :func:`lp_feasible`.

    ``witness`` is set when the system is feasible. Otherwise ``certificate`` holds
    multipliers λ >= 0 with ``Σ λ_i normal_i = 0`` and either ``Σ λ_i offset_i < 0``, or
    ``Σ λ_i offset_i <= 0`` while some strict constraint has λ_i > 0.
    """

    feasible: bool
    witness: Optional[QVector] = None
    certificate: Optional[QVector] = None


def lp_feasible(
    polytope: HPolytope,
    strict_mask: Optional[Sequence[bool]] = None,
    hint: Optional[Sequence[Fraction]] = None,
) -> LPResult:
    """Decide exactly whether some x satisfies every constraint, strictly where masked.

    Strictness is handled by maximizing a common slack ``t <= 1`` added to every strict
    row; the strict system is feasible exactly when the optimum is positive. The simplex
    method uses Bland's rule, so it terminates on degenerate problems.

    Args:
        polytope: The constraint system.
        strict_mask: One boolean per constraint; all False when omitted.
        hint: A point to translate the problem to. Rows satisfied at the hint need no
            artificial variable, so a nearby interior point makes phase one trivial.

    Returns:
        An :class:`LPResult` with either a witness or an infeasibility certificate.
    """
    constraints = polytope.constraints
    n = polytope.ambient_dim
    if strict_mask is None:
        strict_mask = [False] * len(constraints)
    if len(strict_mask) != len(constraints):
        raise DimensionMismatchError(
            f"strict_mask has {len(strict_mask)} entries for {len(constraints)} constraints"
        )
    origin = tuple(hint) if hint is not None else tuple(_ZERO for _ in range(n))
    if len(origin) != n:
        raise DimensionMismatchError(f"hint has {len(origin)} entries, expected {n}")
    if not constraints:
        return LPResult(True, witness=origin)

    solver = _SlackMaximizer(constraints, strict_mask, origin)
    return solver.solve()


class _SlackMaximizer:
    """Dense two-phase tableau for ``max t  s.t.  G y + m t <= h - G origin, t <= 1``.

    Columns: u (n), v (n) with y = u - v, then t when any row is strict, then one slack
    per row, then one artificial per row whose right-hand side is negative.
    """

    def __init__(
        self,
        constraints: Sequence[Constraint],
        strict_mask: Sequence[bool],
        origin: QVector,
    ) -> None:
        self.n = len(origin)
        self.origin = origin
        self.has_t = any(strict_mask)
        normals = [c.normal for c in constraints]
        rhs = [c.slack(origin) for c in constraints]
        strict = list(strict_mask)
        if self.has_t:
            normals.append(tuple(_ZERO for _ in range(self.n)))
            rhs.append(_ONE)
            strict.append(True)
        self.m = len(normals)

        self.u0 = 0
        self.v0 = self.n
        self.t_col = 2 * self.n if self.has_t else -1
        self.s0 = 2 * self.n + (1 if self.has_t else 0)
        flipped = [b < 0 for b in rhs]
        self.flips = [-_ONE if f else _ONE for f in flipped]
        self.a0 = self.s0 + self.m
        self.art_rows = [i for i, f in enumerate(flipped) if f]
        self.ncols = self.a0 + len(self.art_rows)

        self.rows: List[List[Fraction]] = []
        self.basis: List[int] = []
        art_of_row = {row: self.a0 + k for k, row in enumerate(self.art_rows)}
        for i in range(self.m):
            d = self.flips[i]
            row = [_ZERO] * (self.ncols + 1)
            for j, g in enumerate(normals[i]):
                if g:
                    row[self.u0 + j] = d * g
                    row[self.v0 + j] = -d * g
            if self.has_t:
                is_t_row = i == self.m - 1
                row[self.t_col] = d * (_ONE if (is_t_row or strict[i]) else _ZERO)
            row[self.s0 + i] = d
            row[-1] = d * rhs[i]
            if i in art_of_row:
                row[art_of_row[i]] = _ONE
                self.basis.append(art_of_row[i])
            else:
                self.basis.append(self.s0 + i)
            self.rows.append(row)

    def _pivot(self, r: int, c: int) -> None:
        pivot_row = self.rows[r]
        p = pivot_row[c]
        if p != 1:
            pivot_row = [x / p for x in pivot_row]
            self.rows[r] = pivot_row
        nonzero = [k for k, x in enumerate(pivot_row) if x]
        for i, row in enumerate(self.rows):
            if i != r and row[c]:
                f = row[c]
                for k in nonzero:
                    row[k] -= f * pivot_row[k]
        self.basis[r] = c

    def _reduced_costs(self, cost: Dict[int, Fraction]) -> List[Fraction]:
        reduced = [cost.get(j, _ZERO) for j in range(self.ncols)]
        for row, b in zip(self.rows, self.basis):
            cb = cost.get(b)
            if cb:
                for j, x in enumerate(row[:-1]):
                    if x:
                        reduced[j] -= cb * x
        return reduced

    def _optimize(self, cost: Dict[int, Fraction], allowed: int) -> List[Fraction]:
        """Bland's rule on columns ``< allowed``; returns the final reduced costs."""
        while True:
            reduced = self._reduced_costs(cost)
            entering = next((j for j in range(allowed) if reduced[j] > 0), None)
            if entering is None:
                return reduced
            best: Optional[Tuple[Fraction, int, int]] = None
            for i, row in enumerate(self.rows):
                if row[entering] > 0:
                    key = (row[-1] / row[entering], self.basis[i], i)
                    if best is None or key < best:
                        best = key
            if best is None:
                # Every problem built here is bounded (t <= 1, phase one <= 0).
                raise AssertionError("unbounded slack maximization")
            self._pivot(best[2], entering)

    def _objective_value(self, cost: Dict[int, Fraction]) -> Fraction:
        return sum(
            (cost.get(b, _ZERO) * row[-1] for row, b in zip(self.rows, self.basis)),
            _ZERO,
        )

    def _multipliers(self, reduced: Sequence[Fraction]) -> QVector:
        # λ_i = -(reduced cost of slack i); the auxiliary row t <= 1 is not reported.
        count = self.m - 1 if self.has_t else self.m
        return tuple(-reduced[self.s0 + i] for i in range(count))

    def _value(self, col: int) -> Fraction:
        for row, b in zip(self.rows, self.basis):
            if b == col:
                return row[-1]
        return _ZERO

    def solve(self) -> LPResult:
        if self.art_rows:
            phase_one = {self.a0 + k: -_ONE for k in range(len(self.art_rows))}
            reduced = self._optimize(phase_one, self.ncols)
            if self._objective_value(phase_one) < 0:
                return LPResult(False, certificate=self._multipliers(reduced))
            self._drive_out_artificials()

        if not self.has_t:
            return LPResult(True, witness=self._point())
        phase_two = {self.t_col: _ONE}
        reduced = self._optimize(phase_two, self.a0)
        if self._value(self.t_col) > 0:
            return LPResult(True, witness=self._point())
        return LPResult(False, certificate=self._multipliers(reduced))

    def _drive_out_artificials(self) -> None:
        i = 0
        while i < len(self.rows):
            if self.basis[i] >= self.a0:
                col = next((j for j in range(self.a0) if self.rows[i][j] != 0), None)
                if col is None:
                    # Redundant row: every non-artificial entry is zero.
                    del self.rows[i]
                    del self.basis[i]
                    continue
                self._pivot(i, col)
            i += 1

    def _point(self) -> QVector:
        return tuple(
            self.origin[j] + self._value(self.u0 + j) - self._value(self.v0 + j)
            for j in range(self.n)
        )


def enumerate_vertices(polytope: HPolytope) -> List[QVector]:
    """All vertices of a bounded polytope, deduplicated and sorted lexicographically.

    Every n-subset of the (canonical) constraints is intersected and kept when the
    intersection is a single point satisfying all constraints. The cost is
    ``C(#constraints, n)`` linear solves, which is fine for the small dimensions and
    constraint counts this package handles.
    """
    canonical = polytope.canonical()
    if canonical.is_empty():
        return []
    if not canonical.is_bounded():
        raise UnboundedPolytopeError("unbounded polytope")
    n = canonical.ambient_dim
    rows = canonical.constraints
    found = set()
    for subset in itertools.combinations(range(len(rows)), n):
        normals = [rows[i].normal for i in subset]
        if rank(normals) < n:
            continue
        point = solve_linear_system(normals, [rows[i].offset for i in subset])
        if point is not None and canonical.contains(point):
            found.add(point)
    return sorted(found)


def convex_hull_hrep(points: Sequence[Sequence[Fraction]]) -> HPolytope:
    """Facet description of the convex hull of full-dimensional points."""
    pts = sorted(set(tuple(p) for p in points))
    if not pts:
        raise DimensionMismatchError("convex hull of no points")
    n = len(pts[0])
    if affine_dimension(pts) < n:
        raise DimensionMismatchError(
            f"points span an affine space of dimension {affine_dimension(pts)} < {n}"
        )
    facets: Dict[Constraint, None] = {}
    for subset in itertools.combinations(range(len(pts)), n):
        base = pts[subset[0]]
        spanned = nullspace([sub(pts[i], base) for i in subset[1:]], n)
        if len(spanned) != 1:
            continue
        normal = spanned[0]
        offset = dot(normal, base)
        sides = {(dot(normal, p) > offset) - (dot(normal, p) < offset) for p in pts}
        sides.discard(0)
        if len(sides) != 1:
            continue
        if sides == {1}:
            normal, offset = tuple(-x for x in normal), -offset
        facets.setdefault(Constraint(normal, offset).canonical(), None)
    return HPolytope(tuple(sorted(facets)), n)


def transform_polytope(
    polytope: HPolytope, a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]
) -> HPolytope:
    """The image ``{A x + b : x in polytope}`` for an invertible A."""
    a_inv = inverse(a)
    a_inv_t = transpose(a_inv)
    a_inv_b = mat_vec(a_inv, b)
    rows = []
    for c in polytope.constraints:
        rows.append(Constraint(mat_vec(a_inv_t, c.normal), c.offset + dot(c.normal, a_inv_b)))
    return HPolytope(tuple(rows), polytope.ambient_dim)


def polytope_volume(polytope: HPolytope) -> Fraction:
    """Exact volume by recursive cone triangulation.

    Each face is split into cones from its smallest vertex over the facets that do not
    contain it; each resulting simplex contributes ``|det| / n!``. Lower-dimensional
    polytopes have volume 0.
    """
    canonical = polytope.canonical()
    vertices = enumerate_vertices(canonical)
    n = canonical.ambient_dim
    if affine_dimension(vertices) < n:
        return _ZERO

    incidence = []
    for c in canonical.constraints:
        tight = frozenset(i for i, v in enumerate(vertices) if c.slack(v) == 0)
        if tight:
            incidence.append(tight)

    triangulator = _FaceTriangulator(vertices, incidence)
    total = _ZERO
    for simplex in triangulator.triangulate(frozenset(range(len(vertices))), n):
        apex = vertices[simplex[0]]
        edges = [sub(vertices[i], apex) for i in simplex[1:]]
        total += abs(determinant(edges))
    return total / math.factorial(n)


class _FaceTriangulator:
    def __init__(self, vertices: Sequence[QVector], incidence: Sequence[FrozenSet[int]]):
        self.vertices = vertices
        self.incidence = incidence
        self._cache: Dict[FrozenSet[int], List[Tuple[int, ...]]] = {}

    def _dim(self, face: FrozenSet[int]) -> int:
        return affine_dimension([self.vertices[i] for i in sorted(face)])

    def _facets(self, face: FrozenSet[int], dim: int) -> List[FrozenSet[int]]:
        facets = set()
        for tight in self.incidence:
            candidate = face & tight
            if candidate != face and len(candidate) >= dim and self._dim(candidate) == dim - 1:
                facets.add(candidate)
        return sorted(facets, key=sorted)

    def triangulate(self, face: FrozenSet[int], dim: int) -> List[Tuple[int, ...]]:
        if face in self._cache:
            return self._cache[face]
        if dim == 0:
            result = [(min(face),)]
        else:
            apex = min(face)
            result = []
            for facet in self._facets(face, dim):
                if apex in facet:
                    continue
                for simplex in self.triangulate(facet, dim - 1):
                    result.append((apex,) + simplex)
        self._cache[face] = result
        return result
