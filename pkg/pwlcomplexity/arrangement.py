"""
Hyperplane arrangements: chamber enumeration, deletion–restriction counting, general
position, and the invariant and Coxeter arrangements.
"""

import functools
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    MutableMapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

from pwlcomplexity.constants import (
    AmbientModeError,
    DegenerateHyperplaneError,
    DimensionMismatchError,
)
from pwlcomplexity.exactmath import (
    Constraint,
    HPolytope,
    QVector,
    dot,
    lp_feasible,
    polytope_volume,
    rank,
    solve_linear_system,
)
from pwlcomplexity.rationals import format_rational, to_fraction


__all__ = [
    "Arrangement",
    "Box",
    "Chamber",
    "GeneralPositionReport",
    "Hyperplane",
    "auto_box",
    "build_invariant_arrangement",
    "canonical_key",
    "chambers_by_sign",
    "count_chambers",
    "count_chambers_deletion_restriction",
    "coxeter_arrangement",
    "deletion",
    "enumerate_chambers",
    "invariant_intersection_report",
    "is_general_position",
    "restrict",
]


logger = logging.getLogger(__name__)

_ZERO = Fraction(0)
_ONE = Fraction(1)

HyperplaneKey = Tuple[QVector, Fraction]


def canonical_key(normal: Sequence[Fraction], offset: Fraction) -> HyperplaneKey:
    """Scale ``normal · x + offset = 0`` so its first nonzero normal entry is 1.

    Two hyperplanes are the same set exactly when their keys are equal.
    """
    lead = next(x for x in normal if x != 0)
    return tuple(x / lead for x in normal), offset / lead


@dataclass(frozen=True)
class Hyperplane:
    """The affine hyperplane ``normal · x + offset = 0``."""

    normal: QVector
    offset: Fraction
    label: str = ""

    def __post_init__(self) -> None:
        if not any(self.normal):
            raise DegenerateHyperplaneError(
                f"hyperplane {self.label or '<unlabeled>'} has a zero normal"
            )

    @classmethod
    def of(cls, normal: Iterable[Any], offset: Any, label: str = "") -> "Hyperplane":
        return cls(tuple(to_fraction(x) for x in normal), to_fraction(offset), label)

    @property
    def dim(self) -> int:
        return len(self.normal)

    def evaluate(self, x: Sequence[Fraction]) -> Fraction:
        return dot(self.normal, x) + self.offset

    def side(self, x: Sequence[Fraction]) -> int:
        value = self.evaluate(x)
        return (value > 0) - (value < 0)

    def key(self) -> HyperplaneKey:
        return canonical_key(self.normal, self.offset)

    def halfspace(self, sign: int) -> Constraint:
        """The closed side ``sign * (normal · x + offset) >= 0`` as a constraint."""
        if sign > 0:
            return Constraint(tuple(-x for x in self.normal), self.offset)
        return Constraint(self.normal, -self.offset)

    def __str__(self) -> str:
        terms = " + ".join(
            f"{format_rational(a)}*x{i + 1}" for i, a in enumerate(self.normal) if a
        )
        return f"{self.label}: {terms} + {format_rational(self.offset)} = 0"


@dataclass(frozen=True)
class Box:
    """The axis-aligned box ``lo <= x <= hi`` with nonempty interior."""

    lo: QVector
    hi: QVector

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi):
            raise DimensionMismatchError("box corners have different dimensions")
        if any(lo >= hi for lo, hi in zip(self.lo, self.hi)):
            raise ValueError(f"box {self} has an empty interior")

    @classmethod
    def cube(cls, dim: int, lo: Any = 0, hi: Any = 1) -> "Box":
        return cls((to_fraction(lo),) * dim, (to_fraction(hi),) * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def polytope(self) -> HPolytope:
        return HPolytope.box(self.lo, self.hi)

    def center(self) -> QVector:
        return tuple((lo + hi) / 2 for lo, hi in zip(self.lo, self.hi))

    def volume(self) -> Fraction:
        result = _ONE
        for lo, hi in zip(self.lo, self.hi):
            result *= hi - lo
        return result

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all(lo <= v <= hi for lo, v, hi in zip(self.lo, x, self.hi))

    def is_permutation_stable(self) -> bool:
        return len(set(self.lo)) <= 1 and len(set(self.hi)) <= 1

    def __str__(self) -> str:
        lo = ",".join(format_rational(x) for x in self.lo)
        hi = ",".join(format_rational(x) for x in self.hi)
        return f"[{lo}]..[{hi}]"


@dataclass(frozen=True)
class Arrangement:
    hyperplanes: Tuple[Hyperplane, ...]
    dim: int
    clip_box: Optional[Box] = None

    def __post_init__(self) -> None:
        if self.dim < 0:
            raise DimensionMismatchError("arrangements live in a space of dimension >= 0")
        for h in self.hyperplanes:
            if h.dim != self.dim:
                raise DimensionMismatchError(
                    f"hyperplane {h.label} lives in dimension {h.dim}, "
                    f"expected {self.dim}"
                )
        labels = [h.label for h in self.hyperplanes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"hyperplane labels are not unique: {labels}")
        if self.clip_box is not None and self.clip_box.dim != self.dim:
            raise DimensionMismatchError("clip box dimension differs from arrangement")

    def __len__(self) -> int:
        return len(self.hyperplanes)

    def with_box(self, box: Optional[Box]) -> "Arrangement":
        return Arrangement(self.hyperplanes, self.dim, box)

    def union(self, other: "Arrangement") -> "Arrangement":
        """Hyperplanes of both arrangements, with repeated sets kept once."""
        seen = {h.key() for h in self.hyperplanes}
        extra = []
        for h in other.hyperplanes:
            if h.key() not in seen:
                seen.add(h.key())
                extra.append(h)
        return Arrangement(self.hyperplanes + tuple(extra), self.dim, self.clip_box)

    def keys(self) -> Tuple[HyperplaneKey, ...]:
        return tuple(h.key() for h in self.hyperplanes)

    def sign_vector(self, x: Sequence[Fraction]) -> Tuple[int, ...]:
        return tuple(h.side(x) for h in self.hyperplanes)


@dataclass(frozen=True)
class Chamber:
    """A connected component of the complement, identified by its sign vector."""

    sign_vector: Tuple[int, ...]
    witness: QVector
    h_rep: HPolytope

    def signs(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.sign_vector)

    def volume(self) -> Fraction:
        return polytope_volume(self.h_rep)


class _Cell(NamedTuple):
    signs: Tuple[int, ...]
    constraints: Tuple[Constraint, ...]
    witness: QVector


def _split_cell(cell: _Cell, hyperplane: Hyperplane) -> List[_Cell]:
    value = hyperplane.evaluate(cell.witness)
    result = []
    for sign in (-1, 1):
        halfspace = hyperplane.halfspace(sign)
        constraints = cell.constraints + (halfspace,)
        if value * sign > 0:
            witness: Optional[QVector] = cell.witness
        else:
            trial = HPolytope(constraints, len(cell.witness))
            witness = lp_feasible(trial, [True] * len(constraints), cell.witness).witness
        if witness is not None:
            result.append(_Cell(cell.signs + (sign,), constraints, witness))
    return result


def _split_cell_star(args: Tuple[_Cell, Hyperplane]) -> List[_Cell]:
    return _split_cell(*args)


def enumerate_chambers(
    arr: Arrangement, *, ambient: bool = False, jobs: int = 1
) -> List[Chamber]:
    """Enumerate the chambers of an arrangement by inserting hyperplanes one at a time.

    Each existing cell is tested against the new hyperplane with strict feasibility
    problems; the side containing the cell's current witness needs no test.

    Args:
        arr: The arrangement. With a clip box only chambers meeting the box interior are
            returned and their H-representations include the box.
        ambient: Must be True to enumerate the chambers of the whole space when the
            arrangement has no clip box.
        jobs: Number of worker processes used for each splitting round.

    Returns:
        The chambers, sorted by sign vector.
    """
    if arr.clip_box is None and not ambient:
        raise AmbientModeError(
            "arrangement has no clip box; pass ambient=True to count chambers of the "
            "whole space"
        )
    if arr.dim == 0:
        raise DimensionMismatchError("use count_chambers for 0-dimensional arrangements")

    if arr.clip_box is not None:
        start = _Cell((), arr.clip_box.polytope().constraints, arr.clip_box.center())
    else:
        start = _Cell((), (), tuple(_ZERO for _ in range(arr.dim)))

    cells = [start]
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for hyperplane in arr.hyperplanes:
            if executor is not None:
                parts = executor.map(_split_cell_star, [(c, hyperplane) for c in cells])
            else:
                parts = (_split_cell(c, hyperplane) for c in cells)
            cells = [piece for part in parts for piece in part]
            logger.debug("inserted %s: %d cells", hyperplane.label, len(cells))
    finally:
        if executor is not None:
            executor.shutdown()

    cells.sort(key=lambda c: c.signs)
    return [Chamber(c.signs, c.witness, HPolytope(c.constraints, arr.dim)) for c in cells]


def count_chambers(arr: Arrangement, *, ambient: bool = True) -> int:
    """Number of chambers; a 0-dimensional space has exactly one."""
    if arr.dim == 0:
        return 1
    if arr.clip_box is not None and ambient:
        arr = arr.with_box(None)
    return len(enumerate_chambers(arr, ambient=ambient))


def auto_box(arr: Arrangement) -> Box:
    """A cube ``[-R, R]ⁿ`` meeting every chamber of the arrangement.

    Every chamber's closure contains a whole flat of maximal rank, and each such flat
    has a point whose coordinates are bounded by the largest particular solution of a
    subsystem of at most n hyperplanes. R is twice that bound plus one.
    """
    largest = _ZERO
    n = arr.dim
    for size in range(1, min(n, len(arr)) + 1):
        for subset in itertools.combinations(arr.hyperplanes, size):
            point = solve_linear_system(
                [h.normal for h in subset], [-h.offset for h in subset]
            )
            if point is not None:
                largest = max([largest] + [abs(x) for x in point])
    radius = 2 * largest + 1
    return Box((-radius,) * n, (radius,) * n)


def deletion(arr: Arrangement, index: int) -> Arrangement:
    """The arrangement without its ``index``-th hyperplane."""
    kept = arr.hyperplanes[:index] + arr.hyperplanes[index + 1 :]
    return Arrangement(kept, arr.dim)


def _restriction_chart(
    normal: Sequence[Fraction], offset: Fraction
) -> Tuple[QVector, List[QVector]]:
    """A point of the hyperplane and a basis of its direction space."""
    n = len(normal)
    p = next(i for i, a in enumerate(normal) if a != 0)
    origin = tuple(-offset / normal[p] if i == p else _ZERO for i in range(n))
    basis = []
    for j in range(n):
        if j == p:
            continue
        basis.append(
            tuple(
                _ONE if i == j else (-normal[j] / normal[p] if i == p else _ZERO)
                for i in range(n)
            )
        )
    return origin, basis


def _restricted_keys(
    keys: Sequence[HyperplaneKey], onto: HyperplaneKey
) -> Tuple[HyperplaneKey, ...]:
    origin, basis = _restriction_chart(*onto)
    found = set()
    for normal, offset in keys:
        restricted = tuple(dot(normal, e) for e in basis)
        if any(restricted):
            found.add(canonical_key(restricted, dot(normal, origin) + offset))
    return tuple(sorted(found))


def restrict(arr: Arrangement, index: int) -> Arrangement:
    """The traces of the other hyperplanes on the ``index``-th one.

    Coordinates on the hyperplane come from solving its equation for its first nonzero
    coordinate. Parallel and identical hyperplanes leave no trace; traces that coincide
    are kept once, under the first label.
    """
    target = arr.hyperplanes[index]
    origin, basis = _restriction_chart(target.normal, target.offset)
    seen = set()
    restricted = []
    for i, h in enumerate(arr.hyperplanes):
        if i == index:
            continue
        normal = tuple(dot(h.normal, e) for e in basis)
        if not any(normal):
            continue
        offset = dot(h.normal, origin) + h.offset
        key = canonical_key(normal, offset)
        if key in seen:
            continue
        seen.add(key)
        restricted.append(Hyperplane(normal, offset, h.label))
    return Arrangement(tuple(restricted), arr.dim - 1)


@functools.lru_cache(maxsize=None)
def _count_canonical(dim: int, keys: Tuple[HyperplaneKey, ...]) -> int:
    if not keys or dim == 0:
        return 1
    if dim == 1:
        return len(keys) + 1
    *rest, chosen = keys
    return _count_canonical(dim, tuple(rest)) + _count_canonical(
        dim - 1, _restricted_keys(rest, chosen)
    )


def _canonical_signature(arr: Arrangement) -> Tuple[int, Tuple[HyperplaneKey, ...]]:
    return arr.dim, tuple(sorted(set(arr.keys())))


def count_chambers_deletion_restriction(
    arr: Arrangement, cache: Optional[MutableMapping[str, int]] = None
) -> int:
    """Count chambers of the whole space with |Ch(A)| = |Ch(A')| + |Ch(A'')|.

    Sub-arrangements are canonicalized (hyperplanes as sets, sorted) and memoized.

    Args:
        arr: The arrangement; a clip box is ignored.
        cache: Optional persistent mapping from canonical arrangement strings to counts.
    """
    dim, keys = _canonical_signature(arr)
    cache_key = _signature_text(dim, keys)
    if cache is not None and cache_key in cache:
        return int(cache[cache_key])
    count = _count_canonical(dim, keys)
    if cache is not None:
        cache[cache_key] = count
    return count


def _signature_text(dim: int, keys: Sequence[HyperplaneKey]) -> str:
    parts = [
        ",".join(format_rational(x) for x in normal) + ";" + format_rational(offset)
        for normal, offset in keys
    ]
    return f"{dim}|" + "|".join(parts)


@dataclass(frozen=True)
class GeneralPositionReport:
    in_general_position: bool
    violating: Tuple[str, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.in_general_position


def _flat(hyperplanes: Sequence[Hyperplane]) -> Tuple[bool, int, int]:
    """(nonempty, rank of normals, rank of augmented rows) of an intersection."""
    normals = [h.normal for h in hyperplanes]
    augmented = [h.normal + (h.offset,) for h in hyperplanes]
    r = rank(normals)
    r_aug = rank(augmented)
    return r == r_aug, r, r_aug


def is_general_position(arr: Arrangement) -> GeneralPositionReport:
    """Check that every r <= n hyperplanes meet in codimension r and n + 1 never meet.

    Subsets are examined by size, then lexicographically; the first failing one is
    reported by label.
    """
    n = arr.dim
    planes = arr.hyperplanes
    for size in range(2, min(n, len(planes)) + 1):
        for subset in itertools.combinations(planes, size):
            nonempty, r, _ = _flat(subset)
            if not nonempty or r < size:
                return GeneralPositionReport(
                    False,
                    tuple(h.label for h in subset),
                    f"{size} hyperplanes do not meet in codimension {size}",
                )
    if len(planes) > n:
        for subset in itertools.combinations(planes, n + 1):
            if _flat(subset)[0]:
                return GeneralPositionReport(
                    False,
                    tuple(h.label for h in subset),
                    f"{n + 1} hyperplanes have a common point",
                )
    return GeneralPositionReport(True)


def build_invariant_arrangement(
    params: Sequence[Tuple[Any, Any, Any]], n: int, *, warn: bool = True
) -> Arrangement:
    """The arrangement of hyperplanes ``a_i x_j + b_i Σ_{k≠j} x_k + c_i = 0``.

    Args:
        params: One triple ``(a_i, b_i, c_i)`` per block, m >= 1 of them.
        n: Dimension, n >= 1.
        warn: Log every departure from the generic intersection pattern.

    Returns:
        The m·n hyperplanes labeled ``H_{i,j}``, block by block.
    """
    if not params or n < 1:
        raise DimensionMismatchError("need m >= 1 parameter triples and n >= 1")
    hyperplanes = []
    for i, (a, b, c) in enumerate(params):
        a, b, c = to_fraction(a), to_fraction(b), to_fraction(c)
        for j in range(n):
            normal = tuple(a if k == j else b for k in range(n))
            hyperplanes.append(Hyperplane(normal, c, f"H_{{{i + 1},{j + 1}}}"))
    arr = Arrangement(tuple(hyperplanes), n)
    if not warn:
        return arr
    for problem in invariant_intersection_report(arr, len(params)):
        logger.warning("invariant arrangement degenerates: %s", problem)
    return arr


def _same_flat(first: Sequence[Hyperplane], second: Sequence[Hyperplane]) -> bool:
    nonempty_a, _, r_a = _flat(first)
    nonempty_b, _, r_b = _flat(second)
    if not nonempty_a or not nonempty_b:
        return nonempty_a == nonempty_b
    combined = [h.normal + (h.offset,) for h in list(first) + list(second)]
    return rank(combined) == r_a == r_b


def invariant_intersection_report(arr: Arrangement, m: int) -> List[str]:
    """Describe every way an invariant arrangement departs from its generic pattern.

    Checks that the hyperplanes of one block are distinct, that three hyperplanes
    sharing a coordinate index have no common point, and that for two blocks i1, i2 and
    two coordinates j1, j2 the three triple intersections mixing them coincide.
    """
    n = arr.dim
    if len(arr) != m * n:
        raise DimensionMismatchError(f"expected {m * n} hyperplanes, got {len(arr)}")

    def plane(i: int, j: int) -> Hyperplane:
        return arr.hyperplanes[i * n + j]

    problems = []
    for i in range(m):
        if n > 1 and plane(i, 0).key() == plane(i, 1).key():
            problems.append(f"block {i + 1}: a_i = b_i, its {n} hyperplanes coincide")
    for j in range(n):
        for i1, i2, i3 in itertools.combinations(range(m), 3):
            if _flat([plane(i1, j), plane(i2, j), plane(i3, j)])[0]:
                problems.append(
                    f"H_{{{i1 + 1},{j + 1}}}, H_{{{i2 + 1},{j + 1}}}, "
                    f"H_{{{i3 + 1},{j + 1}}} have a common point"
                )
    for i1, i2 in itertools.combinations(range(m), 2):
        for j1, j2 in itertools.combinations(range(n), 2):
            first = [plane(i1, j1), plane(i1, j2), plane(i2, j1)]
            second = [plane(i1, j1), plane(i1, j2), plane(i2, j2)]
            third = [plane(i1, j1), plane(i2, j1), plane(i2, j2)]
            if not (_same_flat(first, second) and _same_flat(second, third)):
                problems.append(
                    f"blocks {i1 + 1},{i2 + 1} and coordinates {j1 + 1},{j2 + 1}: "
                    "triple intersections differ"
                )
    return problems


def coxeter_arrangement(n: int) -> Arrangement:
    """The reflecting hyperplanes ``x_i - x_j = 0`` of the symmetric group."""
    if n < 2:
        raise DimensionMismatchError("the Coxeter arrangement needs n >= 2")
    hyperplanes = []
    for i, j in itertools.combinations(range(n), 2):
        normal = tuple(_ONE if k == i else (-_ONE if k == j else _ZERO) for k in range(n))
        hyperplanes.append(Hyperplane(normal, _ZERO, f"W_{{{i + 1},{j + 1}}}"))
    return Arrangement(tuple(hyperplanes), n)


def chambers_by_sign(chambers: Sequence[Chamber]) -> Dict[Tuple[int, ...], int]:
    return {c.sign_vector: i for i, c in enumerate(chambers)}
