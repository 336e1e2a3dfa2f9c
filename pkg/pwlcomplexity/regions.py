"""
Exact enumeration of the linear pieces of a ReLU network over a box.

Cells are refined layer by layer: each cell carries the affine map computed by the
layers seen so far, every unit of the next layer splits it along the unit's switching
hyperplane, and the map is composed with the resulting activation pattern. Cells with
the same final map that share a facet are merged so that pieces are maximal.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from pwlcomplexity.arrangement import Box, canonical_key
from pwlcomplexity.bounds import schlafli
from pwlcomplexity.constants import (
    DEFAULT_PIECE_CAP,
    DimensionMismatchError,
    NonConvexPieceError,
    OutsideDomainError,
    PieceCapExceededError,
    UnstableBoxError,
)
from pwlcomplexity.exactmath import (
    Constraint,
    HPolytope,
    QMatrix,
    QVector,
    affine_dimension,
    convex_hull_hrep,
    dot,
    enumerate_vertices,
    identity,
    lp_feasible,
    mat_mul,
    mat_vec,
    polytope_volume,
)
from pwlcomplexity.network import AffineLayer, Family, ReluNetwork
from pwlcomplexity.rationals import to_fraction
from pwlcomplexity.symmetry import (
    PermutationAction,
    UnionFind,
    permutation_matrix,
    permute,
)


__all__ = [
    "LinearPiece",
    "PieceSet",
    "enumerate_pieces",
    "merge_pieces",
    "piece_at",
    "pieceset_from_segments",
    "symmetric_piece_failures",
]


logger = logging.getLogger(__name__)

_ZERO = Fraction(0)

Trace = Tuple[Tuple[int, ...], ...]


@dataclass(frozen=True)
class LinearPiece:
    """A maximal linear region with the affine map the function takes on it.

    ``cells`` are the convex activation cells the piece was merged from. When their
    union is convex, ``region_hrep`` describes it; a non-convex union has no single
    polytope. ``trace`` is the smallest activation pattern among the cells and does not
    take part in equality.
    """

    cells: Tuple[HPolytope, ...]
    map_matrix: QMatrix
    map_bias: QVector
    region_hrep: Optional[HPolytope]
    trace: Trace = field(default=(), compare=False)

    @property
    def dim(self) -> int:
        return self.cells[0].ambient_dim

    @property
    def is_convex(self) -> bool:
        return self.region_hrep is not None

    @property
    def region(self) -> HPolytope:
        if self.region_hrep is None:
            raise NonConvexPieceError(
                f"piece {self.trace} is a non-convex union of {len(self.cells)} cells"
            )
        return self.region_hrep

    def vertices(self) -> List[QVector]:
        return enumerate_vertices(self.region)

    def volume(self) -> Fraction:
        return sum((polytope_volume(c) for c in self.cells), _ZERO)

    def contains(self, x: Sequence[Fraction]) -> bool:
        return any(c.contains(x) for c in self.cells)

    def evaluate(self, x: Sequence[Fraction]) -> QVector:
        return tuple(v + c for v, c in zip(mat_vec(self.map_matrix, x), self.map_bias))

    def interior_point(self) -> QVector:
        """A point strictly inside the first cell."""
        point = self.cells[0].interior_point()
        if point is None:
            raise DimensionMismatchError(f"piece {self.trace} has an empty interior")
        return point


@dataclass(frozen=True)
class PieceSet:
    pieces: Tuple[LinearPiece, ...]
    box: Box
    source: str = ""

    def __len__(self) -> int:
        return len(self.pieces)

    def __iter__(self) -> Iterator[LinearPiece]:
        return iter(self.pieces)

    def __getitem__(self, index: int) -> LinearPiece:
        return self.pieces[index]

    @property
    def dim(self) -> int:
        return self.box.dim

    def volume(self) -> Fraction:
        return sum((p.volume() for p in self.pieces), _ZERO)


class _Cell(NamedTuple):
    constraints: Tuple[Constraint, ...]
    witness: QVector
    matrix: QMatrix
    bias: QVector
    trace: Trace


def _split(
    constraints: Tuple[Constraint, ...],
    witness: QVector,
    normal: QVector,
    offset: Fraction,
) -> List[Tuple[int, Tuple[Constraint, ...], QVector]]:
    """Both open sides of ``normal · x + offset = 0`` that meet the cell interior."""
    value = dot(normal, witness) + offset
    sides = []
    for sign in (-1, 1):
        if sign > 0:
            halfspace = Constraint(tuple(-a for a in normal), offset)
        else:
            halfspace = Constraint(normal, -offset)
        extended = constraints + (halfspace,)
        if value * sign > 0:
            point: Optional[QVector] = witness
        else:
            trial = HPolytope(extended, len(witness))
            point = lp_feasible(trial, [True] * len(extended), witness).witness
        if point is not None:
            sides.append((sign, extended, point))
    return sides


def _refine_cell(cell: _Cell, layer: AffineLayer) -> List[_Cell]:
    """Split a cell by every unit of a hidden layer and apply the activation."""
    pre_matrix = mat_mul(layer.weight, cell.matrix)
    pre_bias = tuple(v + c for v, c in zip(mat_vec(layer.weight, cell.bias), layer.bias))

    partial: List[Tuple[Tuple[Constraint, ...], QVector, Tuple[int, ...]]] = [
        (cell.constraints, cell.witness, ())
    ]
    for normal, offset in zip(pre_matrix, pre_bias):
        refined = []
        for constraints, witness, pattern in partial:
            if not any(normal):
                refined.append((constraints, witness, pattern + (1 if offset > 0 else -1,)))
                continue
            for sign, extended, point in _split(constraints, witness, normal, offset):
                refined.append((extended, point, pattern + (sign,)))
        partial = refined

    result = []
    for constraints, witness, pattern in partial:
        matrix = tuple(
            row if s > 0 else tuple(_ZERO for _ in row) for row, s in zip(pre_matrix, pattern)
        )
        bias = tuple(v if s > 0 else _ZERO for v, s in zip(pre_bias, pattern))
        result.append(_Cell(constraints, witness, matrix, bias, cell.trace + (pattern,)))
    return result


def _refine_cell_star(args: Tuple[_Cell, AffineLayer]) -> List[_Cell]:
    return _refine_cell(*args)


def _projected_cells(count: int, layer: AffineLayer, dim: int) -> int:
    """Most cells ``count`` cells can become after refinement by ``layer``.

    Inside a cell every unit switches on one hyperplane of the input space, and units
    whose rows are proportional switch on the same one, so each cell splits into at most
    ``schlafli(dim, distinct)`` parts.
    """
    distinct = {canonical_key(row, c) for row, c in zip(layer.weight, layer.bias) if any(row)}
    return count * schlafli(dim, len(distinct))


def _closures_share_facet(first: HPolytope, second: HPolytope) -> bool:
    meeting = enumerate_vertices(first.with_constraints(second.constraints))
    return bool(meeting) and affine_dimension(meeting) == first.ambient_dim - 1


def _pieces_adjacent(first: LinearPiece, second: LinearPiece) -> bool:
    return any(_closures_share_facet(a, b) for a in first.cells for b in second.cells)


def _union_region(cells: Sequence[HPolytope]) -> Optional[HPolytope]:
    """The union as one polytope when it is convex, else None."""
    if len(cells) == 1:
        return cells[0]
    points = [v for c in cells for v in enumerate_vertices(c)]
    hull = convex_hull_hrep(points)
    if polytope_volume(hull) == sum((polytope_volume(c) for c in cells), _ZERO):
        return hull
    return None


def merge_pieces(pieces: Sequence[LinearPiece]) -> Tuple[LinearPiece, ...]:
    """Merge pieces with identical affine maps whose closures share a facet.

    Merging is transitive through chains of adjacent pieces. The result is sorted by
    trace and is unchanged by a second pass.
    """
    groups: Dict[Tuple[QMatrix, QVector], List[int]] = {}
    for index, piece in enumerate(pieces):
        groups.setdefault((piece.map_matrix, piece.map_bias), []).append(index)

    classes: UnionFind[int] = UnionFind(range(len(pieces)))
    for members in groups.values():
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                if classes.find(a) != classes.find(b) and _pieces_adjacent(
                    pieces[a], pieces[b]
                ):
                    classes.union(a, b)

    merged = []
    for component in classes.classes():
        if len(component) == 1:
            merged.append(pieces[component[0]])
            continue
        cells = tuple(c for i in component for c in pieces[i].cells)
        first = pieces[component[0]]
        region = _union_region(cells)
        trace = min(pieces[i].trace for i in component)
        if region is None:
            logger.warning(
                "merged piece %s is a non-convex union of %d cells", trace, len(cells)
            )
        else:
            logger.debug("merged %d cells into one convex piece", len(cells))
        merged.append(
            LinearPiece(cells, first.map_matrix, first.map_bias, region, trace)
        )
    merged.sort(key=lambda p: p.trace)
    return tuple(merged)


def enumerate_pieces(
    net: ReluNetwork,
    box: Box,
    *,
    cap: Optional[int] = DEFAULT_PIECE_CAP,
    jobs: int = 1,
    merge: bool = True,
) -> PieceSet:
    """Enumerate the linear pieces of a network restricted to a box.

    Args:
        net: The network.
        box: The compact domain K.
        cap: Refuse before refining a layer whose projected cell count exceeds this,
            and after any layer that produced more cells; None disables the guard.
        jobs: Number of worker processes used per layer.
        merge: Merge same-map neighbours into maximal pieces.

    Returns:
        The pieces, sorted by activation trace.
    """
    if box.dim != net.input_dim:
        raise DimensionMismatchError(
            f"box of dimension {box.dim} for a network with {net.input_dim} inputs"
        )
    if net.family in (Family.INV_SHALLOW, Family.DEEP_SET) and not box.is_permutation_stable():
        raise UnstableBoxError(f"box {box} is not stable under coordinate permutations")

    n = box.dim
    cells = [
        _Cell(
            box.polytope().constraints,
            box.center(),
            identity(n),
            tuple(_ZERO for _ in range(n)),
            (),
        )
    ]
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for number, layer in enumerate(net.hidden_layers, start=1):
            if cap is not None:
                projected = _projected_cells(len(cells), layer, n)
                if projected > cap:
                    raise PieceCapExceededError(
                        f"projected {projected} cells after layer {number} exceed the cap "
                        f"of {cap}; raise --cap to continue"
                    )
            if executor is not None:
                parts = executor.map(_refine_cell_star, [(c, layer) for c in cells])
            else:
                parts = (_refine_cell(c, layer) for c in cells)
            cells = [piece for part in parts for piece in part]
            logger.debug("layer %d: %d cells", number, len(cells))
            if cap is not None and len(cells) > cap:
                raise PieceCapExceededError(
                    f"{len(cells)} cells after layer {number} exceed the cap of {cap}; "
                    "raise --cap to continue"
                )
    finally:
        if executor is not None:
            executor.shutdown()

    output = net.layers[-1]
    raw = []
    for cell in cells:
        matrix = mat_mul(output.weight, cell.matrix)
        bias = tuple(v + c for v, c in zip(mat_vec(output.weight, cell.bias), output.bias))
        polytope = HPolytope(cell.constraints, n)
        raw.append(LinearPiece((polytope,), matrix, bias, polytope, cell.trace))
    raw.sort(key=lambda p: p.trace)
    pieces = merge_pieces(raw) if merge else tuple(raw)
    return PieceSet(pieces, box, net.family.value)


def piece_at(pieces: PieceSet, x: Sequence[object]) -> LinearPiece:
    """The piece containing x; on shared boundaries the smallest trace wins."""
    point = tuple(to_fraction(v) for v in x)
    if len(point) != pieces.dim or not pieces.box.contains(point):
        raise OutsideDomainError(f"{tuple(map(str, point))} is outside the box {pieces.box}")
    candidates = [p for p in pieces if p.contains(point)]
    if not candidates:
        raise OutsideDomainError(f"no piece contains {tuple(map(str, point))}")
    return min(candidates, key=lambda p: p.trace)


def pieceset_from_segments(
    breakpoints: Sequence[object],
    slopes: Sequence[object],
    intercepts: Sequence[object],
) -> PieceSet:
    """A 1-D piece set ``f(x) = slope_i x + intercept_i`` on ``[t_i, t_{i+1}]``.

    The function may jump at breakpoints. Adjacent segments with the same line are
    merged.
    """
    ts = [to_fraction(t) for t in breakpoints]
    if len(ts) != len(slopes) + 1 or len(slopes) != len(intercepts) or not slopes:
        raise DimensionMismatchError(
            "need k + 1 breakpoints for k slopes and k intercepts, k >= 1"
        )
    if any(a >= b for a, b in zip(ts, ts[1:])):
        raise ValueError("breakpoints must increase strictly")
    raw = []
    for i, (slope, intercept) in enumerate(zip(slopes, intercepts)):
        interval = HPolytope.box((ts[i],), (ts[i + 1],))
        raw.append(
            LinearPiece(
                (interval,),
                ((to_fraction(slope),),),
                (to_fraction(intercept),),
                interval,
                ((i,),),
            )
        )
    return PieceSet(merge_pieces(raw), Box((ts[0],), (ts[-1],)), "segments")


def symmetric_piece_failures(pieces: PieceSet, action: PermutationAction) -> List[str]:
    """Check that σ maps every piece onto a piece whose function composed with σ agrees.

    For each convex piece D with map f and each σ, the piece D' containing σ of an
    interior point of D must satisfy ``σ(D) = D'`` as vertex sets and ``f = f' ∘ σ``.
    """
    failures = []
    for index, piece in enumerate(pieces):
        if not piece.is_convex:
            failures.append(f"piece {index} is not convex; its images are not checked")
            continue
        vertices = piece.vertices()
        inner = piece.interior_point()
        for sigma in action.elements:
            image = piece_at(pieces, permute(sigma, inner))
            moved = {permute(sigma, v) for v in vertices}
            if not image.is_convex or moved != set(image.vertices()):
                failures.append(f"σ = {sigma} does not map piece {index} onto a piece")
                continue
            p_sigma = permutation_matrix(sigma)
            if (
                mat_mul(image.map_matrix, p_sigma) != piece.map_matrix
                or image.map_bias != piece.map_bias
            ):
                failures.append(f"f ≠ f' ∘ σ for piece {index} and σ = {sigma}")
    return failures
