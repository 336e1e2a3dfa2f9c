"""
The classical complexity c# (number of linear pieces) and the refined complexity c~
(number of classes of pieces under Euclidean transformations).

Two pieces (f, D) and (f', D') are equivalent when an isometry φ(x) = A x + b maps D onto
D' and f = f' ∘ φ on D. Everything here is decided exactly: candidate isometries come
from vertex correspondences, so A and b are rational and both conditions are equalities
of rationals.
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, MutableMapping, Optional, Sequence, Tuple

from pwlcomplexity.arrangement import Box, auto_box, enumerate_chambers
from pwlcomplexity.constants import (
    DEFAULT_PIECE_CAP,
    DEFAULT_VERTEX_CAP,
    DimensionMismatchError,
    OrbitCountError,
    PieceCapExceededError,
    UnstableBoxError,
)
from pwlcomplexity.exactmath import (
    QMatrix,
    QVector,
    affine_dimension,
    characteristic_polynomial,
    identity,
    is_orthogonal,
    mat_mul,
    mat_vec,
    solve_affine_from_point_pairs,
    squared_distance,
    transpose,
)
from pwlcomplexity.network import Family, ReluNetwork, first_layer_arrangement
from pwlcomplexity.regions import LinearPiece, PieceSet, enumerate_pieces, piece_at
from pwlcomplexity.symmetry import (
    PermutationAction,
    UnionFind,
    chamber_orbits,
    orbit_count_kamiya,
    permutation_matrix,
    permute,
)


__all__ = [
    "ComplexityReport",
    "EquivalenceResult",
    "EquivalenceWitness",
    "EuclideanTransform",
    "Method",
    "Verdict",
    "c_sharp",
    "c_tilde",
    "c_tilde_invariant_shallow",
    "invariance_group_check",
    "piece_signature",
    "pieces_equivalent",
    "verify_witness",
]


logger = logging.getLogger(__name__)

_ZERO = Fraction(0)


@dataclass(frozen=True)
class EuclideanTransform:
    """``x ↦ matrix · x + offset`` with an orthogonal matrix."""

    matrix: QMatrix
    offset: QVector

    def __post_init__(self) -> None:
        if len(self.matrix) != len(self.offset):
            raise DimensionMismatchError("matrix and offset sizes differ")
        if not is_orthogonal(self.matrix):
            raise ValueError("a Euclidean transformation needs an orthogonal matrix")

    @classmethod
    def identity(cls, n: int) -> "EuclideanTransform":
        return cls(identity(n), tuple(_ZERO for _ in range(n)))

    def apply(self, x: Sequence[Fraction]) -> QVector:
        return tuple(v + b for v, b in zip(mat_vec(self.matrix, x), self.offset))

    def inverse(self) -> "EuclideanTransform":
        back = transpose(self.matrix)
        return EuclideanTransform(back, tuple(-v for v in mat_vec(back, self.offset)))

    def compose(self, first: "EuclideanTransform") -> "EuclideanTransform":
        """``self ∘ first``."""
        return EuclideanTransform(
            mat_mul(self.matrix, first.matrix), self.apply(first.offset)
        )


@dataclass(frozen=True)
class EquivalenceWitness:
    """``transform`` maps piece ``source`` onto piece ``target``."""

    source: int
    target: int
    transform: EuclideanTransform
    region_mapped: bool = True
    function_composed: bool = True


class Verdict(Enum):
    EQUIVALENT = "equivalent"
    INEQUIVALENT = "inequivalent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EquivalenceResult:
    verdict: Verdict
    witness: Optional[EquivalenceWitness] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.verdict == Verdict.EQUIVALENT


class Method(Enum):
    ONE_DIM_EXACT = "one_dim_exact"
    ISOMETRY_SEARCH_EXACT = "isometry_search_exact"
    ORBIT_KAMIYA = "orbit_kamiya"
    SIGNATURE_BOUNDED = "signature_bounded"


@dataclass(frozen=True)
class ComplexityReport:
    """c# and c~ of a piece set; ``c_tilde`` is None when only ``[lower, upper]`` is known."""

    c_sharp: int
    c_tilde: Optional[int]
    lower: int
    upper: int
    classes: Tuple[Tuple[int, ...], ...]
    witnesses: Tuple[EquivalenceWitness, ...]
    method: Method
    detail: str = ""
    notes: Tuple[str, ...] = ()

    @property
    def exact(self) -> bool:
        return self.c_tilde is not None

    def summary(self) -> str:
        if self.c_tilde is not None:
            value = f"c~ = {self.c_tilde}"
        else:
            value = f"c~ in [{self.lower}, {self.upper}]"
        method = self.method.value + (f", {self.detail}" if self.detail else "")
        return f"c# = {self.c_sharp}, {value} (method: {method})"


def verify_witness(
    p: LinearPiece, q: LinearPiece, transform: EuclideanTransform
) -> Tuple[bool, bool]:
    """Whether φ maps the region of p onto the region of q, and whether ``f_p = f_q ∘ φ``."""
    region_mapped = {transform.apply(v) for v in p.vertices()} == set(q.vertices())
    function_composed = (
        mat_mul(q.map_matrix, transform.matrix) == p.map_matrix
        and tuple(
            v + c for v, c in zip(mat_vec(q.map_matrix, transform.offset), q.map_bias)
        )
        == p.map_bias
    )
    return region_mapped, function_composed


def _gram_polynomial(piece: LinearPiece) -> QVector:
    """Characteristic polynomial of MᵀM: the squared singular values of the map."""
    m = piece.map_matrix
    return characteristic_polynomial(mat_mul(transpose(m), m))


def piece_signature(piece: LinearPiece) -> Tuple[object, ...]:
    """Invariants every Euclidean-equivalent piece shares.

    Volume, number of vertices, the sorted multiset of squared vertex distances and the
    squared singular values of the map. Non-convex pieces only contribute the volume and
    the singular values.
    """
    head: Tuple[object, ...] = (piece.volume(), len(piece.map_matrix), _gram_polynomial(piece))
    if not piece.is_convex:
        return head
    vertices = piece.vertices()
    distances = tuple(
        sorted(squared_distance(u, v) for u, v in itertools.combinations(vertices, 2))
    )
    return head + (len(vertices), distances)


def _affine_base(vertices: Sequence[QVector]) -> List[int]:
    """Indices of n + 1 affinely independent vertices, chosen greedily in order."""
    n = len(vertices[0])
    chosen: List[int] = []
    for index, v in enumerate(vertices):
        if affine_dimension([vertices[i] for i in chosen] + [v]) == len(chosen):
            chosen.append(index)
            if len(chosen) == n + 1:
                break
    return chosen


def _distance_profile(vertices: Sequence[QVector], v: QVector) -> Tuple[Fraction, ...]:
    return tuple(sorted(squared_distance(v, u) for u in vertices))


def _search_isometry(
    p: LinearPiece, q: LinearPiece, vp: Sequence[QVector], vq: Sequence[QVector]
) -> Optional[EuclideanTransform]:
    """Try every distance-consistent assignment of an affine base of p to vertices of q."""
    base = _affine_base(vp)
    profiles_q = [_distance_profile(vq, v) for v in vq]
    candidates = [
        [t for t, prof in enumerate(profiles_q) if prof == _distance_profile(vp, vp[b])]
        for b in base
    ]
    targets_q = set(vq)

    def extend(assigned: List[int]) -> Optional[EuclideanTransform]:
        k = len(assigned)
        if k == len(base):
            try:
                a, b = solve_affine_from_point_pairs(
                    [vp[i] for i in base], [vq[t] for t in assigned]
                )
            except ValueError:
                return None
            if not is_orthogonal(a):
                return None
            transform = EuclideanTransform(a, b)
            if {transform.apply(v) for v in vp} != targets_q:
                return None
            region_mapped, function_composed = verify_witness(p, q, transform)
            return transform if region_mapped and function_composed else None
        for t in candidates[k]:
            if t in assigned:
                continue
            if all(
                squared_distance(vp[base[k]], vp[base[i]])
                == squared_distance(vq[t], vq[assigned[i]])
                for i in range(k)
            ):
                found = extend(assigned + [t])
                if found is not None:
                    return found
        return None

    return extend([])


def pieces_equivalent(
    p: LinearPiece,
    q: LinearPiece,
    *,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
    ids: Tuple[int, int] = (0, 1),
) -> EquivalenceResult:
    """Decide whether two pieces are Euclidean-equivalent.

    Cheap invariants are compared first; when they agree, every vertex correspondence
    of an affine base consistent with the distance data is turned into a candidate
    isometry and checked exactly.

    Args:
        p: The source piece.
        q: The target piece.
        vertex_cap: Pieces with more vertices than this are not searched.
        ids: Piece ids recorded in the witness.

    Returns:
        An :class:`EquivalenceResult`; its witness maps p onto q.
    """
    if p.dim != q.dim:
        raise DimensionMismatchError(f"pieces live in dimensions {p.dim} and {q.dim}")
    if len(p.map_matrix) != len(q.map_matrix):
        return EquivalenceResult(Verdict.INEQUIVALENT, reason="output dimensions differ")
    if p.volume() != q.volume():
        return EquivalenceResult(Verdict.INEQUIVALENT, reason="volumes differ")
    if _gram_polynomial(p) != _gram_polynomial(q):
        return EquivalenceResult(Verdict.INEQUIVALENT, reason="singular values differ")
    if not (p.is_convex and q.is_convex):
        return EquivalenceResult(Verdict.INCONCLUSIVE, reason="non-convex piece")

    vp, vq = p.vertices(), q.vertices()
    if max(len(vp), len(vq)) > vertex_cap:
        return EquivalenceResult(
            Verdict.INCONCLUSIVE, reason=f"more than {vertex_cap} vertices"
        )
    if piece_signature(p) != piece_signature(q):
        return EquivalenceResult(Verdict.INEQUIVALENT, reason="vertex distances differ")

    transform = _search_isometry(p, q, vp, vq)
    if transform is None:
        return EquivalenceResult(Verdict.INEQUIVALENT, reason="no vertex correspondence")
    return EquivalenceResult(
        Verdict.EQUIVALENT, EquivalenceWitness(ids[0], ids[1], transform)
    )


def _one_dim_equivalent(
    p: LinearPiece, q: LinearPiece, ids: Tuple[int, int]
) -> EquivalenceResult:
    """Closed form on the line.

    φ(x) = ±x + b works when ``α_p = a α_q`` and ``β_p = b α_q + β_q``.
    """
    (lo_p,), (hi_p,) = p.vertices()
    (lo_q,), (hi_q,) = q.vertices()
    if hi_p - lo_p != hi_q - lo_q or len(p.map_matrix) != len(q.map_matrix):
        return EquivalenceResult(Verdict.INEQUIVALENT, reason="lengths differ")
    for a, b in ((1, lo_q - lo_p), (-1, hi_q + lo_p)):
        slopes_match = all(rp[0] == a * rq[0] for rp, rq in zip(p.map_matrix, q.map_matrix))
        offsets_match = all(
            bp == b * rq[0] + bq for bp, rq, bq in zip(p.map_bias, q.map_matrix, q.map_bias)
        )
        if slopes_match and offsets_match:
            transform = EuclideanTransform(((Fraction(a),),), (Fraction(b),))
            return EquivalenceResult(
                Verdict.EQUIVALENT, EquivalenceWitness(ids[0], ids[1], transform)
            )
    return EquivalenceResult(Verdict.INEQUIVALENT, reason="no reflection or translation")


def _test_pair(args: Tuple[LinearPiece, LinearPiece, int, int, int, bool]) -> EquivalenceResult:
    p, q, i, j, vertex_cap, one_dim = args
    if one_dim:
        return _one_dim_equivalent(p, q, (i, j))
    return pieces_equivalent(p, q, vertex_cap=vertex_cap, ids=(i, j))


def c_sharp(pieces: PieceSet) -> int:
    return len(pieces)


def c_tilde(
    pieces: PieceSet,
    *,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
    method: str = "auto",
    jobs: int = 1,
) -> ComplexityReport:
    """Count equivalence classes of pieces.

    Pieces are bucketed by volume and singular values; pairs are only tested within a
    bucket and the classes are built with union-find, the smallest piece id
    representing its class. When some pair is inconclusive the report carries the
    interval between the count with every such pair merged and the count without.

    Args:
        pieces: The piece set.
        vertex_cap: Passed to :func:`pieces_equivalent`.
        method: ``"auto"`` takes the closed form on the line, ``"isometry"`` forces the
            vertex search, ``"one_dim"`` requires the closed form.
        jobs: Worker processes for the pair tests of each bucket.
    """
    one_dim = pieces.dim == 1 and method != "isometry" and all(p.is_convex for p in pieces)
    if method == "one_dim" and not one_dim:
        raise DimensionMismatchError("the closed form needs convex pieces on the line")

    buckets: Dict[Tuple[object, ...], List[int]] = {}
    for index, piece in enumerate(pieces):
        key = (piece.volume(), len(piece.map_matrix), _gram_polynomial(piece))
        buckets.setdefault(key, []).append(index)

    classes: UnionFind[int] = UnionFind(range(len(pieces)))
    witnesses: List[EquivalenceWitness] = []
    inconclusive: List[Tuple[int, int]] = []
    executor = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for members in buckets.values():
            if len(members) < 2:
                continue
            pairs = list(itertools.combinations(members, 2))
            logger.debug("bucket of %d pieces, %d pairs", len(members), len(pairs))
            if executor is not None:
                args = [(pieces[i], pieces[j], i, j, vertex_cap, one_dim) for i, j in pairs]
                results = dict(zip(pairs, executor.map(_test_pair, args)))
            else:
                results = {}
            for i, j in pairs:
                if executor is None and classes.find(i) == classes.find(j):
                    continue
                if (i, j) in results:
                    result = results[(i, j)]
                else:
                    result = _test_pair((pieces[i], pieces[j], i, j, vertex_cap, one_dim))
                if result.verdict == Verdict.EQUIVALENT:
                    assert result.witness is not None
                    if classes.union(i, j):
                        witnesses.append(result.witness)
                elif result.verdict == Verdict.INCONCLUSIVE:
                    inconclusive.append((i, j))
    finally:
        if executor is not None:
            executor.shutdown()

    upper = len(classes)
    optimistic: UnionFind[int] = UnionFind(range(len(pieces)))
    for i, j in [(w.source, w.target) for w in witnesses] + inconclusive:
        optimistic.union(i, j)
    lower = len(optimistic)
    partition = tuple(tuple(c) for c in classes.classes())

    if lower == upper:
        chosen = Method.ONE_DIM_EXACT if one_dim else Method.ISOMETRY_SEARCH_EXACT
        return ComplexityReport(
            len(pieces), upper, upper, upper, partition, tuple(witnesses), chosen
        )
    logger.warning("c~ is only known to lie in [%d, %d]", lower, upper)
    return ComplexityReport(
        len(pieces),
        None,
        lower,
        upper,
        partition,
        tuple(witnesses),
        Method.SIGNATURE_BOUNDED,
        notes=(f"{len(inconclusive)} inconclusive pairs",),
    )


def c_tilde_invariant_shallow(
    net: ReluNetwork,
    box: Optional[Box] = None,
    *,
    cap: Optional[int] = DEFAULT_PIECE_CAP,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
    cross_check: bool = True,
    cache: Optional[MutableMapping[str, int]] = None,
) -> ComplexityReport:
    """c~ of a permutation-invariant shallow network as the number of chamber orbits.

    Orbits are counted directly and as ``|Ch(Aₙ ∪ B)| / n!``; the two must agree. Pieces
    in one orbit are equivalent through the permutation itself, so the orbit count is an
    upper bound, equal to c~ when orbits have distinct volumes in the box. When the
    piece count is within ``cap`` the general pipeline is run as well and its exact
    answer is reported.
    """
    if net.family != Family.INV_SHALLOW:
        raise ValueError(f"expected an inv_shallow network, got {net.family.value}")
    arr = first_layer_arrangement(net)
    n = net.input_dim
    if box is None:
        box = auto_box(arr)
    if not box.is_permutation_stable():
        raise UnstableBoxError(f"box {box} is not stable under coordinate permutations")

    action = PermutationAction.symmetric_group(n)
    kamiya = orbit_count_kamiya(arr, n, cache)
    direct = len(chamber_orbits(arr, action))
    if direct != kamiya:
        raise OrbitCountError(
            f"direct orbit count {direct} differs from Kamiya count {kamiya}"
        )

    boxed = arr.with_box(box)
    chambers = enumerate_chambers(boxed)
    orbits = chamber_orbits(boxed, action, chambers)
    notes = []
    if len(orbits) != kamiya:
        notes.append(f"the box meets {len(orbits)} of {kamiya} orbits")
    orbit_volumes = {chambers[orbit[0]].volume() for orbit in orbits}
    lower = len(orbit_volumes)
    upper = len(orbits)
    value: Optional[int] = upper if lower == upper else None
    method = Method.ORBIT_KAMIYA if value is not None else Method.SIGNATURE_BOUNDED
    if value is None:
        notes.append("orbits share volumes; c~ is bounded by the orbit count")
        logger.warning("invariant orbits share volumes, reporting [%d, %d]", lower, upper)
    classes = tuple(tuple(orbit) for orbit in orbits)
    c_sharp_value = len(chambers)
    witnesses: Tuple[EquivalenceWitness, ...] = ()
    detail = "direct agrees"

    if cross_check:
        try:
            pieces = enumerate_pieces(net, box, cap=cap)
        except PieceCapExceededError as error:
            notes.append(f"general pipeline skipped: {error}")
        else:
            general = c_tilde(pieces, vertex_cap=vertex_cap)
            c_sharp_value = general.c_sharp
            classes, witnesses = general.classes, general.witnesses
            if general.exact and general.c_tilde != value:
                if value is None:
                    notes.append("general pipeline resolves the orbit interval")
                else:
                    notes.append(
                        f"general pipeline finds {general.c_tilde} classes, "
                        f"orbit count {upper}"
                    )
                value, method = general.c_tilde, Method.ISOMETRY_SEARCH_EXACT
                lower = upper = general.c_tilde  # type: ignore[assignment]
            elif not general.exact:
                lower, upper = max(lower, general.lower), min(upper, general.upper)
            else:
                notes.append("general pipeline agrees")

    return ComplexityReport(
        c_sharp_value,
        value,
        lower if value is None else value,
        upper if value is None else value,
        classes,
        witnesses,
        method,
        detail,
        tuple(notes),
    )


def invariance_group_check(
    pieces: PieceSet, action: PermutationAction, report: ComplexityReport
) -> List[str]:
    """Every σ-image of a piece must be equivalent to it through σ and lie in its class."""
    class_of = {i: k for k, members in enumerate(report.classes) for i in members}
    failures = []
    for index, piece in enumerate(pieces):
        if not piece.is_convex:
            continue
        inner = piece.interior_point()
        for sigma in action.elements:
            image = piece_at(pieces, permute(sigma, inner))
            target = pieces.pieces.index(image)
            transform = EuclideanTransform(
                permutation_matrix(sigma), tuple(_ZERO for _ in range(pieces.dim))
            )
            if not all(verify_witness(piece, image, transform)):
                failures.append(f"σ = {sigma} is not a witness for piece {index}")
            if class_of[index] != class_of[target]:
                failures.append(
                    f"pieces {index} and {target} are in one orbit but different classes"
                )
    return failures
