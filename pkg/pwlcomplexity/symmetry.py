"""
Coordinate-permutation actions on points, hyperplanes and chambers, and the two ways of
counting chamber orbits.
"""

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Dict,
    Generic,
    Hashable,
    Iterable,
    List,
    MutableMapping,
    Optional,
    Sequence,
    Tuple,
    TypeVar,
)

from pwlcomplexity.arrangement import (
    Arrangement,
    Chamber,
    Hyperplane,
    chambers_by_sign,
    count_chambers_deletion_restriction,
    coxeter_arrangement,
    enumerate_chambers,
)
from pwlcomplexity.constants import (
    CoxeterOverlapError,
    DimensionMismatchError,
    OrbitCountError,
    UnstableArrangementError,
    UnstableBoxError,
)
from pwlcomplexity.exactmath import QMatrix, QVector


__all__ = [
    "ChamberAction",
    "Permutation",
    "PermutationAction",
    "UnionFind",
    "act_on_chambers",
    "augmented_chamber_count",
    "chamber_orbits",
    "group_action_failures",
    "orbit_count_direct",
    "orbit_count_kamiya",
    "permutation_matrix",
    "permute",
    "permute_hyperplane",
]


logger = logging.getLogger(__name__)

Permutation = Tuple[int, ...]
ChamberAction = Dict[Permutation, Tuple[int, ...]]

T = TypeVar("T", bound=Hashable)


def permute(sigma: Permutation, x: Sequence[Fraction]) -> QVector:
    """``σ·x``: the entry at position k moves to position σ(k)."""
    result: List[Fraction] = [Fraction(0)] * len(x)
    for k, value in enumerate(x):
        result[sigma[k]] = value
    return tuple(result)


def permutation_matrix(sigma: Permutation) -> QMatrix:
    """The orthogonal matrix P with ``P x = σ·x``."""
    n = len(sigma)
    return tuple(
        tuple(Fraction(1) if sigma[k] == i else Fraction(0) for k in range(n))
        for i in range(n)
    )


def permute_hyperplane(sigma: Permutation, hyperplane: Hyperplane) -> Hyperplane:
    """The image ``σ(H) = {σ·x : x in H}``."""
    return Hyperplane(permute(sigma, hyperplane.normal), hyperplane.offset, hyperplane.label)


@dataclass(frozen=True)
class PermutationAction:
    """A group of coordinate permutations of ``{0, …, degree - 1}``."""

    degree: int
    elements: Tuple[Permutation, ...]

    def __post_init__(self) -> None:
        expected = tuple(range(self.degree))
        for sigma in self.elements:
            if tuple(sorted(sigma)) != expected:
                raise ValueError(f"{sigma} is not a permutation of {self.degree} points")

    @classmethod
    def symmetric_group(cls, n: int) -> "PermutationAction":
        return cls(n, tuple(itertools.permutations(range(n))))

    @classmethod
    def trivial(cls, n: int) -> "PermutationAction":
        return cls(n, (tuple(range(n)),))

    @classmethod
    def generated_by(
        cls, n: int, generators: Iterable[Permutation]
    ) -> "PermutationAction":
        """Closure of the generators under composition."""
        identity = tuple(range(n))
        gens = [tuple(g) for g in generators]
        seen = {identity}
        queue = deque([identity])
        while queue:
            current = queue.popleft()
            for g in gens:
                product = compose(g, current)
                if product not in seen:
                    seen.add(product)
                    queue.append(product)
        return cls(n, tuple(sorted(seen)))

    @staticmethod
    def adjacent_transpositions(n: int) -> List[Permutation]:
        result = []
        for k in range(n - 1):
            sigma = list(range(n))
            sigma[k], sigma[k + 1] = sigma[k + 1], sigma[k]
            result.append(tuple(sigma))
        return result

    def apply(self, sigma: Permutation, x: Sequence[Fraction]) -> QVector:
        return permute(sigma, x)


def compose(sigma: Permutation, tau: Permutation) -> Permutation:
    """``σ∘τ``, acting as τ first."""
    return tuple(sigma[tau[k]] for k in range(len(tau)))


def inverse_permutation(sigma: Permutation) -> Permutation:
    result = [0] * len(sigma)
    for k, image in enumerate(sigma):
        result[image] = k
    return tuple(result)


class UnionFind(Generic[T]):
    """Disjoint sets whose representative is always the smallest member."""

    def __init__(self, items: Iterable[T]) -> None:
        self.parent: Dict[T, T] = {x: x for x in items}

    def find(self, x: T) -> T:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: T, y: T) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        low, high = (rx, ry) if rx < ry else (ry, rx)  # type: ignore[operator]
        self.parent[high] = low
        return True

    def classes(self) -> List[List[T]]:
        groups: Dict[T, List[T]] = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])  # type: ignore

    def __len__(self) -> int:
        return sum(1 for x in self.parent if self.find(x) == x)


def _check_stable(arr: Arrangement, action: PermutationAction) -> None:
    keys = set(arr.keys())
    for sigma in action.elements:
        for h in arr.hyperplanes:
            if permute_hyperplane(sigma, h).key() not in keys:
                raise UnstableArrangementError(
                    f"permutation {sigma} maps hyperplane {h.label} outside the arrangement"
                )


def act_on_chambers(
    arr: Arrangement,
    action: PermutationAction,
    chambers: Optional[Sequence[Chamber]] = None,
) -> ChamberAction:
    """Map every chamber to its image under every group element.

    The image of a chamber is located through the transformed witness, which lies
    strictly inside the image chamber because σ permutes the hyperplanes.

    Returns:
        For each permutation, the tuple whose k-th entry is the index of σ(chamber k).
    """
    if action.degree != arr.dim:
        raise DimensionMismatchError(
            f"action of degree {action.degree} on an arrangement of dimension {arr.dim}"
        )
    if arr.clip_box is not None and not arr.clip_box.is_permutation_stable():
        raise UnstableBoxError(f"clip box {arr.clip_box} is not permutation-stable")
    _check_stable(arr, action)
    if chambers is None:
        chambers = enumerate_chambers(arr, ambient=arr.clip_box is None)
    index = chambers_by_sign(chambers)

    images: ChamberAction = {}
    for sigma in action.elements:
        images[sigma] = tuple(
            index[arr.sign_vector(permute(sigma, c.witness))] for c in chambers
        )
    return images


def group_action_failures(images: ChamberAction) -> List[str]:
    """Check that identity acts trivially and that στ acts as σ after τ."""
    failures = []
    for sigma, image in images.items():
        if sigma == tuple(range(len(sigma))) and image != tuple(range(len(image))):
            failures.append("identity does not act trivially")
    for sigma, tau in itertools.product(images, repeat=2):
        product = compose(sigma, tau)
        if product not in images:
            continue
        expected = tuple(images[sigma][images[tau][k]] for k in range(len(images[tau])))
        if images[product] != expected:
            failures.append(f"action of {product} differs from {sigma} after {tau}")
    return failures


def chamber_orbits(
    arr: Arrangement,
    action: PermutationAction,
    chambers: Optional[Sequence[Chamber]] = None,
) -> List[List[int]]:
    images = act_on_chambers(arr, action, chambers)
    count = len(next(iter(images.values()))) if images else 0
    classes = UnionFind(range(count))
    for image in images.values():
        for k, target in enumerate(image):
            classes.union(k, target)
    return classes.classes()


def orbit_count_direct(arr: Arrangement, action: PermutationAction) -> int:
    return len(chamber_orbits(arr, action))


def augmented_chamber_count(
    b_arr: Arrangement, cache: Optional[MutableMapping[str, int]] = None
) -> int:
    """Chambers of the arrangement together with all Coxeter planes ``x_i = x_j``."""
    coxeter = coxeter_arrangement(b_arr.dim)
    overlap = set(coxeter.keys()) & set(b_arr.keys())
    if overlap:
        raise CoxeterOverlapError(
            f"{len(overlap)} hyperplanes are Coxeter planes; perturb the arrangement"
        )
    return count_chambers_deletion_restriction(coxeter.union(b_arr.with_box(None)), cache)


def orbit_count_kamiya(
    b_arr: Arrangement, n: int, cache: Optional[MutableMapping[str, int]] = None
) -> int:
    """Number of chamber orbits under all coordinate permutations, as |Ch(Aₙ ∪ B)| / n!."""
    if b_arr.dim != n:
        raise DimensionMismatchError(f"arrangement of dimension {b_arr.dim}, expected {n}")
    if n == 1:
        return count_chambers_deletion_restriction(b_arr, cache)
    total = augmented_chamber_count(b_arr, cache)
    orbits, remainder = divmod(total, math.factorial(n))
    if remainder:
        raise OrbitCountError(
            f"{total} chambers are not divisible by {n}!: arrangement not in generic "
            "position w.r.t. Coxeter planes"
        )
    logger.debug("%d augmented chambers, %d orbits", total, orbits)
    return orbits
