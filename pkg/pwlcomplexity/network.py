"""
ReLU networks of the families the package analyses: fully connected, permutation
invariant shallow, folding networks with hypercuboid grids, and deep-set networks.

A network is a chain of :class:`AffineLayer` objects with ReLU between consecutive
layers and no activation after the last one.
"""

import itertools
import logging
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from pwlcomplexity.arrangement import (
    Arrangement,
    Hyperplane,
    build_invariant_arrangement,
    invariant_intersection_report,
)
from pwlcomplexity.constants import (
    DEFAULT_PERTURBATION,
    DEFAULT_SEED,
    INVARIANCE_SAMPLES,
    DimensionMismatchError,
    FoldingError,
)
from pwlcomplexity.exactmath import (
    QMatrix,
    QVector,
    mat_mul,
    mat_vec,
    rank,
    solve_linear_system,
)
from pwlcomplexity.rationals import to_fraction
from pwlcomplexity.symmetry import Permutation, PermutationAction, permute


__all__ = [
    "AffineLayer",
    "Family",
    "FoldLevel",
    "FoldSpec",
    "LayerKind",
    "LayerTag",
    "ReluNetwork",
    "build_deep_set_variant",
    "build_fc_deep",
    "build_fc_shallow",
    "build_invariant_shallow",
    "build_montufar_variant",
    "equivariance_violations",
    "first_layer_arrangement",
    "fold_map",
    "head_from_arrangement",
    "invariance_violations",
    "invariant_parameters",
    "is_permutation_invariant",
    "perturb",
    "random_invariant_params",
]


logger = logging.getLogger(__name__)

_ZERO = Fraction(0)
_ONE = Fraction(1)

# Exhaustive checks over S_n up to this degree; adjacent transpositions above it.
_EXHAUSTIVE_DEGREE = 6


class LayerKind(Enum):
    GENERIC = "generic"
    EQUIVARIANT = "equivariant"
    INVARIANT = "invariant"
    FOLDING = "folding"


_TAG_RE = re.compile(
    r"^(?P<kind>generic|equivariant|invariant|folding)(\((?P<args>[\d, ]*)\))?$"
)


@dataclass(frozen=True)
class LayerTag:
    """Structural role of a layer: ``generic``, ``equivariant(m,n)``, ``invariant(m,n)``
    or ``folding(l)``."""

    kind: LayerKind = LayerKind.GENERIC
    m: int = 0
    n: int = 0
    level: int = 0

    @classmethod
    def equivariant(cls, m: int, n: int) -> "LayerTag":
        return cls(LayerKind.EQUIVARIANT, m, n)

    @classmethod
    def invariant(cls, m: int, n: int) -> "LayerTag":
        return cls(LayerKind.INVARIANT, m, n)

    @classmethod
    def folding(cls, level: int) -> "LayerTag":
        return cls(LayerKind.FOLDING, level=level)

    @classmethod
    def parse(cls, text: str) -> "LayerTag":
        match = _TAG_RE.match(text.strip())
        if match is None:
            raise ValueError(f"Invalid layer tag {text!r}")
        kind = LayerKind(match["kind"])
        args = [int(a) for a in (match["args"] or "").split(",") if a.strip()]
        expected = {
            LayerKind.GENERIC: 0,
            LayerKind.EQUIVARIANT: 2,
            LayerKind.INVARIANT: 2,
            LayerKind.FOLDING: 1,
        }[kind]
        if len(args) != expected:
            raise ValueError(f"Layer tag {text!r} takes {expected} arguments")
        if kind == LayerKind.FOLDING:
            return cls.folding(args[0])
        if kind == LayerKind.GENERIC:
            return cls()
        return cls(kind, args[0], args[1])

    def __str__(self) -> str:
        if self.kind == LayerKind.GENERIC:
            return "generic"
        if self.kind == LayerKind.FOLDING:
            return f"folding({self.level})"
        return f"{self.kind.value}({self.m},{self.n})"


@dataclass(frozen=True)
class AffineLayer:
    """``x ↦ weight · x + bias``."""

    weight: QMatrix
    bias: QVector
    tag: LayerTag = field(default_factory=LayerTag)

    def __post_init__(self) -> None:
        if len(self.weight) != len(self.bias):
            raise DimensionMismatchError(
                f"layer has {len(self.weight)} weight rows but {len(self.bias)} biases"
            )
        if len({len(row) for row in self.weight}) > 1:
            raise DimensionMismatchError("weight rows have different lengths")

    @classmethod
    def of(
        cls, weight: Sequence[Sequence[Any]], bias: Sequence[Any], tag: Optional[LayerTag] = None
    ) -> "AffineLayer":
        return cls(
            tuple(tuple(to_fraction(x) for x in row) for row in weight),
            tuple(to_fraction(x) for x in bias),
            tag or LayerTag(),
        )

    @property
    def in_dim(self) -> int:
        return len(self.weight[0]) if self.weight else 0

    @property
    def out_dim(self) -> int:
        return len(self.bias)

    def apply(self, x: Sequence[Fraction]) -> QVector:
        return tuple(v + c for v, c in zip(mat_vec(self.weight, x), self.bias))


class Family(Enum):
    FC_SHALLOW = "fc_shallow"
    FC_DEEP = "fc_deep"
    INV_SHALLOW = "inv_shallow"
    DEEP_SET = "deep_set"
    MONTUFAR_VARIANT = "montufar_variant"


@dataclass(frozen=True)
class FoldLevel:
    """Partitions of ``[0, 1]`` for one folding level, one per input axis.

    ``width`` is the number of hidden units of the level; ``width // n`` must equal the
    number of parts of every axis, extra units are zero.
    """

    parts: Tuple[QVector, ...]
    width: int

    @property
    def p(self) -> int:
        return len(self.parts[0])

    @property
    def shared(self) -> bool:
        return all(axis == self.parts[0] for axis in self.parts)

    def breakpoints(self, axis: int) -> QVector:
        """Partial sums ``0, a_1, a_1 + a_2, …, 1`` of one axis."""
        return tuple(itertools.accumulate((_ZERO,) + self.parts[axis]))


@dataclass(frozen=True)
class FoldSpec:
    n: int
    levels: Tuple[FoldLevel, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise FoldingError("folding needs an input dimension n >= 1")
        for number, level in enumerate(self.levels, start=1):
            if len(level.parts) != self.n:
                raise FoldingError(
                    f"level {number} has {len(level.parts)} partitions for {self.n} axes"
                )
            if len({len(axis) for axis in level.parts}) != 1 or level.p < 1:
                raise FoldingError(f"level {number}: axes have different part counts")
            if level.width // self.n != level.p:
                raise FoldingError(
                    f"level {number}: width {level.width} gives {level.width // self.n} "
                    f"units per axis, but the partitions have {level.p} parts"
                )
            for axis in level.parts:
                if any(a <= 0 for a in axis):
                    raise FoldingError(f"level {number}: parts must be positive")
                if sum(axis) != 1:
                    raise FoldingError(f"level {number}: parts sum to {sum(axis)}, not 1")

    @classmethod
    def of(
        cls,
        n: int,
        levels: Sequence[Sequence[Sequence[Any]]],
        widths: Optional[Sequence[int]] = None,
    ) -> "FoldSpec":
        """Build from one list of per-axis partitions per level.

        A level given as a flat list of numbers is shared by all axes.
        """
        built = []
        for index, level in enumerate(levels):
            if level and not isinstance(level[0], (list, tuple)):
                axes = [tuple(to_fraction(a) for a in level)] * n
            else:
                axes = [tuple(to_fraction(a) for a in axis) for axis in level]
            width = widths[index] if widths is not None else n * len(axes[0])
            built.append(FoldLevel(tuple(axes), width))
        return cls(n, tuple(built))

    @property
    def shared(self) -> bool:
        return all(level.shared for level in self.levels)

    @property
    def widths(self) -> Tuple[int, ...]:
        return tuple(level.width for level in self.levels)

    def grid_size(self) -> int:
        size = 1
        for level in self.levels:
            size *= level.p ** self.n
        return size

    def cell_volumes(self) -> Dict[Tuple[Tuple[int, ...], ...], Fraction]:
        """Volume of each hypercuboid of the composed fold, keyed by per-axis indices.

        The key has one tuple per axis holding the part index chosen at every level.
        """
        per_axis = []
        for axis in range(self.n):
            choices = itertools.product(*(range(level.p) for level in self.levels))
            lengths = {}
            for index in choices:
                length = _ONE
                for level, k in zip(self.levels, index):
                    length *= level.parts[axis][k]
                lengths[index] = length
            per_axis.append(lengths)
        volumes = {}
        for key in itertools.product(*(sorted(lengths) for lengths in per_axis)):
            volume = _ONE
            for axis, index in enumerate(key):
                volume *= per_axis[axis][index]
            volumes[key] = volume
        return volumes


@dataclass(frozen=True)
class ReluNetwork:
    layers: Tuple[AffineLayer, ...]
    family: Family = Family.FC_SHALLOW
    fold_spec: Optional[FoldSpec] = None
    head: Optional["ReluNetwork"] = None

    def __post_init__(self) -> None:
        if len(self.layers) < 2:
            raise DimensionMismatchError("a ReLU network needs at least one hidden layer")
        for number, (before, after) in enumerate(
            zip(self.layers, self.layers[1:]), start=1
        ):
            if before.out_dim < 1:
                raise DimensionMismatchError(f"layer {number} has no units")
            if after.in_dim != before.out_dim:
                raise DimensionMismatchError(
                    f"layer {number + 1} expects {after.in_dim} inputs, "
                    f"layer {number} produces {before.out_dim}"
                )
        if self.family == Family.INV_SHALLOW:
            kinds = (self.layers[0].tag.kind, self.layers[-1].tag.kind)
            if kinds != (LayerKind.EQUIVARIANT, LayerKind.INVARIANT) or len(self.layers) != 2:
                raise ValueError(
                    "an inv_shallow network is one equivariant and one invariant layer"
                )
        if self.family in (Family.MONTUFAR_VARIANT, Family.DEEP_SET):
            if self.fold_spec is None or self.head is None:
                raise FoldingError(f"{self.family.value} networks carry a fold spec and a head")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def widths(self) -> Tuple[int, ...]:
        return (self.input_dim,) + tuple(layer.out_dim for layer in self.layers)

    @property
    def hidden_layers(self) -> Tuple[AffineLayer, ...]:
        return self.layers[:-1]

    def evaluate(self, x: Sequence[Any]) -> QVector:
        """Exact forward pass."""
        value: QVector = tuple(to_fraction(v) for v in x)
        if len(value) != self.input_dim:
            raise DimensionMismatchError(
                f"input has {len(value)} entries, expected {self.input_dim}"
            )
        for layer in self.hidden_layers:
            value = tuple(max(v, _ZERO) for v in layer.apply(value))
        return self.layers[-1].apply(value)


def first_layer_arrangement(net: ReluNetwork) -> Arrangement:
    """The hyperplanes where first-layer units switch, one per unit with a nonzero row.

    Units of invariant networks are labeled ``H_{i,j}`` by block and coordinate, others
    ``H_{k}``.
    """
    layer = net.layers[0]
    n = net.input_dim
    hyperplanes = []
    for k, (row, c) in enumerate(zip(layer.weight, layer.bias)):
        if not any(row):
            continue
        if layer.tag.kind == LayerKind.EQUIVARIANT:
            label = f"H_{{{k // n + 1},{k % n + 1}}}"
        else:
            label = f"H_{{{k + 1}}}"
        hyperplanes.append(Hyperplane(row, c, label))
    return Arrangement(tuple(hyperplanes), n)


def _rng_rational(rng: random.Random, bound: int = 20, denominator: int = 12) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, denominator))


def _rng_row(rng: random.Random, size: int) -> QVector:
    while True:
        row = tuple(_rng_rational(rng) for _ in range(size))
        if any(row):
            return row


def build_fc_shallow(
    n0: int,
    n1: int,
    n2: int,
    weights: Optional[Tuple[Any, Any, Any, Any]] = None,
    seed: int = DEFAULT_SEED,
) -> ReluNetwork:
    """A fully connected network ``ℝ^n0 → ℝ^n1 → ℝ^n2``.

    Args:
        n0: Input dimension.
        n1: Hidden width.
        n2: Output dimension.
        weights: Optional ``(W1, c1, W2, c2)``; seeded random rationals otherwise.
        seed: Seed for the random weights.
    """
    if min(n0, n1, n2) < 1:
        raise DimensionMismatchError(f"widths ({n0}, {n1}, {n2}) must all be >= 1")
    if weights is not None:
        w1, c1, w2, c2 = weights
        first = AffineLayer.of(w1, c1)
        second = AffineLayer.of(w2, c2)
        if (first.in_dim, first.out_dim, second.out_dim) != (n0, n1, n2):
            raise DimensionMismatchError(
                f"weights have shape ({first.in_dim}, {first.out_dim}, {second.out_dim}), "
                f"expected ({n0}, {n1}, {n2})"
            )
        return ReluNetwork((first, second), Family.FC_SHALLOW)
    return build_fc_deep((n0, n1, n2), seed)


def build_fc_deep(widths: Sequence[int], seed: int = DEFAULT_SEED) -> ReluNetwork:
    """A fully connected network with seeded random rational weights."""
    if len(widths) < 3 or min(widths) < 1:
        raise DimensionMismatchError(f"widths {tuple(widths)} need >= 3 entries, all >= 1")
    rng = random.Random(seed)
    layers = []
    for n_in, n_out in zip(widths, widths[1:]):
        weight = tuple(_rng_row(rng, n_in) for _ in range(n_out))
        bias = tuple(_rng_rational(rng) for _ in range(n_out))
        layers.append(AffineLayer(weight, bias))
    family = Family.FC_SHALLOW if len(widths) == 3 else Family.FC_DEEP
    return ReluNetwork(tuple(layers), family)


def random_invariant_params(
    m: int, n: int, rng: random.Random
) -> Tuple[Tuple[Fraction, Fraction, Fraction], ...]:
    """Draw ``(a_i, b_i, c_i)`` until the invariant arrangement is generic."""
    for attempt in itertools.count():
        params = tuple(
            (_rng_rational(rng, 50, 20), _rng_rational(rng, 50, 20), _rng_rational(rng, 50, 20))
            for _ in range(m)
        )
        if any(a == 0 or a == b for a, b, _ in params):
            continue
        arr = build_invariant_arrangement(params, n, warn=False)
        if not invariant_intersection_report(arr, m):
            logger.debug("generic invariant parameters after %d attempts", attempt + 1)
            return params
    raise AssertionError("unreachable")


def _equivariant_layer(
    params: Sequence[Tuple[Fraction, Fraction, Fraction]], n: int
) -> AffineLayer:
    """Blocks ``a_i I + b_i (11ᵀ - I)`` stacked vertically, biases ``c_i 1``."""
    weight = []
    bias = []
    for a, b, c in params:
        for j in range(n):
            weight.append(tuple(a if k == j else b for k in range(n)))
            bias.append(c)
    return AffineLayer(tuple(weight), tuple(bias), LayerTag.equivariant(len(params), n))


def _invariant_layer(
    block_weights: Sequence[Sequence[Fraction]], bias: Sequence[Fraction], n: int
) -> AffineLayer:
    """Rows constant on every block of n coordinates."""
    weight = tuple(tuple(w for w in row for _ in range(n)) for row in block_weights)
    m = len(block_weights[0]) if block_weights else 0
    return AffineLayer(weight, tuple(bias), LayerTag.invariant(m, n))


def build_invariant_shallow(
    n: int,
    m: int,
    m_out: int,
    params: Optional[Sequence[Tuple[Any, Any, Any]]] = None,
    head: Optional[Tuple[Sequence[Sequence[Any]], Sequence[Any]]] = None,
    seed: int = DEFAULT_SEED,
) -> ReluNetwork:
    """A permutation-invariant network ``ℝⁿ → ℝ^{mn} → ℝ^{m_out}``.

    Args:
        n: Input dimension (set size), n >= 2.
        m: Number of equivariant blocks.
        m_out: Output dimension.
        params: ``(a_i, b_i, c_i)`` for each block; seeded generic values otherwise.
        head: ``(block_weights, bias)`` of the invariant output layer, ``block_weights``
            being ``m_out × m``; seeded nonzero values otherwise.
        seed: Seed for everything not given explicitly.
    """
    if n < 2 or m < 1 or m_out < 1:
        raise DimensionMismatchError(f"need n >= 2, m >= 1, m' >= 1; got ({n}, {m}, {m_out})")
    rng = random.Random(seed)
    if params is None:
        triples = random_invariant_params(m, n, rng)
    else:
        triples = tuple(tuple(to_fraction(v) for v in p) for p in params)  # type: ignore
    if len(triples) != m:
        raise DimensionMismatchError(f"{len(triples)} parameter triples for m = {m}")
    if head is None:
        block_weights: Sequence[Sequence[Fraction]] = [
            _rng_row(rng, m) for _ in range(m_out)
        ]
        bias: Sequence[Fraction] = [_rng_rational(rng) for _ in range(m_out)]
    else:
        block_weights = [[to_fraction(w) for w in row] for row in head[0]]
        bias = [to_fraction(v) for v in head[1]]
    if len(block_weights) != m_out or any(len(row) != m for row in block_weights):
        raise DimensionMismatchError(f"output weights must be {m_out} × {m}")

    if all(a != 0 or b != 0 for a, b, _ in triples):
        arr = build_invariant_arrangement(triples, n, warn=False)
        for problem in invariant_intersection_report(arr, m):
            logger.warning("invariant network degenerates: %s", problem)

    layers = (_equivariant_layer(triples, n), _invariant_layer(block_weights, bias, n))
    return ReluNetwork(layers, Family.INV_SHALLOW)


def invariant_parameters(
    net: ReluNetwork,
) -> Tuple[
    Tuple[Tuple[Fraction, Fraction, Fraction], ...],
    Tuple[Tuple[Fraction, ...], ...],
    QVector,
]:
    """Recover ``(a_i, b_i, c_i)``, block output weights and output bias."""
    if net.family != Family.INV_SHALLOW:
        raise ValueError(f"expected an inv_shallow network, got {net.family.value}")
    first, second = net.layers
    n = first.tag.n
    m = first.tag.m
    params = tuple(
        (
            first.weight[i * n][0],
            first.weight[i * n][1] if n > 1 else _ZERO,
            first.bias[i * n],
        )
        for i in range(m)
    )
    block_weights = tuple(tuple(row[i * n] for i in range(m)) for row in second.weight)
    return params, block_weights, second.bias


def head_from_arrangement(
    arr: Arrangement, output_weights: Optional[Sequence[Any]] = None
) -> ReluNetwork:
    """A shallow head with two mirrored units ``relu(h)``, ``relu(-h)`` per hyperplane.

    With distinct positive output weights no chamber of the arrangement carries a
    constant function, so folded copies of the head never merge.
    """
    if not arr.hyperplanes:
        raise DimensionMismatchError("the head needs at least one hyperplane")
    weights = [to_fraction(w) for w in output_weights] if output_weights else [
        Fraction(k + 1) for k in range(2 * len(arr))
    ]
    if len(weights) != 2 * len(arr):
        raise DimensionMismatchError(f"need {2 * len(arr)} output weights")
    rows = []
    bias = []
    for h in arr.hyperplanes:
        rows.append(h.normal)
        bias.append(h.offset)
        rows.append(tuple(-x for x in h.normal))
        bias.append(-h.offset)
    hidden = AffineLayer(tuple(rows), tuple(bias))
    output = AffineLayer((tuple(weights),), (_ZERO,))
    return ReluNetwork((hidden, output), Family.FC_SHALLOW)


def _fold_units(spec: FoldSpec, level: FoldLevel, number: int) -> AffineLayer:
    """Units ``relu((b_{k-1} + b_k)(x_j - s_{k-1}))`` ordered k-major, zero padded.

    ``b_k`` is the inverse part length and ``s_{k-1}`` the left end of part k, so the
    alternating sum of the units is the sawtooth mapping every part onto ``[0, 1]``.
    """
    n = spec.n
    weight = []
    bias = []
    for k in range(level.p):
        for j in range(n):
            parts = level.parts[j]
            slope = 1 / parts[k] + (1 / parts[k - 1] if k > 0 else _ZERO)
            start = level.breakpoints(j)[k]
            weight.append(tuple(slope if i == j else _ZERO for i in range(n)))
            bias.append(-slope * start)
    for _ in range(level.width - n * level.p):
        weight.append(tuple(_ZERO for _ in range(n)))
        bias.append(_ZERO)
    return AffineLayer(tuple(weight), tuple(bias), LayerTag.folding(number))


def _fold_combiner(spec: FoldSpec, level: FoldLevel) -> QMatrix:
    """The ±1 matrix summing the units of each axis with alternating signs."""
    n = spec.n
    rows = []
    for j in range(n):
        row = [_ZERO] * level.width
        for k in range(level.p):
            row[k * n + j] = _ONE if k % 2 == 0 else -_ONE
        rows.append(tuple(row))
    return tuple(rows)


def fold_map(spec: FoldSpec, level: int, axis: int) -> Callable[[Any], Fraction]:
    """The sawtooth of one axis at one level (levels counted from 0) as a function."""
    chosen = spec.levels[level]
    units = _fold_units(spec, chosen, level + 1)
    combiner = _fold_combiner(spec, chosen)[axis]

    def sawtooth(t: Any) -> Fraction:
        x = tuple(to_fraction(t) if i == axis else _ZERO for i in range(spec.n))
        hidden = tuple(max(v, _ZERO) for v in units.apply(x))
        return sum((c * h for c, h in zip(combiner, hidden)), _ZERO)

    return sawtooth


def _check_head_inside_unit_cube(head: ReluNetwork) -> None:
    arr = first_layer_arrangement(head)
    n = arr.dim
    for subset in itertools.combinations(arr.hyperplanes, n):
        normals = [h.normal for h in subset]
        if rank(normals) < n:
            continue
        point = solve_linear_system(normals, [-h.offset for h in subset])
        assert point is not None
        if not all(0 < v < 1 for v in point):
            labels = ", ".join(h.label for h in subset)
            raise FoldingError(
                f"head hyperplanes {labels} meet at {tuple(str(v) for v in point)}, "
                "which is not strictly inside the unit cube; rescale the head"
            )


def _compose_folds(
    spec: FoldSpec, head: ReluNetwork, head_tag: Optional[LayerTag] = None
) -> Tuple[AffineLayer, ...]:
    if head.input_dim != spec.n:
        raise DimensionMismatchError(
            f"head takes {head.input_dim} inputs, the folds produce {spec.n}"
        )
    layers: List[AffineLayer] = []
    combiner: Optional[QMatrix] = None
    for number, level in enumerate(spec.levels, start=1):
        units = _fold_units(spec, level, number)
        if combiner is not None:
            units = AffineLayer(mat_mul(units.weight, combiner), units.bias, units.tag)
        layers.append(units)
        combiner = _fold_combiner(spec, level)
    head_layers = list(head.layers)
    if combiner is not None:
        first = head_layers[0]
        head_layers[0] = AffineLayer(
            mat_mul(first.weight, combiner), first.bias, head_tag or first.tag
        )
    return tuple(layers + head_layers)


def build_montufar_variant(
    spec: FoldSpec, head: Union[ReluNetwork, Arrangement]
) -> ReluNetwork:
    """Folding levels with uneven parts followed by a head on ``[0, 1]ⁿ``.

    Each level maps every hypercuboid of its grid onto ``[0, 1]ⁿ``, so the head's regions
    are copied into every cell of the composed grid.

    Args:
        spec: The fold partitions and widths.
        head: A shallow network on ℝⁿ, or an arrangement turned into one with
            :func:`head_from_arrangement`.
    """
    if isinstance(head, Arrangement):
        head = head_from_arrangement(head)
    _check_head_inside_unit_cube(head)
    layers = _compose_folds(spec, head)
    return ReluNetwork(layers, Family.MONTUFAR_VARIANT, spec, head)


def build_deep_set_variant(spec: FoldSpec, head: ReluNetwork) -> ReluNetwork:
    """Folding levels shared by all axes followed by a permutation-invariant head."""
    if not spec.shared:
        raise FoldingError("deep-set folding needs the same partition on every axis")
    if head.family != Family.INV_SHALLOW or not is_permutation_invariant(head):
        raise FoldingError("the deep-set head is not permutation-invariant")
    _check_head_inside_unit_cube(head)
    first = head.layers[0]
    layers = _compose_folds(spec, head, LayerTag.equivariant(first.tag.m, spec.n))
    return ReluNetwork(layers, Family.DEEP_SET, spec, head)


def _perturbation(rng: random.Random, magnitude: Fraction) -> Fraction:
    return magnitude * Fraction(rng.randint(-1000, 1000), 1000)


def perturb(
    net: ReluNetwork, magnitude: Any = DEFAULT_PERTURBATION, seed: int = DEFAULT_SEED
) -> ReluNetwork:
    """Add seeded offsets of size at most ``magnitude`` to the free parameters.

    Invariant networks are perturbed in ``(a_i, b_i, c_i)`` and block output weights, so
    the equivariant structure survives; folding networks only perturb their head.
    """
    magnitude = to_fraction(magnitude)
    if magnitude <= 0:
        raise ValueError("perturbation magnitude must be positive")
    rng = random.Random(seed)

    def shifted(value: Fraction) -> Fraction:
        return value + _perturbation(rng, magnitude)

    if net.family == Family.INV_SHALLOW:
        params, block_weights, bias = invariant_parameters(net)
        n = net.layers[0].tag.n
        new_params = tuple(tuple(shifted(v) for v in triple) for triple in params)
        new_head = (
            [[shifted(w) for w in row] for row in block_weights],
            [shifted(v) for v in bias],
        )
        return build_invariant_shallow(
            n, len(params), len(bias), new_params, new_head  # type: ignore[arg-type]
        )
    if net.family == Family.MONTUFAR_VARIANT:
        assert net.fold_spec is not None and net.head is not None
        return build_montufar_variant(net.fold_spec, perturb(net.head, magnitude, seed))
    if net.family == Family.DEEP_SET:
        assert net.fold_spec is not None and net.head is not None
        return build_deep_set_variant(net.fold_spec, perturb(net.head, magnitude, seed))

    layers = tuple(
        AffineLayer(
            tuple(tuple(shifted(w) for w in row) for row in layer.weight),
            tuple(shifted(c) for c in layer.bias),
            layer.tag,
        )
        for layer in net.layers
    )
    return ReluNetwork(layers, net.family)


def _check_permutations(n: int) -> List[Permutation]:
    if n <= _EXHAUSTIVE_DEGREE:
        return list(PermutationAction.symmetric_group(n).elements)
    return PermutationAction.adjacent_transpositions(n)


def _sample_points(n: int, count: int, seed: int) -> List[QVector]:
    rng = random.Random(seed)
    return [
        tuple(Fraction(rng.randint(-2000, 2000), 1000) for _ in range(n))
        for _ in range(count)
    ]


def invariance_violations(
    net: ReluNetwork, points: Sequence[Sequence[Fraction]]
) -> List[str]:
    """Points x and permutations σ with ``F(σ·x) != F(x)``."""
    failures = []
    for x in points:
        value = net.evaluate(x)
        for sigma in _check_permutations(net.input_dim):
            if net.evaluate(permute(sigma, x)) != value:
                failures.append(f"F(σ·x) != F(x) for σ = {sigma}, x = {tuple(map(str, x))}")
    return failures


def is_permutation_invariant(
    net: ReluNetwork, *, samples: int = INVARIANCE_SAMPLES, seed: int = DEFAULT_SEED
) -> bool:
    return not invariance_violations(net, _sample_points(net.input_dim, samples, seed))


def _permute_blocks(sigma: Permutation, x: Sequence[Fraction], n: int) -> QVector:
    result: List[Fraction] = list(x)
    for start in range(0, len(x) - len(x) % n, n):
        for k in range(n):
            result[start + sigma[k]] = x[start + k]
    return tuple(result)


def equivariance_violations(
    net: ReluNetwork, *, samples: int = INVARIANCE_SAMPLES, seed: int = DEFAULT_SEED
) -> List[str]:
    """Check ``f(σ·x) = σ·f(x)`` on every equivariant layer, and on folding layers of
    deep-set networks, with σ acting on each block of n coordinates."""
    n = net.input_dim
    failures = []
    for number, layer in enumerate(net.layers, start=1):
        kind = layer.tag.kind
        if not (
            kind == LayerKind.EQUIVARIANT
            or (kind == LayerKind.FOLDING and net.family == Family.DEEP_SET)
        ):
            continue
        for x in _sample_points(layer.in_dim, samples, seed + number):
            image = layer.apply(x)
            for sigma in _check_permutations(n):
                if layer.apply(_permute_blocks(sigma, x, n)) != _permute_blocks(
                    sigma, image, n
                ):
                    failures.append(f"layer {number} ({layer.tag}) breaks σ = {sigma}")
    return failures
