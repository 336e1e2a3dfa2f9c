"""
Worked examples with exact rational data, and the resolver for preset expressions.

The fixtures are the small planar arrangements and invariant networks, the five
one-dimensional piecewise-linear functions and the folding constructions used throughout
the tests and reachable from the command line.
"""

import logging
from fractions import Fraction
from typing import Any, Callable, Dict, List, Sequence, Tuple, Union

from pwlcomplexity.arrangement import Arrangement, Hyperplane
from pwlcomplexity.constants import DEFAULT_SEED, PresetError
from pwlcomplexity.network import (
    AffineLayer,
    Family,
    FoldSpec,
    ReluNetwork,
    build_deep_set_variant,
    build_fc_shallow,
    build_invariant_shallow,
    build_montufar_variant,
    first_layer_arrangement,
)
from pwlcomplexity.presetparser import PresetArg, PresetCall, parse_preset
from pwlcomplexity.regions import PieceSet, pieceset_from_segments


__all__ = [
    "APPENDIX_A2_PARAMS",
    "PRESET_NAMES",
    "Preset",
    "appendix_a1a",
    "appendix_a1b",
    "appendix_a1b_literal",
    "appendix_a2",
    "as_arrangement",
    "as_network",
    "cut",
    "example",
    "fc_from_arrangement",
    "invariant_head",
    "resolve_preset",
    "scaled_general_position_head",
]


logger = logging.getLogger(__name__)

Preset = Union[Arrangement, ReluNetwork, PieceSet]

F = Fraction

APPENDIX_A2_PARAMS = ((F(2), F(1, 2), F(-3)), (F(-1), F(6), F(0)))


def _planar(rows: Sequence[Tuple[Any, Any, Any]]) -> Arrangement:
    """Lines ``a x + b y + c = 0`` labeled H_1, H_2, …"""
    return Arrangement(
        tuple(
            Hyperplane.of((a, b), c, f"H_{k + 1}") for k, (a, b, c) in enumerate(rows)
        ),
        2,
    )


def appendix_a1a() -> Arrangement:
    """Four lines with two parallel and three concurrent ones: 9 chambers."""
    return _planar([(1, -1, 1), (1, -1, -1), (1, 1, -2), (1, 0, F(-1, 2))])


def appendix_a1b() -> Arrangement:
    """Four lines in general position: 11 chambers.

    The second line is ``y = 1`` and the fourth ``x = 1/4``; with ``x = 1/2`` the
    first, second and third lines would still meet at (1/2, 3/2).
    """
    return _planar([(1, -1, 1), (0, 1, -1), (1, 1, -2), (1, 0, F(-1, 4))])


def appendix_a1b_literal() -> Arrangement:
    """``y = 1`` replacing the second line, fourth line kept at ``x = 1/2``: 10 chambers."""
    return _planar([(1, -1, 1), (0, 1, -1), (1, 1, -2), (1, 0, F(-1, 2))])


def appendix_a2() -> ReluNetwork:
    """The invariant network on ℝ² with 11 regions falling into 7 orbits."""
    return build_invariant_shallow(2, 2, 1, APPENDIX_A2_PARAMS, head=([[1, 2]], [0]))


def fc_from_arrangement(arr: Arrangement) -> ReluNetwork:
    """A shallow network whose units switch on the hyperplanes of ``arr``.

    Output weights 1, 2, 3, 5, 8, … give every chamber its own affine map.
    """
    weights: List[Fraction] = []
    a, b = F(1), F(2)
    for _ in arr.hyperplanes:
        weights.append(a)
        a, b = b, a + b
    hidden = AffineLayer(
        tuple(h.normal for h in arr.hyperplanes), tuple(h.offset for h in arr.hyperplanes)
    )
    output = AffineLayer((tuple(weights),), (F(0),))
    return ReluNetwork((hidden, output), Family.FC_SHALLOW)


def scaled_general_position_head() -> ReluNetwork:
    """The 11-region arrangement moved into the open unit square as a shallow network.

    Every intersection point lies in (0, 1)², the chamber where all units are off does
    not meet the square, and the output weights 1, 2, 3, 5 keep adjacent chambers apart.
    """
    weights = ((16, -8), (0, 8), (-16, -8), (-8, 0))
    biases = (-3, -1, 13, 3)
    hidden = AffineLayer.of(weights, biases)
    output = AffineLayer.of([[1, 2, 3, 5]], [0])
    return ReluNetwork((hidden, output), Family.FC_SHALLOW)


def invariant_head(n: int) -> ReluNetwork:
    """One equivariant block whose n hyperplanes meet at the centre of the unit cube."""
    c = -F(n + 3, 4)
    return build_invariant_shallow(n, 1, 1, [(2, F(1, 2), c)], head=([[1]], [0]))


def cut(*points: Any) -> Arrangement:
    """Points ``x = t`` on the line."""
    if not points:
        raise PresetError("cut needs at least one point")
    return Arrangement(
        tuple(Hyperplane.of((1,), -F(t), f"t_{k + 1}") for k, t in enumerate(points)), 1
    )


_EXAMPLES: Dict[int, Tuple[Sequence[Any], Sequence[Any], Sequence[Any]]] = {
    1: (
        (0, F(1, 4), F(1, 2), F(3, 4), 1),
        (1, 1, 1, 1),
        (0, F(-1, 4), F(-1, 2), F(-3, 4)),
    ),
    2: ((0, F(1, 4), F(1, 2), F(3, 4), 1), (1, -1, 1, -1), (0, F(1, 2), F(-1, 2), 1)),
    3: (
        (0, F(1, 7), F(2, 5), F(2, 3), 1),
        (1, -1, 1, -1),
        (0, F(2, 7), F(-18, 35), F(86, 105)),
    ),
    4: ((0, F(1, 2), 1), (1, 2), (0, F(-1, 2))),
    5: ((0, F(1, 2), 1), (0, 0), (0, 1)),
}


def example(number: int) -> PieceSet:
    """One of the five piecewise-linear functions on ``[0, 1]``."""
    if number not in _EXAMPLES:
        raise PresetError(f"there is no example{number}; choose 1 to 5")
    return pieceset_from_segments(*_EXAMPLES[number])


def as_network(preset: Preset) -> ReluNetwork:
    if isinstance(preset, ReluNetwork):
        return preset
    if isinstance(preset, Arrangement):
        return fc_from_arrangement(preset)
    raise PresetError("a piece set preset has no network")


def as_arrangement(preset: Preset) -> Arrangement:
    if isinstance(preset, Arrangement):
        return preset
    if isinstance(preset, ReluNetwork):
        return first_layer_arrangement(preset)
    raise PresetError("a piece set preset has no arrangement")


# ========================================================================
# Resolution of parsed preset expressions
# ========================================================================


def _integer(call: PresetCall, value: PresetArg) -> int:
    if not isinstance(value, Fraction) or value.denominator != 1:
        raise PresetError(f"{call.name} at offset {call.offset}: {value} is not an integer")
    return int(value)


def _numbers(call: PresetCall, value: PresetArg) -> List[Fraction]:
    if not isinstance(value, tuple):
        raise PresetError(f"{call.name} at offset {call.offset}: expected a list of parts")
    result = []
    for item in value:
        if not isinstance(item, Fraction):
            raise PresetError(f"{call.name} at offset {call.offset}: parts must be numbers")
        result.append(item)
    return result


def _level(call: PresetCall, value: PresetArg) -> Any:
    """A level is a flat list shared by every axis or a list of per-axis lists."""
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return [_numbers(call, axis) for axis in value]
    return _numbers(call, value)


def _arity(call: PresetCall, low: int, high: int) -> None:
    if not low <= len(call.args) <= high:
        expected = str(low) if low == high else f"{low} to {high}"
        raise PresetError(
            f"{call.name} at offset {call.offset} takes {expected} arguments, "
            f"got {len(call.args)}"
        )


def _fixed(builder: Callable[[], Preset]) -> Callable[[PresetCall, int], Preset]:
    def resolve(call: PresetCall, seed: int) -> Preset:
        _arity(call, 0, 0)
        return builder()

    return resolve


def _resolve_folding(call: PresetCall, seed: int) -> Preset:
    _arity(call, 3, 64)
    n = _integer(call, call.args[0])
    levels = [_level(call, level) for level in call.args[1:-1]]
    head_arg = call.args[-1]
    if not isinstance(head_arg, PresetCall):
        raise PresetError(f"{call.name} at offset {call.offset}: the head must be a preset")
    head = _resolve(head_arg, seed)
    spec = FoldSpec.of(n, levels)
    if call.name == "deepset":
        return build_deep_set_variant(spec, as_network(head))
    if isinstance(head, PieceSet):
        raise PresetError(f"{call.name} at offset {call.offset}: head is a piece set")
    return build_montufar_variant(spec, head)


def _resolve_fc(call: PresetCall, seed: int) -> Preset:
    _arity(call, 3, 3)
    n0, n1, n2 = (_integer(call, a) for a in call.args)
    return build_fc_shallow(n0, n1, n2, seed=seed)


def _resolve_inv(call: PresetCall, seed: int) -> Preset:
    _arity(call, 3, 3)
    n, m, m_out = (_integer(call, a) for a in call.args)
    return build_invariant_shallow(n, m, m_out, seed=seed)


def _resolve_cut(call: PresetCall, seed: int) -> Preset:
    _arity(call, 1, 64)
    for arg in call.args:
        if not isinstance(arg, Fraction):
            raise PresetError(f"cut at offset {call.offset}: points must be numbers")
    return cut(*call.args)


def _resolve_invhead(call: PresetCall, seed: int) -> Preset:
    _arity(call, 1, 1)
    return invariant_head(_integer(call, call.args[0]))


def _example_resolver(number: int) -> Callable[[PresetCall, int], Preset]:
    return _fixed(lambda: example(number))


_RESOLVERS: Dict[str, Callable[[PresetCall, int], Preset]] = {
    "appendixA1a": _fixed(appendix_a1a),
    "appendixA1b": _fixed(appendix_a1b),
    "appendixA1b_literal": _fixed(appendix_a1b_literal),
    "appendixA2": _fixed(appendix_a2),
    "scaledA1b": _fixed(scaled_general_position_head),
    **{f"example{k}": _example_resolver(k) for k in _EXAMPLES},
    "montufar": _resolve_folding,
    "deepset": _resolve_folding,
    "fc": _resolve_fc,
    "inv": _resolve_inv,
    "cut": _resolve_cut,
    "invhead": _resolve_invhead,
}

PRESET_NAMES = tuple(sorted(_RESOLVERS))


def _resolve(call: PresetCall, seed: int) -> Preset:
    resolver = _RESOLVERS.get(call.name)
    if resolver is None:
        raise PresetError(
            f"unknown preset {call.name!r} at offset {call.offset}; "
            f"known presets: {', '.join(PRESET_NAMES)}"
        )
    logger.debug("resolving preset %s", call)
    return resolver(call, seed)


def resolve_preset(expression: Union[str, PresetCall], seed: int = DEFAULT_SEED) -> Preset:
    """Build the arrangement, network or piece set a preset expression names.

    Args:
        expression: Preset text such as ``"montufar(2, [1/2, 1/3, 1/6], scaledA1b)"``
            or an already parsed call.
        seed: Seed for the randomly generated families ``fc`` and ``inv``.
    """
    call = parse_preset(expression) if isinstance(expression, str) else expression
    return _resolve(call, seed)
