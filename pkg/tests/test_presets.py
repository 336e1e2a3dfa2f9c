from fractions import Fraction

import pytest

from pwlcomplexity.arrangement import Box, enumerate_chambers, is_general_position
from pwlcomplexity.constants import PresetError
from pwlcomplexity.network import (
    Family,
    FoldSpec,
    ReluNetwork,
    build_fc_shallow,
    build_invariant_shallow,
    build_montufar_variant,
    first_layer_arrangement,
)
from pwlcomplexity.presets import (
    PRESET_NAMES,
    appendix_a1b,
    appendix_a2,
    as_arrangement,
    as_network,
    cut,
    example,
    invariant_head,
    resolve_preset,
    scaled_general_position_head,
)


F = Fraction


def test_fixed_presets() -> None:
    assert resolve_preset("appendixA1b") == appendix_a1b()
    assert resolve_preset("appendixA2") == appendix_a2()
    assert resolve_preset("example3") == example(3)
    assert resolve_preset("cut(1/3, 2/3)") == cut(F(1, 3), F(2, 3))
    assert {"appendixA1a", "appendixA1b_literal", "example5", "scaledA1b"} <= set(PRESET_NAMES)


def test_folding_presets() -> None:
    spec = FoldSpec.of(1, [[F(1, 2), F(1, 2)], [F(1, 2), F(1, 2)]])
    assert resolve_preset("montufar(1, [1/2, 1/2], [1/2, 1/2], cut(1/3))") == (
        build_montufar_variant(spec, cut(F(1, 3)))
    )
    deep = resolve_preset("deepset(2, [1/2, 1/2], invhead(2))")
    assert isinstance(deep, ReluNetwork)
    assert deep.family == Family.DEEP_SET
    uneven = resolve_preset("montufar(2, [[1/2, 1/2], [1/3, 2/3]], scaledA1b)")
    assert isinstance(uneven, ReluNetwork)
    assert uneven.family == Family.MONTUFAR_VARIANT
    assert uneven.fold_spec is not None and not uneven.fold_spec.shared


def test_seeded_presets() -> None:
    assert resolve_preset("fc(2, 3, 1)", seed=5) == build_fc_shallow(2, 3, 1, seed=5)
    assert resolve_preset("inv(2, 2, 1)", seed=3) == build_invariant_shallow(2, 2, 1, seed=3)
    assert resolve_preset("fc(2, 3, 1)", seed=5) != resolve_preset("fc(2, 3, 1)", seed=6)


@pytest.mark.parametrize(
    "text, message",
    [
        ("nosuch", "unknown preset 'nosuch' at offset 0"),
        ("cut()", "cut at offset 0 takes 1 to 64 arguments, got 0"),
        ("appendixA2(1)", "takes 0 arguments, got 1"),
        ("fc(2, 1/2, 1)", "1/2 is not an integer"),
        ("cut([1])", "points must be numbers"),
        ("montufar(1, [1/2, 1/2], 3)", "the head must be a preset"),
        ("montufar(1, [1/2, 1/2], example1)", "head is a piece set"),
        ("montufar(1, 1/2, cut(1/3))", "expected a list of parts"),
    ],
)
def test_preset_errors(text: str, message: str) -> None:
    with pytest.raises(PresetError, match=message):
        resolve_preset(text)


def test_preset_helpers() -> None:
    with pytest.raises(PresetError, match="no example6"):
        example(6)
    with pytest.raises(PresetError, match="at least one point"):
        cut()

    assert as_network(appendix_a1b()).family == Family.FC_SHALLOW
    assert as_arrangement(appendix_a2()) == first_layer_arrangement(appendix_a2())
    assert as_arrangement(appendix_a1b()) == appendix_a1b()
    with pytest.raises(PresetError, match="no network"):
        as_network(example(1))
    with pytest.raises(PresetError, match="no arrangement"):
        as_arrangement(example(1))


def test_scaled_head_fits_the_unit_square() -> None:
    arr = first_layer_arrangement(scaled_general_position_head())
    assert is_general_position(arr)
    assert len(enumerate_chambers(arr.with_box(Box.cube(2, 0, 1)))) == 11


def test_invariant_head_meets_the_centre() -> None:
    arr = first_layer_arrangement(invariant_head(3))
    centre = (F(1, 2),) * 3
    assert [h.evaluate(centre) for h in arr.hyperplanes] == [0, 0, 0]
