from fractions import Fraction

import pytest

from pwlcomplexity.arrangement import Box, auto_box
from pwlcomplexity.complexity import (
    EuclideanTransform,
    Method,
    Verdict,
    c_sharp,
    c_tilde,
    c_tilde_invariant_shallow,
    invariance_group_check,
    piece_signature,
    pieces_equivalent,
    verify_witness,
)
from pwlcomplexity.constants import DimensionMismatchError, UnstableBoxError
from pwlcomplexity.exactmath import identity
from pwlcomplexity.bounds import montufar_count, schlafli
from pwlcomplexity.network import (
    AffineLayer,
    Family,
    FoldSpec,
    ReluNetwork,
    build_fc_shallow,
    build_montufar_variant,
    first_layer_arrangement,
    perturb,
)
from pwlcomplexity.presets import (
    appendix_a1b,
    appendix_a2,
    example,
    fc_from_arrangement,
    scaled_general_position_head,
)
from pwlcomplexity.regions import PieceSet, enumerate_pieces, piece_at
from pwlcomplexity.symmetry import PermutationAction


F = Fraction

SWAP = EuclideanTransform(((F(0), F(1)), (F(1), F(0))), (F(0), F(0)))


def _min_ramp_pieces() -> PieceSet:
    net = ReluNetwork(
        (
            AffineLayer.of([[1, 0], [-1, 0], [1, -1]], [0, 0, 0]),
            AffineLayer.of([[1, -1, -1]], [0]),
            AffineLayer.of([[1]], [0]),
        ),
        Family.FC_DEEP,
    )
    return enumerate_pieces(net, Box.cube(2, -1, 1))


@pytest.mark.parametrize(
    "number, expected_sharp, expected_tilde",
    [(1, 4, 1), (2, 4, 1), (3, 4, 4), (4, 2, 2), (5, 2, 2)],
)
def test_one_dimensional_examples(number: int, expected_sharp: int, expected_tilde: int) -> None:
    report = c_tilde(example(number))
    assert c_sharp(example(number)) == expected_sharp
    assert report.c_sharp == expected_sharp
    assert report.c_tilde == expected_tilde
    assert report.exact
    assert report.method == Method.ONE_DIM_EXACT
    assert len(report.classes) == expected_tilde
    assert len(report.witnesses) == expected_sharp - expected_tilde


@pytest.mark.parametrize("number, expected", [(1, 1), (2, 1), (3, 4), (4, 2), (5, 2)])
def test_vertex_search_agrees_on_the_line(number: int, expected: int) -> None:
    report = c_tilde(example(number), method="isometry")
    assert report.c_tilde == expected
    assert report.c_tilde == c_tilde(example(number)).c_tilde
    assert report.method == Method.ISOMETRY_SEARCH_EXACT


def test_witnesses_are_checked() -> None:
    report = c_tilde(example(2))
    pieces = example(2)
    for witness in report.witnesses:
        assert verify_witness(
            pieces[witness.source], pieces[witness.target], witness.transform
        ) == (True, True)
    assert report.summary() == "c# = 4, c~ = 1 (method: one_dim_exact)"


def test_parallel_pair_tests() -> None:
    assert c_tilde(example(2), jobs=2).c_tilde == 1


def test_mirrored_pieces() -> None:
    pieces = _min_ramp_pieces()
    above = piece_at(pieces, (F(3, 4), F(1, 4)))
    below = piece_at(pieces, (F(1, 4), F(3, 4)))
    assert verify_witness(above, below, SWAP) == (True, True)
    assert verify_witness(above, below, EuclideanTransform.identity(2)) == (False, False)
    assert piece_signature(above) == piece_signature(below)

    result = pieces_equivalent(above, below)
    assert result
    assert result.verdict == Verdict.EQUIVALENT
    assert result.witness is not None
    assert verify_witness(above, below, result.witness.transform) == (True, True)

    report = c_tilde(pieces)
    assert report.c_sharp == 3
    assert report.c_tilde == 2
    assert report.method == Method.ISOMETRY_SEARCH_EXACT


def test_inequivalent_pieces() -> None:
    pieces = example(4)
    result = pieces_equivalent(pieces[0], pieces[1])
    assert not result
    assert result.verdict == Verdict.INEQUIVALENT
    assert result.reason == "singular values differ"
    assert pieces_equivalent(example(3)[0], example(3)[1]).reason == "volumes differ"


def test_non_convex_pieces_are_bounded() -> None:
    pieces = _min_ramp_pieces()
    zero = pieces[0]
    assert not zero.is_convex
    result = pieces_equivalent(zero, zero)
    assert result.verdict == Verdict.INCONCLUSIVE
    assert result.reason == "non-convex piece"

    report = c_tilde(PieceSet((zero, zero), pieces.box))
    assert not report.exact
    assert (report.lower, report.upper) == (1, 2)
    assert report.method == Method.SIGNATURE_BOUNDED
    assert report.notes == ("1 inconclusive pairs",)
    assert report.summary().startswith("c# = 2, c~ in [1, 2]")


def test_euclidean_transform() -> None:
    turn = EuclideanTransform(((F(0), F(-1)), (F(1), F(0))), (F(1), F(2)))
    assert turn.apply((F(1), F(0))) == (F(1), F(3))
    assert turn.compose(turn.inverse()) == EuclideanTransform.identity(2)
    assert turn.inverse().apply(turn.apply((F(1, 3), F(5)))) == (F(1, 3), F(5))

    with pytest.raises(ValueError, match="orthogonal"):
        EuclideanTransform(((F(2), F(0)), (F(0), F(1))), (F(0), F(0)))
    with pytest.raises(DimensionMismatchError):
        EuclideanTransform(identity(2), (F(0),))


def test_complexity_errors() -> None:
    with pytest.raises(DimensionMismatchError, match="dimensions 1 and 2"):
        pieces_equivalent(example(1)[0], _min_ramp_pieces()[1])
    with pytest.raises(DimensionMismatchError, match="closed form"):
        c_tilde(_min_ramp_pieces(), method="one_dim")
    with pytest.raises(ValueError, match="inv_shallow"):
        c_tilde_invariant_shallow(fc_from_arrangement(appendix_a1b()))
    with pytest.raises(UnstableBoxError):
        c_tilde_invariant_shallow(appendix_a2(), Box((F(-1), F(0)), (F(1), F(1))))


def test_invariant_network_orbits() -> None:
    net = appendix_a2()
    orbits_only = c_tilde_invariant_shallow(net, cross_check=False)
    assert orbits_only.c_sharp == 11
    assert orbits_only.upper == 7
    assert len(orbits_only.classes) == 7
    assert orbits_only.detail == "direct agrees"

    report = c_tilde_invariant_shallow(net)
    assert report.c_sharp == 11
    assert report.exact
    assert report.c_tilde == 7


def test_permutation_images_share_a_class() -> None:
    net = appendix_a2()
    pieces = enumerate_pieces(net, auto_box(first_layer_arrangement(net)))
    report = c_tilde(pieces)
    action = PermutationAction.symmetric_group(2)
    assert invariance_group_check(pieces, action, report) == []


@pytest.mark.parametrize("number", [1, 2])
def test_equivalence_is_an_equivalence_relation(number: int) -> None:
    p, q, r = example(number).pieces[:3]
    assert pieces_equivalent(p, p).verdict == Verdict.EQUIVALENT

    forward = pieces_equivalent(p, q)
    assert forward.verdict == Verdict.EQUIVALENT
    assert forward.witness is not None
    assert verify_witness(q, p, forward.witness.transform.inverse()) == (True, True)

    onward = pieces_equivalent(q, r)
    assert onward.witness is not None
    composed = onward.witness.transform.compose(forward.witness.transform)
    assert verify_witness(p, r, composed) == (True, True)


def test_swapped_triangles_are_symmetric() -> None:
    pieces = _min_ramp_pieces()
    result = pieces_equivalent(pieces[1], pieces[2])
    assert result.witness is not None
    back = result.witness.transform.inverse()
    assert verify_witness(pieces[2], pieces[1], back) == (True, True)
    assert pieces_equivalent(pieces[2], pieces[1]).verdict == Verdict.EQUIVALENT


@pytest.mark.parametrize("n1, expected", [(3, 7), (4, 11), (5, 16)])
def test_generic_shallow_pieces_are_pairwise_distinct(n1: int, expected: int) -> None:
    net = perturb(build_fc_shallow(2, n1, 1))
    pieces = enumerate_pieces(net, auto_box(first_layer_arrangement(net)))
    report = c_tilde(pieces)
    assert report.c_sharp == schlafli(2, n1) == expected
    assert report.c_tilde == expected
    assert report.exact


def test_folded_network_pieces() -> None:
    spec = FoldSpec.of(2, [[F(1, 2), F(1, 3), F(1, 6)]])
    square = Box.cube(2, 0, 1)
    net = build_montufar_variant(spec, scaled_general_position_head())
    assert len(enumerate_pieces(net, square)) == montufar_count((6,), 2, 4) == 99

    report = c_tilde(enumerate_pieces(perturb(net), square))
    assert report.c_sharp == 99
    assert report.c_tilde == 99
