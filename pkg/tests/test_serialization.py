import io
from fractions import Fraction
from pathlib import Path

import pytest

from pwlcomplexity.arrangement import Box, enumerate_chambers
from pwlcomplexity.complexity import c_tilde
from pwlcomplexity.constants import CACHE_ENV_VAR, ArtifactFormatError
from pwlcomplexity.network import FoldSpec, build_montufar_variant
from pwlcomplexity.presets import appendix_a1b, appendix_a2, cut, example
from pwlcomplexity.regions import pieceset_from_segments
from pwlcomplexity.serialization import (
    arrangement_to_json,
    artifact_from_json,
    chamber_rows,
    chambers_to_json,
    count_cache_path,
    dump_json,
    load_count_cache,
    load_json,
    map_hash,
    network_to_json,
    piece_rows,
    pieceset_to_json,
    report_to_json,
    save_count_cache,
    write_csv,
)


F = Fraction


def _reload(data: object) -> object:
    return artifact_from_json(load_json(dump_json(data)))


def test_arrangement_artifact() -> None:
    arr = appendix_a1b().with_box(Box.cube(2, 0, 1))
    data = arrangement_to_json(arr)
    assert data["hyperplanes"][3] == {"label": "H_4", "normal": ["1", "0"], "offset": "-1/4"}
    assert data["clip_box"] == {"lo": ["0", "0"], "hi": ["1", "1"]}
    assert _reload(data) == arr
    assert _reload(arrangement_to_json(appendix_a1b())) == appendix_a1b()


def test_network_artifacts() -> None:
    net = appendix_a2()
    data = network_to_json(net)
    assert data["family"] == "inv_shallow"
    assert data["widths"] == [2, 4, 1]
    assert data["layers"][0]["tag"] == "equivariant(2,2)"
    assert _reload(data) == net

    folded = build_montufar_variant(
        FoldSpec.of(1, [[F(1, 2), F(1, 2)], [F(1, 3), F(2, 3)]]), cut(F(1, 3))
    )
    assert _reload(network_to_json(folded)) == folded


def test_pieceset_artifact() -> None:
    pieces = example(3)
    data = pieceset_to_json(pieces)
    assert data["c_sharp"] == 4
    assert data["source"] == "segments"
    assert data["pieces"][0]["volume"] == "1/7"
    assert _reload(data) == pieces


def test_dump_json_is_deterministic() -> None:
    text = dump_json({"b": [1], "a": "é"})
    assert text == '{\n  "a": "é",\n  "b": [\n    1\n  ]\n}\n'


@pytest.mark.parametrize(
    "data, message",
    [
        ({"kind": "bogus"}, "unknown artifact kind 'bogus'"),
        ({"dim": 2}, r"\$\.kind: missing"),
        ({"kind": "arrangement", "dim": 2}, r"\$\.hyperplanes: missing"),
        ({"kind": "arrangement", "dim": "2", "hyperplanes": []}, "expected an integer"),
        (
            {
                "kind": "arrangement",
                "dim": 2,
                "hyperplanes": [{"normal": ["1", "x"], "offset": "0"}],
            },
            r"\$\.hyperplanes\[0\]\.normal: Invalid rational",
        ),
        (
            {"kind": "arrangement", "dim": 1, "hyperplanes": [{"normal": ["1"], "offset": 0.5}]},
            r"\$\.hyperplanes\[0\]\.offset: Cannot use 0.5",
        ),
        (
            {"kind": "network", "family": "cnn", "layers": []},
            r"\$\.family",
        ),
        ({"kind": "pieceset", "box": {"lo": ["0"]}, "pieces": []}, r"\$\.box\.hi: missing"),
    ],
)
def test_artifact_errors(data: dict, message: str) -> None:
    with pytest.raises(ArtifactFormatError, match=message):
        artifact_from_json(data)


def test_network_widths_must_agree() -> None:
    data = network_to_json(appendix_a2())
    data["widths"] = [2, 3, 1]
    with pytest.raises(ArtifactFormatError, match="disagrees with the layer shapes"):
        artifact_from_json(data)


def test_invalid_json_text() -> None:
    with pytest.raises(ArtifactFormatError, match="net.json: line 1 column 10"):
        load_json('{"kind": ', "net.json")


def test_chamber_rows() -> None:
    chambers = enumerate_chambers(cut(F(1, 2)).with_box(Box.cube(1, 0, 1)))
    rows = chamber_rows(chambers, with_volume=True)
    assert [(r["id"], r["signs"], r["volume"]) for r in rows] == [
        ("0", "-", "1/2"),
        ("1", "+", "1/2"),
    ]
    assert chambers_to_json(chambers, with_volume=False)[1]["signs"] == "+"
    assert "volume" not in chambers_to_json(chambers, with_volume=False)[0]


def test_piece_rows_and_map_hash() -> None:
    step = example(5)
    flat = pieceset_from_segments([0, 2], [0], [0])
    assert map_hash(step[0]) == map_hash(flat[0])
    assert map_hash(step[0]) != map_hash(step[1])
    assert len(map_hash(step[0])) == 16

    rows = piece_rows(example(4))
    assert [r["volume"] for r in rows] == ["1/2", "1/2"]
    assert set(rows[0]) == {"id", "volume", "volume_decimal", "map_hash"}


def test_report_json() -> None:
    data = report_to_json(c_tilde(example(2)))
    assert data["kind"] == "complexity_report"
    assert (data["c_sharp"], data["c_tilde"], data["exact"]) == (4, 1, True)
    assert data["method"] == "one_dim_exact"
    assert len(data["witnesses"]) == 3
    assert data["classes"] == [[0, 1, 2, 3]]


def test_write_csv() -> None:
    stream = io.StringIO()
    write_csv([], stream, ["m", "n"])
    assert stream.getvalue() == "m,n\n"

    stream = io.StringIO()
    write_csv([{"m": 2, "n": "1/2"}], stream, ["m", "n"])
    assert stream.getvalue() == "m,n\n2,1/2\n"


def test_count_cache(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(CACHE_ENV_VAR, raising=False)
    assert count_cache_path() is None
    assert load_count_cache(None) == {}

    target = tmp_path / "counts.json"
    monkeypatch.setenv(CACHE_ENV_VAR, str(target))
    path = count_cache_path()
    assert path == target
    assert load_count_cache(path) == {}
    save_count_cache({"abc": 11}, path)
    assert load_count_cache(path) == {"abc": 11}

    target.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ArtifactFormatError, match="expected an object"):
        load_count_cache(path)
