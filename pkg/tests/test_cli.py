import json
from pathlib import Path
from typing import List

import pytest

from pwlcomplexity import __version__, cli
from pwlcomplexity.cli import RunConfig, main
from pwlcomplexity.constants import CACHE_ENV_VAR


@pytest.fixture(autouse=True)
def no_count_cache(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(CACHE_ENV_VAR, raising=False)


def _stdout_lines(capsys: pytest.CaptureFixture) -> List[str]:
    return capsys.readouterr().out.splitlines()


def test_chambers(capsys: pytest.CaptureFixture) -> None:
    assert main(["chambers", "--preset", "appendixA1b"]) == 0
    lines = _stdout_lines(capsys)
    assert lines[:2] == ["chambers = 11", "general position: yes"]
    assert "deletion-restriction count 11: ok" in lines
    assert "region bound 11: ok" in lines


def test_chambers_in_a_box(capsys: pytest.CaptureFixture) -> None:
    assert main(["chambers", "--preset", "appendixA1a", "--box=-10:10"]) == 0
    assert _stdout_lines(capsys) == ["chambers = 9", "general position: no (H_1, H_2)"]


def test_regions(capsys: pytest.CaptureFixture) -> None:
    assert main(["regions", "--preset", "appendixA1b"]) == 0
    assert _stdout_lines(capsys) == [
        "c# = 11",
        "volume conservation: ok",
        "forward-pass oracle: ok",
    ]


def test_complexity_of_a_piece_set(capsys: pytest.CaptureFixture) -> None:
    assert main(["complexity", "--preset", "example3"]) == 0
    lines = _stdout_lines(capsys)
    assert lines[0] == "c# = 4, c~ = 4 (method: one_dim_exact)"
    assert lines[1] == "class sizes: 1 1 1 1"
    assert "c~ <= c#: ok" in lines


def test_complexity_of_an_invariant_network(capsys: pytest.CaptureFixture) -> None:
    assert main(["complexity", "--preset", "appendixA2"]) == 0
    lines = _stdout_lines(capsys)
    assert lines[0].startswith("c# = 11, ")
    assert "permutation orbits in one class: ok" in lines


def test_orbits(capsys: pytest.CaptureFixture) -> None:
    assert main(["orbits", "--preset", "appendixA2"]) == 0
    assert _stdout_lines(capsys) == [
        "chambers = 11",
        "orbits = 7 (direct), 7 (Coxeter count / 2!)",
        "orbit counts agree: ok",
    ]


def test_bounds(capsys: pytest.CaptureFixture) -> None:
    assert main(["bounds", "--m", "2", "--n", "1..3"]) == 0
    lines = _stdout_lines(capsys)
    recurrence = [line for line in lines if line.startswith("b_recurrence")]
    assert len(recurrence) == 3
    assert recurrence[2].split()[3] == "39"
    upper = [line for line in lines if line.startswith("invariant_upper_bound")]
    assert upper[1].split()[3] == "15"
    assert all(line.split()[-1] in ("exact", "lower", "upper", "guide") for line in lines)


def test_sweep(capsys: pytest.CaptureFixture) -> None:
    argv = ["sweep", "--family", "montufar", "--m", "2", "--n", "1", "--levels", "1..2"]
    assert main(argv) == 0
    lines = _stdout_lines(capsys)
    assert len(lines) == 2
    assert lines[0].startswith("montufar m=2 n=1 L=1: c# = 4,")
    assert lines[1].startswith("montufar m=2 n=1 L=2: c# = 8,")
    assert all(line.endswith("[ok]") for line in lines)

    assert main(["sweep", "--family", "fc", "--m", "2..3", "--n", "1"]) == 0
    assert len(_stdout_lines(capsys)) == 2


def test_sweep_skips_unsupported_cells(capsys: pytest.CaptureFixture) -> None:
    assert main(["sweep", "--family", "montufar", "--m", "2", "--n", "3"]) == 0
    assert _stdout_lines(capsys)[0].endswith("[skipped]")


def test_json_artifact_round_trip(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    pieces_path = tmp_path / "pieces.json"
    assert main(["regions", "--preset", "example2", "--output", str(pieces_path)]) == 0
    document = json.loads(pieces_path.read_text(encoding="utf-8"))
    assert document["kind"] == "pieceset"
    assert document["config"]["preset"] == "example2"
    assert "output" not in document["config"]
    capsys.readouterr()

    assert main(["complexity", "--input", str(pieces_path)]) == 0
    assert _stdout_lines(capsys)[0] == "c# = 4, c~ = 1 (method: one_dim_exact)"


def test_wrapped_and_csv_artifacts(tmp_path: Path) -> None:
    chambers_path = tmp_path / "chambers.json"
    assert main(["chambers", "--preset", "cut(1/2)", "--output", str(chambers_path)]) == 0
    document = json.loads(chambers_path.read_text(encoding="utf-8"))
    assert [row["signs"] for row in document["result"]] == ["-", "+"]

    csv_path = tmp_path / "bounds.csv"
    argv = ["bounds", "--m", "2", "--n", "1", "--format", "csv", "--output", str(csv_path)]
    assert main(argv) == 0
    header = csv_path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "formula,inputs,value,direction,reference"


@pytest.mark.parametrize(
    "argv, error, message",
    [
        (["regions", "--preset", "nosuch"], "PresetError", "unknown preset 'nosuch'"),
        (["regions"], "ValueError", "one of --preset or --input is required"),
        (
            ["regions", "--preset", "example1", "--input", "x.json"],
            "ValueError",
            "not both",
        ),
        (["chambers", "--preset", "appendixA1b", "--box", "0,1"], "ValueError", "invalid box"),
        (["complexity", "--input", "missing.json"], "FileNotFoundError", "missing.json"),
        (["orbits", "--preset", "appendixA1b"], "UnstableArrangementError", "outside"),
    ],
)
def test_rejected_input(
    argv: List[str], error: str, message: str, capsys: pytest.CaptureFixture
) -> None:
    assert main(argv) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    report = json.loads(captured.err.strip().splitlines()[-1])
    assert report["status"] == "error"
    assert report["error"] == error
    assert message in report["message"]
    assert report["config"]["command"] == argv[0]


def test_failed_check(monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture) -> None:
    monkeypatch.setattr(cli, "schlafli", lambda n0, n1: 0)
    assert main(["chambers", "--preset", "appendixA1b"]) == 1
    captured = capsys.readouterr()
    assert "region bound 0: FAILED" in captured.out
    assert "1 cross-check failed: region bound 0" in captured.err.splitlines()
    report = json.loads(captured.err.strip().splitlines()[-1])
    assert report["status"] == "failed"
    assert report["checks"] == ["region bound 0"]


def test_version(capsys: pytest.CaptureFixture) -> None:
    with pytest.raises(SystemExit) as exit_info:
        main(["--version"])
    assert exit_info.value.code == 0
    assert capsys.readouterr().out.strip() == __version__


def test_run_config_echo() -> None:
    config = RunConfig("bounds", output="out.json", m="2..3")
    echo = config.echo()
    assert "output" not in echo
    assert echo["m"] == "2..3"
    assert echo["command"] == "bounds"
