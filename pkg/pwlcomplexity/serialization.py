"""
JSON and CSV codecs for arrangements, networks, piece sets, chambers and reports.

JSON artifacts are exact: every rational is a ``"p/q"`` string. Each artifact carries a
``"kind"`` so :func:`artifact_from_json` can rebuild whatever a previous run wrote.
CSV output is for people and plotting: decimal renderings sit next to the exact values.
"""

import csv
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import (
    IO,
    Any,
    Dict,
    List,
    Mapping,
    MutableMapping,
    Optional,
    Sequence,
    Union,
)

from pwlcomplexity.arrangement import Arrangement, Box, Chamber, Hyperplane
from pwlcomplexity.complexity import ComplexityReport
from pwlcomplexity.constants import (
    CACHE_ENV_VAR,
    CSV_SIGNIFICANT_DIGITS,
    ArtifactFormatError,
)
from pwlcomplexity.exactmath import Constraint, HPolytope
from pwlcomplexity.network import (
    AffineLayer,
    Family,
    FoldLevel,
    FoldSpec,
    LayerTag,
    ReluNetwork,
)
from pwlcomplexity.rationals import (
    format_matrix,
    format_rational,
    format_vector,
    parse_matrix,
    parse_rational,
    parse_vector,
    to_decimal_string,
)
from pwlcomplexity.regions import LinearPiece, PieceSet


__all__ = [
    "Artifact",
    "arrangement_from_json",
    "arrangement_to_json",
    "artifact_from_json",
    "box_from_json",
    "box_to_json",
    "chamber_rows",
    "chambers_to_json",
    "count_cache_path",
    "dump_json",
    "load_count_cache",
    "load_json",
    "map_hash",
    "network_from_json",
    "network_to_json",
    "piece_rows",
    "pieceset_from_json",
    "pieceset_to_json",
    "report_to_json",
    "save_count_cache",
    "write_csv",
]


logger = logging.getLogger(__name__)

Artifact = Union[Arrangement, ReluNetwork, PieceSet]
Json = Dict[str, Any]


def dump_json(data: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_json(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as error:
        raise ArtifactFormatError(
            f"{source}: line {error.lineno} column {error.colno}: {error.msg}"
        ) from error


def _field(data: Any, key: str, where: str) -> Any:
    if not isinstance(data, dict):
        raise ArtifactFormatError(f"{where}: expected an object")
    if key not in data:
        raise ArtifactFormatError(f"{where}.{key}: missing")
    return data[key]


def _list(data: Any, where: str) -> List[Any]:
    if not isinstance(data, list):
        raise ArtifactFormatError(f"{where}: expected a list")
    return data


def _decoded(parse: Any, data: Any, where: str) -> Any:
    try:
        return parse(data)
    except (TypeError, ValueError) as error:
        raise ArtifactFormatError(f"{where}: {error}") from error


def box_to_json(box: Box) -> Json:
    return {"lo": list(format_vector(box.lo)), "hi": list(format_vector(box.hi))}


def box_from_json(data: Any, where: str = "$") -> Box:
    lo = _decoded(parse_vector, _field(data, "lo", where), f"{where}.lo")
    hi = _decoded(parse_vector, _field(data, "hi", where), f"{where}.hi")
    return _decoded(lambda pair: Box(*pair), (lo, hi), where)


def arrangement_to_json(arr: Arrangement) -> Json:
    return {
        "kind": "arrangement",
        "dim": arr.dim,
        "hyperplanes": [
            {
                "label": h.label,
                "normal": list(format_vector(h.normal)),
                "offset": format_rational(h.offset),
            }
            for h in arr.hyperplanes
        ],
        "clip_box": box_to_json(arr.clip_box) if arr.clip_box is not None else None,
    }


def arrangement_from_json(data: Any, where: str = "$") -> Arrangement:
    dim = _field(data, "dim", where)
    if not isinstance(dim, int):
        raise ArtifactFormatError(f"{where}.dim: expected an integer")
    hyperplanes = []
    for index, item in enumerate(_list(_field(data, "hyperplanes", where), where)):
        at = f"{where}.hyperplanes[{index}]"
        normal = _decoded(parse_vector, _field(item, "normal", at), f"{at}.normal")
        offset = _decoded(parse_rational, _field(item, "offset", at), f"{at}.offset")
        label = item.get("label") or f"H_{index + 1}"
        hyperplanes.append(
            _decoded(lambda args: Hyperplane(*args), (normal, offset, label), at)
        )
    box_data = data.get("clip_box")
    box = box_from_json(box_data, f"{where}.clip_box") if box_data is not None else None
    return _decoded(lambda args: Arrangement(*args), (tuple(hyperplanes), dim, box), where)


def _fold_spec_to_json(spec: FoldSpec) -> Json:
    return {
        "n": spec.n,
        "levels": [
            {"width": level.width, "parts": [list(format_vector(a)) for a in level.parts]}
            for level in spec.levels
        ],
    }


def _fold_spec_from_json(data: Any, where: str) -> FoldSpec:
    levels = []
    for index, item in enumerate(_list(_field(data, "levels", where), f"{where}.levels")):
        at = f"{where}.levels[{index}]"
        parts = _decoded(parse_matrix, _field(item, "parts", at), f"{at}.parts")
        levels.append(FoldLevel(parts, int(_field(item, "width", at))))
    return _decoded(lambda args: FoldSpec(*args), (_field(data, "n", where), tuple(levels)), where)


def network_to_json(net: ReluNetwork) -> Json:
    data: Json = {
        "kind": "network",
        "family": net.family.value,
        "widths": list(net.widths),
        "layers": [
            {
                "tag": str(layer.tag),
                "weight": [list(row) for row in format_matrix(layer.weight)],
                "bias": list(format_vector(layer.bias)),
            }
            for layer in net.layers
        ],
    }
    if net.fold_spec is not None:
        data["fold_spec"] = _fold_spec_to_json(net.fold_spec)
    if net.head is not None:
        data["head"] = network_to_json(net.head)
    return data


def network_from_json(data: Any, where: str = "$") -> ReluNetwork:
    family = _decoded(Family, _field(data, "family", where), f"{where}.family")
    layers = []
    for index, item in enumerate(_list(_field(data, "layers", where), f"{where}.layers")):
        at = f"{where}.layers[{index}]"
        weight = _decoded(parse_matrix, _field(item, "weight", at), f"{at}.weight")
        bias = _decoded(parse_vector, _field(item, "bias", at), f"{at}.bias")
        tag = _decoded(LayerTag.parse, item.get("tag", "generic"), f"{at}.tag")
        layers.append(_decoded(lambda args: AffineLayer(*args), (weight, bias, tag), at))
    spec = (
        _fold_spec_from_json(data["fold_spec"], f"{where}.fold_spec")
        if data.get("fold_spec") is not None
        else None
    )
    head = (
        network_from_json(data["head"], f"{where}.head")
        if data.get("head") is not None
        else None
    )
    net = _decoded(
        lambda args: ReluNetwork(*args), (tuple(layers), family, spec, head), where
    )
    widths = data.get("widths")
    if widths is not None and tuple(widths) != net.widths:
        raise ArtifactFormatError(
            f"{where}.widths: {widths} disagrees with the layer shapes {list(net.widths)}"
        )
    return net


def _polytope_to_json(polytope: HPolytope) -> List[Json]:
    return [
        {"normal": list(format_vector(c.normal)), "offset": format_rational(c.offset)}
        for c in polytope.constraints
    ]


def _polytope_from_json(data: Any, dim: int, where: str) -> HPolytope:
    constraints = []
    for index, item in enumerate(_list(data, where)):
        at = f"{where}[{index}]"
        normal = _decoded(parse_vector, _field(item, "normal", at), f"{at}.normal")
        offset = _decoded(parse_rational, _field(item, "offset", at), f"{at}.offset")
        constraints.append(Constraint(normal, offset))
    return _decoded(lambda args: HPolytope(*args), (tuple(constraints), dim), where)


def map_hash(piece: LinearPiece) -> str:
    """Short sha256 of the exact affine map; equal maps hash equally."""
    text = ";".join(
        ",".join(row) for row in format_matrix(piece.map_matrix)
    ) + "|" + ",".join(format_vector(piece.map_bias))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def pieceset_to_json(pieces: PieceSet) -> Json:
    return {
        "kind": "pieceset",
        "source": pieces.source,
        "box": box_to_json(pieces.box),
        "c_sharp": len(pieces),
        "pieces": [
            {
                "id": index,
                "trace": [list(t) for t in piece.trace],
                "map_matrix": [list(row) for row in format_matrix(piece.map_matrix)],
                "map_bias": list(format_vector(piece.map_bias)),
                "volume": format_rational(piece.volume()),
                "convex": piece.is_convex,
                "region": (
                    _polytope_to_json(piece.region_hrep)
                    if piece.region_hrep is not None
                    else None
                ),
                "cells": [_polytope_to_json(cell) for cell in piece.cells],
            }
            for index, piece in enumerate(pieces)
        ],
    }


def pieceset_from_json(data: Any, where: str = "$") -> PieceSet:
    box = box_from_json(_field(data, "box", where), f"{where}.box")
    pieces = []
    for index, item in enumerate(_list(_field(data, "pieces", where), f"{where}.pieces")):
        at = f"{where}.pieces[{index}]"
        cells = tuple(
            _polytope_from_json(cell, box.dim, f"{at}.cells[{k}]")
            for k, cell in enumerate(_list(_field(item, "cells", at), f"{at}.cells"))
        )
        region_data = item.get("region")
        region = (
            _polytope_from_json(region_data, box.dim, f"{at}.region")
            if region_data is not None
            else None
        )
        pieces.append(
            LinearPiece(
                cells,
                _decoded(parse_matrix, _field(item, "map_matrix", at), f"{at}.map_matrix"),
                _decoded(parse_vector, _field(item, "map_bias", at), f"{at}.map_bias"),
                region,
                tuple(tuple(t) for t in item.get("trace", ())),
            )
        )
    return PieceSet(tuple(pieces), box, data.get("source", ""))


def artifact_from_json(data: Any, where: str = "$") -> Artifact:
    """Rebuild an arrangement, network or piece set from its ``"kind"``."""
    kind = _field(data, "kind", where)
    if kind == "arrangement":
        return arrangement_from_json(data, where)
    if kind == "network":
        return network_from_json(data, where)
    if kind == "pieceset":
        return pieceset_from_json(data, where)
    raise ArtifactFormatError(f"{where}.kind: unknown artifact kind {kind!r}")


def chambers_to_json(chambers: Sequence[Chamber], *, with_volume: bool) -> List[Json]:
    rows = []
    for index, chamber in enumerate(chambers):
        row: Json = {
            "id": index,
            "signs": chamber.signs(),
            "witness": list(format_vector(chamber.witness)),
        }
        if with_volume:
            row["volume"] = format_rational(chamber.volume())
        rows.append(row)
    return rows


def chamber_rows(chambers: Sequence[Chamber], *, with_volume: bool) -> List[Dict[str, str]]:
    rows = []
    for index, chamber in enumerate(chambers):
        row = {
            "id": str(index),
            "signs": chamber.signs(),
            "witness": " ".join(format_vector(chamber.witness)),
        }
        if with_volume:
            volume = chamber.volume()
            row["volume"] = format_rational(volume)
            row["volume_decimal"] = to_decimal_string(volume, CSV_SIGNIFICANT_DIGITS)
        rows.append(row)
    return rows


def piece_rows(pieces: PieceSet) -> List[Dict[str, str]]:
    rows = []
    for index, piece in enumerate(pieces):
        volume = piece.volume()
        rows.append(
            {
                "id": str(index),
                "volume": format_rational(volume),
                "volume_decimal": to_decimal_string(volume, CSV_SIGNIFICANT_DIGITS),
                "map_hash": map_hash(piece),
            }
        )
    return rows


def report_to_json(report: ComplexityReport) -> Json:
    return {
        "kind": "complexity_report",
        "c_sharp": report.c_sharp,
        "c_tilde": report.c_tilde,
        "lower": report.lower,
        "upper": report.upper,
        "exact": report.exact,
        "method": report.method.value,
        "detail": report.detail,
        "notes": list(report.notes),
        "classes": [list(c) for c in report.classes],
        "witnesses": [
            {
                "source": w.source,
                "target": w.target,
                "matrix": [list(row) for row in format_matrix(w.transform.matrix)],
                "offset": list(format_vector(w.transform.offset)),
            }
            for w in report.witnesses
        ],
    }


def write_csv(
    rows: Sequence[Mapping[str, object]], stream: IO[str], fieldnames: Sequence[str]
) -> None:
    """Header plus one line per row; a header-only file when there are no rows."""
    writer = csv.DictWriter(stream, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def count_cache_path() -> Optional[Path]:
    """The persistent count cache named by the environment, if any."""
    value = os.environ.get(CACHE_ENV_VAR)
    return Path(value) if value else None


def load_count_cache(path: Optional[Path]) -> Dict[str, int]:
    if path is None or not path.exists():
        return {}
    data = load_json(path.read_text(encoding="utf-8"), str(path))
    if not isinstance(data, dict):
        raise ArtifactFormatError(f"{path}: $: expected an object")
    logger.debug("loaded %d cached counts from %s", len(data), path)
    return {str(k): int(v) for k, v in data.items()}


def save_count_cache(cache: MutableMapping[str, int], path: Optional[Path]) -> None:
    if path is None:
        return
    path.write_text(dump_json(dict(cache)), encoding="utf-8")
    logger.debug("saved %d cached counts to %s", len(cache), path)
