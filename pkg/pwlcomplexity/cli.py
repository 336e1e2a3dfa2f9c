"""
Command-line front end.

    pwlcomplexity regions --preset appendixA1b
    pwlcomplexity complexity --preset example3
    pwlcomplexity chambers --preset appendixA1a
    pwlcomplexity orbits --preset appendixA2
    pwlcomplexity bounds --m 2 --n 3
    pwlcomplexity sweep --family inv --m 2 --n 2..3 --format csv

Exit status is 0 when every cross-check passes, 1 when one fails and 2 when the input is
rejected; failures are reported as JSON on stderr.
"""

import argparse
import io
import json
import logging
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pwlcomplexity import __version__
from pwlcomplexity.arrangement import (
    Box,
    auto_box,
    count_chambers_deletion_restriction,
    enumerate_chambers,
    is_general_position,
)
from pwlcomplexity.bounds import (
    BoundValue,
    b_recurrence,
    ckn_recurrence,
    entropy_bounds_fc,
    fc_asymptotic_guide,
    fc_entropy_lower,
    invariant_regions_guide,
    invariant_upper_bound,
    leading_term_lower,
    montufar_count,
    schlafli,
)
from pwlcomplexity.complexity import (
    ComplexityReport,
    c_tilde,
    c_tilde_invariant_shallow,
    invariance_group_check,
)
from pwlcomplexity.constants import (
    CSV_SIGNIFICANT_DIGITS,
    DEFAULT_PIECE_CAP,
    DEFAULT_PRECISION,
    DEFAULT_SEED,
    INVARIANCE_SAMPLES,
    PieceCapExceededError,
)
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
    Preset,
    as_arrangement,
    as_network,
    cut,
    resolve_preset,
    scaled_general_position_head,
)
from pwlcomplexity.printcolor import fmt_green, fmt_red, print_red
from pwlcomplexity.rationals import parse_vector, to_decimal_string
from pwlcomplexity.regions import PieceSet, enumerate_pieces, piece_at
from pwlcomplexity.serialization import (
    artifact_from_json,
    chamber_rows,
    chambers_to_json,
    count_cache_path,
    dump_json,
    load_count_cache,
    load_json,
    piece_rows,
    pieceset_to_json,
    report_to_json,
    save_count_cache,
    write_csv,
)
from pwlcomplexity.symmetry import PermutationAction, chamber_orbits, orbit_count_kamiya


__all__ = [
    "RunConfig",
    "build_parser",
    "cmd_bounds",
    "cmd_chambers",
    "cmd_complexity",
    "cmd_orbits",
    "cmd_regions",
    "cmd_sweep",
    "main",
]


logger = logging.getLogger(__name__)

SWEEP_FIELDS = (
    "family",
    "m",
    "n",
    "L",
    "c_sharp",
    "c_tilde",
    "c_tilde_lower",
    "c_tilde_upper",
    "schlafli",
    "b_recurrence",
    "invariant_upper_bound",
    "montufar_count",
    "status",
)


def _setup_logger(logger: logging.Logger, debug: bool) -> None:
    logger.propagate = False

    handler = logging.StreamHandler()
    handler.setFormatter(
        logging.Formatter("[%(filename)s:%(lineno)s - %(funcName)20s() ] %(message)s")
    )
    if debug:
        level = logging.DEBUG
    else:
        level = logging.WARNING

    logger.setLevel(level)
    logger.handlers = [handler]


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines the output of one run."""

    command: str
    preset: Optional[str] = None
    input: Optional[str] = None
    seed: int = DEFAULT_SEED
    cap: Optional[int] = DEFAULT_PIECE_CAP
    box: Optional[str] = None
    precision: int = DEFAULT_PRECISION
    format: str = "json"
    jobs: int = 1
    output: Optional[str] = None
    debug: bool = False
    family: str = "inv"
    m: str = "2"
    n: str = "2"
    levels: str = "1"

    def echo(self) -> Dict[str, Any]:
        """The configuration as embedded in every artifact; the output path is left out
        so that identical runs write identical bytes wherever they write them."""
        data = asdict(self)
        del data["output"]
        return data


class _Outcome:
    """Collects summary lines and failed cross-checks of a command."""

    def __init__(self) -> None:
        self.lines: List[str] = []
        self.failures: List[str] = []

    def say(self, line: str) -> None:
        self.lines.append(line)

    def check(self, ok: bool, label: str) -> None:
        if ok:
            self.say(f"{label}: {fmt_green('ok')}")
        else:
            self.say(f"{label}: {fmt_red('FAILED')}")
            self.failures.append(label)


def _parse_box(spec: str, dim: int) -> Box:
    """``LO:HI`` for a cube or ``lo1,lo2:hi1,hi2`` for a box."""
    lo_text, sep, hi_text = spec.partition(":")
    if not sep:
        raise ValueError(f"invalid box {spec!r}, expected LO:HI")
    lo = parse_vector(lo_text.split(","))
    hi = parse_vector(hi_text.split(","))
    if len(lo) == 1:
        lo = lo * dim
    if len(hi) == 1:
        hi = hi * dim
    return Box(lo, hi)


def _parse_range(spec: str) -> List[int]:
    """``"2"``, ``"2..4"`` or ``""`` (no values)."""
    spec = spec.strip()
    if not spec:
        return []
    low, sep, high = spec.partition("..")
    if not sep:
        return [int(low)]
    return list(range(int(low), int(high) + 1))


def _load(config: RunConfig) -> Preset:
    if config.preset is not None and config.input is not None:
        raise ValueError("give either --preset or --input, not both")
    if config.preset is not None:
        return resolve_preset(config.preset, config.seed)
    if config.input is not None:
        path = Path(config.input)
        return artifact_from_json(load_json(path.read_text(encoding="utf-8"), str(path)))
    raise ValueError("one of --preset or --input is required")


def _default_box(net: ReluNetwork) -> Box:
    if net.family in (Family.MONTUFAR_VARIANT, Family.DEEP_SET):
        return Box.cube(net.input_dim, 0, 1)
    return auto_box(first_layer_arrangement(net))


def _network_box(config: RunConfig, net: ReluNetwork) -> Box:
    if config.box is not None:
        return _parse_box(config.box, net.input_dim)
    return _default_box(net)


def _pieces(config: RunConfig, preset: Preset) -> Tuple[PieceSet, Optional[ReluNetwork]]:
    if isinstance(preset, PieceSet):
        return preset, None
    net = as_network(preset)
    box = _network_box(config, net)
    return enumerate_pieces(net, box, cap=config.cap, jobs=config.jobs), net


def _oracle_failures(pieces: PieceSet, net: ReluNetwork, seed: int) -> int:
    """Compare piece maps with the forward pass on seeded points of the box."""
    rng = random.Random(seed)
    failures = 0
    for _ in range(INVARIANCE_SAMPLES):
        x = tuple(
            lo + (hi - lo) * Fraction(rng.randint(0, 1000), 1000)
            for lo, hi in zip(pieces.box.lo, pieces.box.hi)
        )
        if piece_at(pieces, x).evaluate(x) != net.evaluate(x):
            failures += 1
    return failures


def _write(
    config: RunConfig,
    payload: Any,
    rows: Sequence[Dict[str, Any]],
    fields: Sequence[str],
) -> None:
    """Write the artifact named by --output as JSON, or its rows as CSV."""
    if config.output is None:
        return
    path = Path(config.output)
    if config.format == "csv":
        buffer = io.StringIO()
        write_csv(rows, buffer, fields)
        path.write_text(buffer.getvalue(), encoding="utf-8")
    else:
        if isinstance(payload, dict) and "kind" in payload:
            document = dict(payload, config=config.echo())
        else:
            document = {"config": config.echo(), "result": payload}
        path.write_text(dump_json(document), encoding="utf-8")
    logger.debug("wrote %s", path)


def cmd_regions(config: RunConfig) -> _Outcome:
    outcome = _Outcome()
    pieces, net = _pieces(config, _load(config))
    outcome.say(f"c# = {len(pieces)}")
    outcome.check(pieces.volume() == pieces.box.volume(), "volume conservation")
    if net is not None:
        outcome.check(_oracle_failures(pieces, net, config.seed) == 0, "forward-pass oracle")
    _write(
        config,
        pieceset_to_json(pieces),
        piece_rows(pieces),
        ("id", "volume", "volume_decimal", "map_hash"),
    )
    return outcome


def _complexity_report(
    config: RunConfig, preset: Preset
) -> Tuple[ComplexityReport, Optional[PieceSet]]:
    if isinstance(preset, ReluNetwork) and preset.family == Family.INV_SHALLOW:
        box = _network_box(config, preset)
        report = c_tilde_invariant_shallow(preset, box, cap=config.cap)
        try:
            return report, enumerate_pieces(preset, box, cap=config.cap)
        except PieceCapExceededError:
            return report, None
    pieces, _ = _pieces(config, preset)
    return c_tilde(pieces, jobs=config.jobs), pieces


def _classes_cover(report: ComplexityReport, pieces: PieceSet) -> bool:
    """Whether the report's classes partition the piece ids rather than chamber orbits."""
    skipped = any(note.startswith("general pipeline skipped") for note in report.notes)
    return not skipped and sum(len(c) for c in report.classes) == len(pieces)


def cmd_complexity(config: RunConfig) -> _Outcome:
    outcome = _Outcome()
    preset = _load(config)
    report, pieces = _complexity_report(config, preset)
    outcome.say(report.summary())
    sizes = sorted((len(c) for c in report.classes), reverse=True)
    outcome.say(f"class sizes: {' '.join(map(str, sizes))}")
    for note in report.notes:
        outcome.say(f"note: {note}")
    outcome.check(report.upper <= report.c_sharp, "c~ <= c#")
    symmetric = (Family.INV_SHALLOW, Family.DEEP_SET)
    if (
        pieces is not None
        and isinstance(preset, ReluNetwork)
        and preset.family in symmetric
        and _classes_cover(report, pieces)
    ):
        action = PermutationAction.symmetric_group(preset.input_dim)
        outcome.check(
            not invariance_group_check(pieces, action, report), "permutation orbits in one class"
        )
    _write(
        config,
        report_to_json(report),
        [
            {
                "c_sharp": report.c_sharp,
                "c_tilde": "" if report.c_tilde is None else report.c_tilde,
                "lower": report.lower,
                "upper": report.upper,
                "method": report.method.value,
            }
        ],
        ("c_sharp", "c_tilde", "lower", "upper", "method"),
    )
    return outcome


def cmd_chambers(config: RunConfig) -> _Outcome:
    outcome = _Outcome()
    arr = as_arrangement(_load(config))
    if config.box is not None:
        arr = arr.with_box(_parse_box(config.box, arr.dim))
    boxed = arr.clip_box is not None
    chambers = enumerate_chambers(arr, ambient=not boxed, jobs=config.jobs)
    outcome.say(f"chambers = {len(chambers)}")
    report = is_general_position(arr)
    if report:
        outcome.say("general position: yes")
    else:
        outcome.say(f"general position: no ({', '.join(report.violating)})")
    if not boxed:
        cache_path = count_cache_path()
        cache = load_count_cache(cache_path)
        counted = count_chambers_deletion_restriction(arr, cache)
        save_count_cache(cache, cache_path)
        outcome.check(counted == len(chambers), f"deletion-restriction count {counted}")
        bound = schlafli(arr.dim, len(arr))
        outcome.check(len(chambers) <= bound, f"region bound {bound}")
    _write(
        config,
        chambers_to_json(chambers, with_volume=boxed),
        chamber_rows(chambers, with_volume=boxed),
        ("id", "signs", "witness") + (("volume", "volume_decimal") if boxed else ()),
    )
    return outcome


def cmd_orbits(config: RunConfig) -> _Outcome:
    outcome = _Outcome()
    arr = as_arrangement(_load(config)).with_box(None)
    n = arr.dim
    direct = len(chamber_orbits(arr, PermutationAction.symmetric_group(n)))
    kamiya = orbit_count_kamiya(arr, n, load_count_cache(count_cache_path()))
    outcome.say(f"chambers = {len(enumerate_chambers(arr, ambient=True))}")
    outcome.say(f"orbits = {direct} (direct), {kamiya} (Coxeter count / {n}!)")
    outcome.check(direct == kamiya, "orbit counts agree")
    _write(
        config,
        {"direct": direct, "kamiya": kamiya},
        [{"direct": direct, "kamiya": kamiya}],
        ("direct", "kamiya"),
    )
    return outcome


def _bound_table(m: int, n: int, precision: int) -> List[BoundValue]:
    table: List[BoundValue] = []
    if m >= 2 and n >= 1:
        table.extend(entropy_bounds_fc(n, m * n, precision))
        table.append(fc_entropy_lower(m, n, precision))
        table.append(fc_asymptotic_guide(m, n, precision))
    if m >= 2:
        table.append(invariant_upper_bound(m, n, precision))
    if n >= 1 and 2 * m > n:
        table.append(leading_term_lower(m, n, precision).bound)
    if n >= 1:
        table.append(invariant_regions_guide(m, n, precision))
    return table


def cmd_bounds(config: RunConfig) -> _Outcome:
    outcome = _Outcome()
    rows = []
    for m in _parse_range(config.m):
        for n in _parse_range(config.n):
            exact = {
                "schlafli": schlafli(n, m * n),
                "b_recurrence": b_recurrence(m, n, n),
                "ckn_recurrence": ckn_recurrence(n, [b_recurrence(m, j, j) for j in range(n + 1)]),
            }
            for name, value in exact.items():
                rows.append(
                    {
                        "formula": name,
                        "inputs": f"m={m}, n={n}",
                        "value": str(value),
                        "direction": "exact",
                        "reference": "",
                    }
                )
            rows.extend(bound.as_row() for bound in _bound_table(m, n, config.precision))
    for row in rows:
        value = row["value"]
        if "/" in value:
            shown = to_decimal_string(Fraction(value), CSV_SIGNIFICANT_DIGITS)
        elif "." in value:
            shown = to_decimal_string(Decimal(value), CSV_SIGNIFICANT_DIGITS)
        else:
            shown = value
        outcome.say(f"{row['formula']:<24} {row['inputs']:<12} {shown:<28} {row['direction']}")
    _write(config, rows, rows, ("formula", "inputs", "value", "direction", "reference"))
    return outcome


def _montufar_cell(m: int, n: int, levels: int) -> Optional[ReluNetwork]:
    """Folding network with ``levels`` levels of m uneven parts, or None if unsupported."""
    if n == 1:
        head: Any = cut(Fraction(1, 3))
    elif n == 2:
        head = scaled_general_position_head()
    else:
        return None
    total = m * (m + 1) // 2
    parts = [Fraction(k, total) for k in range(1, m + 1)]
    return build_montufar_variant(FoldSpec.of(n, [parts] * levels), head)


def _sweep_cell(args: Tuple[str, int, int, int, int, Optional[int]]) -> Dict[str, Any]:
    family, m, n, levels, seed, cap = args
    row: Dict[str, Any] = {field: "" for field in SWEEP_FIELDS}
    row.update({"family": family, "m": m, "n": n, "L": levels, "status": "ok"})
    cell_seed = seed * 1_000_003 + m * 10_007 + n * 101 + levels
    try:
        if family == "fc":
            net = build_fc_shallow(n, m, 1, seed=cell_seed)
            pieces = enumerate_pieces(net, _default_box(net), cap=cap)
            report = c_tilde(pieces)
            row["schlafli"] = schlafli(n, m)
        elif family == "inv":
            net = build_invariant_shallow(n, m, 1, seed=cell_seed)
            report = c_tilde_invariant_shallow(net, cap=cap)
            row["b_recurrence"] = b_recurrence(m, n, n)
            if m >= 2:
                bound = invariant_upper_bound(m, n)
                row["invariant_upper_bound"] = bound.render()
                if report.upper > bound.value:
                    row["status"] = "bound violated"
        else:
            folded = _montufar_cell(m, n, levels)
            if folded is None:
                row["status"] = "skipped"
                return row
            widths = folded.fold_spec.widths if folded.fold_spec else ()
            # Heads built from an arrangement switch twice on every hyperplane.
            assert folded.head is not None
            n_last = len(set(first_layer_arrangement(folded.head).keys()))
            row["montufar_count"] = montufar_count(widths, n, n_last)
            pieces = enumerate_pieces(folded, _default_box(folded), cap=cap)
            report = c_tilde(pieces)
            if len(pieces) != row["montufar_count"]:
                row["status"] = "count mismatch"
    except PieceCapExceededError:
        row["status"] = "skipped"
        return row
    row.update(
        {
            "c_sharp": report.c_sharp,
            "c_tilde": "" if report.c_tilde is None else report.c_tilde,
            "c_tilde_lower": report.lower,
            "c_tilde_upper": report.upper,
        }
    )
    return row


def cmd_sweep(config: RunConfig) -> _Outcome:
    outcome = _Outcome()
    if config.family not in ("fc", "inv", "montufar"):
        raise ValueError(f"unknown sweep family {config.family!r}")
    level_range = _parse_range(config.levels) if config.family == "montufar" else [1]
    cells = [
        (config.family, m, n, levels, config.seed, config.cap)
        for m in _parse_range(config.m)
        for n in _parse_range(config.n)
        for levels in level_range
    ]
    if config.jobs > 1 and cells:
        with ProcessPoolExecutor(max_workers=config.jobs) as executor:
            rows = list(executor.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(cell) for cell in cells]
    rows.sort(key=lambda r: (r["family"], r["m"], r["n"], r["L"]))
    for row in rows:
        outcome.say(
            f"{row['family']} m={row['m']} n={row['n']} L={row['L']}: "
            f"c# = {row['c_sharp']}, c~ = {row['c_tilde']} [{row['status']}]"
        )
        if row["status"] not in ("ok", "skipped"):
            outcome.failures.append(f"{row['family']} m={row['m']} n={row['n']}: {row['status']}")
    _write(config, rows, rows, SWEEP_FIELDS)
    return outcome


_COMMANDS = {
    "regions": cmd_regions,
    "complexity": cmd_complexity,
    "chambers": cmd_chambers,
    "orbits": cmd_orbits,
    "bounds": cmd_bounds,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pwlcomplexity",
        description="Exact linear regions and refined complexity of ReLU networks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", help="preset expression, e.g. 'appendixA2'")
    common.add_argument("--input", help="JSON artifact written by an earlier run")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument(
        "--cap", type=int, default=DEFAULT_PIECE_CAP, help="refuse beyond this many pieces"
    )
    common.add_argument("--box", help="domain as LO:HI or lo1,lo2:hi1,hi2")
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--output", help="write the artifact to this file")
    common.add_argument("--debug", action="store_true")

    commands = parser.add_subparsers(dest="command", required=True)
    for name in ("regions", "complexity", "chambers", "orbits"):
        commands.add_parser(name, parents=[common])
    bounds = commands.add_parser("bounds", parents=[common])
    bounds.add_argument("--m", default="2", help="value or range such as 2..4")
    bounds.add_argument("--n", default="2", help="value or range such as 2..4")
    sweep = commands.add_parser("sweep", parents=[common])
    sweep.add_argument("--family", choices=("fc", "inv", "montufar"), default="inv")
    sweep.add_argument("--m", default="2", help="value or range such as 2..4")
    sweep.add_argument("--n", default="2", help="value or range such as 2..4")
    sweep.add_argument("--levels", default="1", help="fold levels for montufar")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    known = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    return replace(RunConfig(args.command), **known)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    config = _config(args)
    _setup_logger(logging.getLogger("pwlcomplexity"), config.debug)
    try:
        outcome = _COMMANDS[config.command](config)
    except (ValueError, OSError) as error:
        report = {
            "status": "error",
            "error": type(error).__name__,
            "message": str(error),
            "config": config.echo(),
        }
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 2
    for line in outcome.lines:
        print(line)
    if outcome.failures:
        failed = len(outcome.failures)
        print_red(
            f"{failed} cross-check{'s' if failed > 1 else ''} failed: "
            + ", ".join(outcome.failures),
            sys.stderr,
        )
        report = {"status": "failed", "checks": outcome.failures, "config": config.echo()}
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        return 1
    return 0
