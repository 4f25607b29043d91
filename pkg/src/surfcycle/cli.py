"""Command-line front end.

Eight subcommands cover the full pipeline: plan (qubit budgeting), layout
(lattice inspection), build (noisy circuit files), sample (event files),
decode (predictions from an event file), sweep (Monte Carlo CSV),
threshold and ratio (CSV post-processing).

Conventions shared by all subcommands: the fully resolved configuration is
echoed to stderr; every output file starts with a header comment naming
the tool version, subcommand, and configuration; errors exit nonzero with
a module-qualified message and never leave a silently truncated file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from . import experiments, resources
from .circuit import (
    build_memory_circuit,
    default_rounds,
    parse_circuit,
    serialize_circuit,
)
from .decoder import build_detector_graph, decode_batch
from .experiments import SweepConfig
from .layout import VARIANTS, build_layout, render_grid
from .noise import NOISE_KINDS, apply_noise
from .sim import sample_chunks

FORMATS = ("table", "csv", "json-lines")

_CONFIG_KEYS = {
    "variants": str,
    "noise_kinds": str,
    "distances": int,
    "p_values": float,
    "shots": int,
    "seed": int,
    "rounds": int,
}
_LIST_KEYS = ("variants", "noise_kinds", "distances", "p_values", "rounds")


def parse_sweep_config(text: str) -> SweepConfig:
    """Parse the flat key=value sweep config format.

    Lists are comma separated; blank lines and # comments are skipped;
    unknown and duplicate keys are rejected. The `rounds` key is optional
    and must pair with `distances` one to one when present.
    """
    seen: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        key = key.strip()
        if not eq or not key:
            raise ValueError(f"config line {lineno}: expected key = value")
        if key not in _CONFIG_KEYS:
            raise ValueError(
                f"config line {lineno}: unknown key {key!r}; allowed: "
                f"{sorted(_CONFIG_KEYS)}"
            )
        if key in seen:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        cast = _CONFIG_KEYS[key]
        items = [f.strip() for f in val.split(",") if f.strip()]
        if not items:
            raise ValueError(f"config line {lineno}: empty value for {key!r}")
        try:
            parsed = [cast(f) for f in items]
        except ValueError:
            raise ValueError(
                f"config line {lineno}: bad {cast.__name__} in {val!r}"
            ) from None
        if key in _LIST_KEYS:
            seen[key] = tuple(parsed)
        else:
            if len(parsed) != 1:
                raise ValueError(
                    f"config line {lineno}: {key!r} takes a single value"
                )
            seen[key] = parsed[0]

    missing = [
        k for k in ("variants", "noise_kinds", "distances", "p_values",
                    "shots", "seed")
        if k not in seen
    ]
    if missing:
        raise ValueError(f"config is missing keys: {missing}")
    return SweepConfig(
        variants=seen["variants"],
        noise_kinds=seen["noise_kinds"],
        distances=seen["distances"],
        p_values=seen["p_values"],
        shots=seen["shots"],
        seed=seen["seed"],
        rounds=seen.get("rounds"),
    )


def _config_echo(subcommand: str, pairs: list[tuple[str, object]]) -> str:
    body = " ".join(f"{k}={v}" for k, v in pairs)
    return f"surfcycle {__version__} {subcommand} {body}"


def _render_rows(rows: list[dict], fmt: str) -> str:
    """Render homogeneous dict rows as table, csv, or json-lines."""
    if not rows:
        return ""
    cols = list(rows[0])
    if fmt == "json-lines":
        return "\n".join(json.dumps(r) for r in rows) + "\n"
    cells = [[str(r[c]) for c in cols] for r in rows]
    if fmt == "csv":
        lines = [",".join(cols)]
        lines += [",".join(row) for row in cells]
        return "\n".join(lines) + "\n"
    widths = [
        max(len(cols[i]), max(len(row[i]) for row in cells))
        for i in range(len(cols))
    ]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()]
    for row in cells:
        lines.append(
            "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
        )
    return "\n".join(lines) + "\n"


def _write_output(out: str | None, header: str, body: str) -> None:
    """Write body to --out (with a leading header comment) or stdout."""
    if out is None:
        sys.stdout.write(body)
        return
    tmp = out + ".part"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        fh.write(body)
    os.replace(tmp, out)


def _cmd_plan(args) -> int:
    report = resources.plan_report(args.distance, args.case)
    if args.case == "a" and args.variant != "both":
        drop = "q_modified" if args.variant == "original" else "q_original"
        report = {k: v for k, v in report.items() if k != drop}
    echo = _config_echo(
        "plan",
        [("distance", args.distance), ("case", args.case),
         ("variant", args.variant), ("format", args.format)],
    )
    print(echo, file=sys.stderr)
    rows = [{"field": k, "value": v} for k, v in report.items()]
    if args.format == "json-lines":
        body = json.dumps(report) + "\n"
    else:
        body = _render_rows(rows, args.format)
    _write_output(args.out, echo, body)
    return 0


def _cmd_layout(args) -> int:
    lay = build_layout(args.distance, args.variant)
    echo = _config_echo(
        "layout",
        [("distance", args.distance), ("variant", args.variant),
         ("format", args.format)],
    )
    print(echo, file=sys.stderr)
    if args.format == "table":
        counts = (
            f"distance={lay.distance} variant={lay.variant} "
            f"data={lay.n_data} ancilla={lay.n_ancilla} "
            f"total={lay.n_qubits}"
        )
        body = render_grid(lay) + "\n" + counts + "\n"
    else:
        rows = []
        for q, (x, y) in enumerate(lay.data_coords):
            rows.append({"qubit": q, "role": "data", "kind": "",
                         "x": x, "y": y})
        emitted = set()
        for s in lay.stabilizers:
            if s.ancilla in emitted:
                continue  # shared bank: one row per physical ancilla
            emitted.add(s.ancilla)
            role = "ancilla"
            kind = s.kind if not lay.pairs else "XZ"
            rows.append({"qubit": s.ancilla, "role": role, "kind": kind,
                         "x": s.x, "y": s.y})
        body = _render_rows(rows, args.format)
    _write_output(args.out, echo, body)
    return 0


def _resolve_rounds(args) -> int:
    if args.rounds is not None:
        if args.rounds < 1:
            raise ValueError(f"--rounds must be >= 1, got {args.rounds}")
        return args.rounds
    return default_rounds(args.distance)


def _cmd_build(args) -> int:
    rounds = _resolve_rounds(args)
    if args.noise == "none" and args.p > 0.0:
        raise ValueError("--p > 0 requires a --noise kind")
    lay = build_layout(args.distance, args.variant)
    circuit = build_memory_circuit(lay, rounds)
    if args.noise != "none":
        circuit = apply_noise(circuit, args.noise, args.p)
    echo = _config_echo(
        "build",
        [("distance", args.distance), ("variant", args.variant),
         ("rounds", rounds), ("noise", args.noise), ("p", args.p)],
    )
    print(echo, file=sys.stderr)
    body = serialize_circuit(circuit)
    _write_output(args.out, echo, body)
    return 0


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _cmd_sample(args) -> int:
    circuit = parse_circuit(_read_text(args.circuit))
    seed = args.seed if args.seed is not None else 0
    echo = _config_echo(
        "sample",
        [("circuit", args.circuit), ("shots", args.shots), ("seed", seed)],
    )
    print(echo, file=sys.stderr)

    def lines():
        for _, events, obs in sample_chunks(circuit, args.shots, seed):
            chunk = [
                (events[i] + 48).tobytes().decode("ascii") + f" {obs[i]}"
                for i in range(events.shape[0])
            ]
            yield "\n".join(chunk) + "\n"

    if args.out is None:
        for text in lines():
            sys.stdout.write(text)
        return 0
    tmp = args.out + ".part"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(f"# {echo}\n")
            for text in lines():
                fh.write(text)
        os.replace(tmp, args.out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return 0


def _read_events(path: str, n_detectors: int):
    """Parse an event file into (events uint8 array, obs or None).

    Each line is a 0/1 detector string optionally followed by the
    observable bit. Lines must agree on detector count and on whether the
    observable column is present.
    """
    det_rows: list[np.ndarray] = []
    obs_bits: list[int] = []
    has_obs: bool | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) not in (1, 2):
                raise ValueError(
                    f"{path}:{lineno}: expected '<bits> [obs]', got "
                    f"{len(fields)} fields"
                )
            if has_obs is None:
                has_obs = len(fields) == 2
            elif has_obs != (len(fields) == 2):
                raise ValueError(
                    f"{path}:{lineno}: inconsistent observable column"
                )
            bits = np.frombuffer(fields[0].encode(), dtype=np.uint8) - 48
            if bits.size != n_detectors or bits.max(initial=0) > 1:
                raise ValueError(
                    f"{path}:{lineno}: expected {n_detectors} binary "
                    f"digits, got {fields[0]!r}"
                )
            det_rows.append(bits)
            if has_obs:
                if fields[1] not in ("0", "1"):
                    raise ValueError(
                        f"{path}:{lineno}: observable must be 0 or 1"
                    )
                obs_bits.append(int(fields[1]))
    if not det_rows:
        raise ValueError(f"{path}: no event lines found")
    events = np.vstack(det_rows)
    obs = np.array(obs_bits, dtype=np.uint8) if has_obs else None
    return events, obs


def _cmd_decode(args) -> int:
    circuit = parse_circuit(_read_text(args.circuit))
    graph = build_detector_graph(circuit)
    events, obs = _read_events(args.events, circuit.n_detectors)
    echo = _config_echo(
        "decode",
        [("circuit", args.circuit), ("events", args.events),
         ("shots", events.shape[0]), ("format", args.format)],
    )
    print(echo, file=sys.stderr)

    predictions, weights = decode_batch(graph, events)
    rows = [
        {"shot": i, "prediction": int(predictions[i]),
         "weight": repr(float(weights[i]))}
        for i in range(events.shape[0])
    ]
    body = _render_rows(rows, args.format)

    shots = events.shape[0]
    flips = int(predictions.sum())
    summary = f"shots={shots} predicted_flips={flips}"
    if obs is not None:
        errors = int(np.count_nonzero(predictions != obs))
        summary += f" logical_errors={errors}"
    if args.format != "json-lines":
        body += f"# {summary}\n"
    print(f"surfcycle decode: {summary}", file=sys.stderr)
    _write_output(args.out, echo, body)
    return 0


def _cmd_sweep(args) -> int:
    config = parse_sweep_config(_read_text(args.config))
    if args.seed is not None:
        config = SweepConfig(
            variants=config.variants,
            noise_kinds=config.noise_kinds,
            distances=config.distances,
            p_values=config.p_values,
            shots=config.shots,
            seed=args.seed,
            rounds=config.rounds,
        )
    pairs = [
        ("config", args.config),
        ("variants", ",".join(config.variants)),
        ("noise_kinds", ",".join(config.noise_kinds)),
        ("distances", ",".join(map(str, config.distances))),
        ("p_values", ",".join(map(repr, config.p_values))),
        ("shots", config.shots),
        ("seed", config.seed),
        ("rounds", "3d+1" if config.rounds is None
         else ",".join(map(str, config.rounds))),
        ("jobs", args.jobs),
    ]
    echo = _config_echo("sweep", pairs)
    print(echo, file=sys.stderr)

    result = experiments.run_sweep(config, jobs=args.jobs)
    for failure in result.failures:
        print(
            f"surfcycle sweep: cell failed "
            f"(variant={failure.variant} noise={failure.noise} "
            f"d={failure.distance} p={failure.p}): {failure.message}",
            file=sys.stderr,
        )
    if not result.rows:
        print("surfcycle sweep: every cell failed", file=sys.stderr)
        return 1

    # header travels inside rows_to_csv so the comment is identical whether
    # the CSV goes to a file or stdout
    header_pairs = [(k, v) for k, v in pairs if k != "jobs"]
    csv_text = experiments.rows_to_csv(
        result.rows, comment=_config_echo("sweep", header_pairs)
    )
    if args.out is None:
        sys.stdout.write(csv_text)
    else:
        tmp = args.out + ".part"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        os.replace(tmp, args.out)
    return 0


def _cmd_threshold(args) -> int:
    rows = experiments.rows_from_csv(_read_text(args.csv))
    echo = _config_echo(
        "threshold",
        [("csv", args.csv), ("noise", args.noise),
         ("variant", args.variant)],
    )
    print(echo, file=sys.stderr)
    est = experiments.estimate_threshold(rows, args.noise, args.variant)
    out_rows = [
        {
            "noise": est.noise,
            "variant": est.variant,
            "estimate": "" if est.estimate is None else repr(est.estimate),
            "crossings": ";".join(
                f"{d1}x{d2}@{c!r}" for d1, d2, c in est.crossings
            ),
            "message": est.message,
        }
    ]
    _write_output(args.out, echo, _render_rows(out_rows, args.format))
    return 0


def _cmd_ratio(args) -> int:
    rows = experiments.rows_from_csv(_read_text(args.csv))
    echo = _config_echo("ratio", [("csv", args.csv)])
    print(echo, file=sys.stderr)
    report = experiments.relative_ratio(rows)
    out_rows = []
    for noise, distance, p, ratio in report.per_p:
        out_rows.append({"level": "per_p", "noise": noise,
                         "distance": distance, "p": repr(p),
                         "ratio": repr(ratio)})
    for noise, distance, mean in report.per_distance:
        out_rows.append({"level": "per_distance", "noise": noise,
                         "distance": distance, "p": "",
                         "ratio": repr(mean)})
    for noise, mean in report.per_noise:
        out_rows.append({"level": "grand_mean", "noise": noise,
                         "distance": "", "p": "", "ratio": repr(mean)})
    for noise, distance, p in report.excluded:
        out_rows.append({"level": "excluded_zero_original", "noise": noise,
                         "distance": distance, "p": repr(p), "ratio": ""})
    if not out_rows:
        raise ValueError(
            "no matched original/modified cells in the CSV; ratios need "
            "both variants at identical (noise, distance, p)"
        )
    _write_output(args.out, echo, _render_rows(out_rows, args.format))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master random seed")
    common.add_argument("--out", default=None,
                        help="output file (default: stdout)")
    common.add_argument("--format", choices=FORMATS, default="table",
                        help="output format for report-style commands")
    common.add_argument("--jobs", type=int, default=1,
                        help="worker processes; results are identical "
                        "for any value")

    parser = argparse.ArgumentParser(
        prog="surfcycle",
        description="Surface-code memory experiments with a shared "
        "ancilla bank variant.",
    )
    parser.add_argument("--version", action="version",
                        version=f"surfcycle {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("plan", parents=[common],
                       help="qubit budget reports")
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--case", choices=("a", "b", "c"), required=True)
    p.add_argument("--variant", choices=("both",) + VARIANTS,
                   default="both")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("layout", parents=[common],
                       help="lattice geometry")
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.set_defaults(func=_cmd_layout)

    p = sub.add_parser("build", parents=[common],
                       help="write a memory-experiment circuit")
    p.add_argument("--distance", type=int, required=True)
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--rounds", type=int, default=None,
                   help="syndrome rounds (default 3d+1)")
    p.add_argument("--noise", choices=("none",) + NOISE_KINDS,
                   default="none")
    p.add_argument("--p", type=float, default=0.0,
                   help="physical error rate")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("sample", parents=[common],
                       help="sample detector events from a circuit file")
    p.add_argument("--circuit", required=True)
    p.add_argument("--shots", type=int, required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("decode", parents=[common],
                       help="decode an event file")
    p.add_argument("--circuit", required=True)
    p.add_argument("--events", required=True)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("sweep", parents=[common],
                       help="run a sweep config to CSV")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("threshold", parents=[common],
                       help="estimate a threshold from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--noise", choices=NOISE_KINDS, required=True)
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("ratio", parents=[common],
                       help="modified/original ratios from a sweep CSV")
    p.add_argument("--csv", required=True)
    p.set_defaults(func=_cmd_ratio)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error(f"--jobs must be >= 1, got {args.jobs}")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        module = type(exc).__module__
        qual = type(exc).__name__
        if module not in ("builtins", None):
            qual = f"{module}.{qual}"
        print(f"surfcycle {args.subcommand}: {qual}: {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
