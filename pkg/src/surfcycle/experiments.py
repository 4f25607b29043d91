"""Monte Carlo sweep harness: logical error rates over (variant, noise
kind, distance, physical rate) grids, with per-round conversion, Wilson
confidence intervals, modified/original ratio aggregation, and threshold
estimation from pairwise curve crossings.

Every cell draws its own seed from the master seed and the cell
coordinates, so results are independent of execution order and of the
worker count. The CSV schema is fixed; floats are written with repr so a
file is byte-stable across runs.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circuit import build_memory_circuit, default_rounds
from .decoder import build_detector_graph, decode_batch
from .layout import VARIANTS, build_layout
from .noise import NOISE_KINDS, apply_noise
from .sim import sample_chunks

CSV_COLUMNS = (
    "variant",
    "noise",
    "distance",
    "rounds",
    "p",
    "shots",
    "logical_errors",
    "ler_shot",
    "ler_round",
    "ci_low",
    "ci_high",
    "seed",
)

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class SweepConfig:
    """One sweep grid. rounds=None applies the 3d+1 schedule per distance;
    an explicit tuple must match distances position by position."""

    variants: tuple[str, ...]
    noise_kinds: tuple[str, ...]
    distances: tuple[int, ...]
    p_values: tuple[float, ...]
    shots: int
    seed: int
    rounds: tuple[int, ...] | None = None

    def __post_init__(self):
        for name, values, allowed in (
            ("variants", self.variants, VARIANTS),
            ("noise_kinds", self.noise_kinds, NOISE_KINDS),
        ):
            if not values:
                raise ValueError(f"{name} must be non-empty")
            if len(set(values)) != len(values):
                raise ValueError(f"{name} contains duplicates: {values}")
            for v in values:
                if v not in allowed:
                    raise ValueError(
                        f"unknown entry {v!r} in {name}; allowed: {allowed}"
                    )
        if not self.distances:
            raise ValueError("distances must be non-empty")
        if len(set(self.distances)) != len(self.distances):
            raise ValueError(f"duplicate distances: {self.distances}")
        for d in self.distances:
            if d < 3 or d % 2 == 0:
                raise ValueError(f"distance must be odd and >= 3, got {d}")
        if not self.p_values:
            raise ValueError("p_values must be non-empty")
        for p in self.p_values:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p must lie in [0, 1], got {p}")
        if self.shots < 1000:
            raise ValueError(
                f"shots must be >= 1000 for usable intervals, got "
                f"{self.shots}"
            )
        if self.rounds is not None:
            if len(self.rounds) != len(self.distances):
                raise ValueError(
                    "rounds list must match distances one to one"
                )
            for r in self.rounds:
                if r < 1:
                    raise ValueError(f"rounds must be >= 1, got {r}")

    def rounds_for(self, distance: int) -> int:
        if self.rounds is None:
            return default_rounds(distance)
        return self.rounds[self.distances.index(distance)]


@dataclass(frozen=True)
class Row:
    """One sweep cell; field order matches the CSV schema."""

    variant: str
    noise: str
    distance: int
    rounds: int
    p: float
    shots: int
    logical_errors: int
    ler_shot: float
    ler_round: float
    ci_low: float
    ci_high: float
    seed: int


@dataclass(frozen=True)
class CellFailure:
    variant: str
    noise: str
    distance: int
    p: float
    message: str


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[Row, ...]
    failures: tuple[CellFailure, ...]


def per_round_rate(ler_shot: float, rounds: int) -> float:
    """Convert a whole-run logical error probability to a per-round one.

    Inverts the independent-rounds composition: a run of R rounds, each
    flipping the observable with probability q, errs with probability
    (1-(1-2q)^R)/2. Fixed points: 0.5 maps to 0.5, one round is identity.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    if not 0.0 <= ler_shot <= 0.5:
        raise ValueError(
            f"ler_shot must lie in [0, 0.5], got {ler_shot}"
        )
    if rounds == 1:
        return ler_shot
    return 0.5 * (1.0 - (1.0 - 2.0 * ler_shot) ** (1.0 / rounds))


def wilson_interval(errors: int, shots: int, z: float = _Z95):
    """Wilson score interval for a binomial proportion."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    if not 0 <= errors <= shots:
        raise ValueError(f"errors {errors} outside [0, {shots}]")
    phat = errors / shots
    z2 = z * z
    denom = 1.0 + z2 / shots
    center = (phat + z2 / (2.0 * shots)) / denom
    half = (
        z
        * math.sqrt(phat * (1.0 - phat) / shots + z2 / (4.0 * shots * shots))
        / denom
    )
    # at the extremes center and half are equal in exact arithmetic;
    # rounding can leave a stray 1e-18 that would put phat outside its
    # own interval
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == shots else min(1.0, center + half)
    return lo, hi


def _cell_seed(master: int, variant: str, noise: str, distance: int,
               rounds: int, p: float) -> int:
    key = f"{master}|{variant}|{noise}|{distance}|{rounds}|{p!r}"
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big")


def _run_cell(variant: str, noise: str, distance: int, rounds: int,
              p: float, shots: int, cell_seed: int) -> Row:
    errors = 0
    if p > 0.0:
        layout = build_layout(distance, variant)
        circuit = build_memory_circuit(layout, rounds)
        noisy = apply_noise(circuit, noise, p)
        graph = build_detector_graph(noisy)
        for _, events, obs in sample_chunks(noisy, shots, cell_seed):
            pred, _ = decode_batch(graph, events)
            errors += int(np.count_nonzero(pred != obs))
    # Rates live in [0, 0.5]; a decoder doing worse than chance on more
    # than half the shots is reported at the cap, with the raw count kept.
    ler_shot = min(errors / shots, 0.5)
    lo, hi = wilson_interval(errors, shots)
    ler_round = per_round_rate(ler_shot, rounds)
    ci_low = per_round_rate(min(lo, 0.5), rounds)
    ci_high = per_round_rate(min(hi, 0.5), rounds)
    return Row(
        variant=variant,
        noise=noise,
        distance=distance,
        rounds=rounds,
        p=p,
        shots=shots,
        logical_errors=errors,
        ler_shot=ler_shot,
        ler_round=ler_round,
        ci_low=ci_low,
        ci_high=ci_high,
        seed=cell_seed,
    )


def _cell_entry(args):
    variant, noise, distance, rounds, p, shots, cell_seed = args
    try:
        return _run_cell(variant, noise, distance, rounds, p, shots,
                         cell_seed), None
    except Exception as exc:  # noqa: BLE001 - cell isolation by contract
        return None, CellFailure(variant, noise, distance, p,
                                 f"{type(exc).__name__}: {exc}")


def run_sweep(config: SweepConfig, jobs: int = 1,
              progress=None) -> SweepResult:
    """Run every cell of the grid; failures are recorded, not raised.

    Cell order in the result is the grid product order (variant, noise,
    distance, p). jobs > 1 fans cells over processes without changing any
    output value.
    """
    cells = []
    for variant in config.variants:
        for noise in config.noise_kinds:
            for distance in config.distances:
                rounds = config.rounds_for(distance)
                for p in config.p_values:
                    seed = _cell_seed(config.seed, variant, noise,
                                      distance, rounds, p)
                    cells.append((variant, noise, distance, rounds, p,
                                  config.shots, seed))

    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_cell_entry, cells))
    else:
        outcomes = []
        for cell in cells:
            outcomes.append(_cell_entry(cell))
            if progress is not None:
                progress(cell, outcomes[-1])

    rows = tuple(r for r, _ in outcomes if r is not None)
    failures = tuple(f for _, f in outcomes if f is not None)
    return SweepResult(rows=rows, failures=failures)


@dataclass(frozen=True)
class RatioReport:
    """Modified/original per-round rate ratios at three aggregation levels:
    raw per (noise, distance, p), averaged over p per (noise, distance),
    then averaged over distances per noise kind."""

    per_p: tuple[tuple[str, int, float, float], ...]
    per_distance: tuple[tuple[str, int, float], ...]
    per_noise: tuple[tuple[str, float], ...]
    excluded: tuple[tuple[str, int, float], ...]


def relative_ratio(rows) -> RatioReport:
    """Aggregate modified/original ratios from matched sweep rows.

    Points where the original rate is zero cannot form a ratio; they are
    excluded from the means and reported separately.
    """
    by_cell: dict[tuple[str, int, float], dict[str, Row]] = {}
    for row in rows:
        by_cell.setdefault((row.noise, row.distance, row.p), {})[
            row.variant
        ] = row

    per_p = []
    excluded = []
    for (noise, distance, p), pair in sorted(by_cell.items()):
        if "original" not in pair or "modified" not in pair:
            continue
        orig = pair["original"].ler_round
        mod = pair["modified"].ler_round
        if orig == 0.0:
            excluded.append((noise, distance, p))
            continue
        per_p.append((noise, distance, p, mod / orig))

    groups: dict[tuple[str, int], list[float]] = {}
    for noise, distance, _, ratio in per_p:
        groups.setdefault((noise, distance), []).append(ratio)
    per_distance = [
        (noise, distance, sum(v) / len(v))
        for (noise, distance), v in sorted(groups.items())
    ]

    noise_groups: dict[str, list[float]] = {}
    for noise, _, mean in per_distance:
        noise_groups.setdefault(noise, []).append(mean)
    per_noise = [
        (noise, sum(v) / len(v)) for noise, v in sorted(noise_groups.items())
    ]

    return RatioReport(
        per_p=tuple(per_p),
        per_distance=tuple(per_distance),
        per_noise=tuple(per_noise),
        excluded=tuple(excluded),
    )


@dataclass(frozen=True)
class ThresholdEstimate:
    """Crossing-based threshold. estimate is None when no distance pair
    brackets a sign change on the grid; crossings lists (d1, d2, p)."""

    noise: str
    variant: str
    estimate: float | None
    crossings: tuple[tuple[int, int, float], ...]
    message: str


def estimate_threshold(rows, noise: str, variant: str) -> ThresholdEstimate:
    """Estimate the threshold from pairwise logical-rate curve crossings.

    For each consecutive distance pair the gap log(ler_d2) - log(ler_d1)
    is tracked over sorted p; the first sign change is interpolated
    linearly in (log p, log ler) space. Points with a zero rate on either
    curve carry no log and are skipped. The estimate is the mean of the
    pair crossings.
    """
    curves: dict[int, dict[float, float]] = {}
    for row in rows:
        if row.noise == noise and row.variant == variant:
            curves.setdefault(row.distance, {})[row.p] = row.ler_round
    distances = sorted(curves)
    if len(distances) < 2:
        raise ValueError(
            f"need >= 2 distances for {noise}/{variant}, got {distances}"
        )
    p_common = set.intersection(*(set(curves[d]) for d in distances))
    if len(p_common) < 3:
        raise ValueError(
            f"need >= 3 shared p values for {noise}/{variant}, got "
            f"{sorted(p_common)}"
        )

    crossings = []
    for d1, d2 in zip(distances, distances[1:]):
        pts = []
        for p in sorted(p_common):
            l1, l2 = curves[d1][p], curves[d2][p]
            if p > 0.0 and l1 > 0.0 and l2 > 0.0:
                pts.append((math.log(p), math.log(l2) - math.log(l1)))
        for (xa, ga), (xb, gb) in zip(pts, pts[1:]):
            if ga == 0.0:
                crossings.append((d1, d2, math.exp(xa)))
                break
            if ga * gb < 0.0:
                x = xa - ga * (xb - xa) / (gb - ga)
                crossings.append((d1, d2, math.exp(x)))
                break

    if not crossings:
        return ThresholdEstimate(
            noise=noise,
            variant=variant,
            estimate=None,
            crossings=(),
            message="no crossing in range",
        )
    estimate = sum(c for _, _, c in crossings) / len(crossings)
    return ThresholdEstimate(
        noise=noise,
        variant=variant,
        estimate=estimate,
        crossings=tuple(crossings),
        message=f"{len(crossings)} distance-pair crossing(s)",
    )


def _format_field(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows, comment: str | None = None) -> str:
    """Render rows into the fixed CSV schema; repr floats keep the output
    byte-stable for identical inputs."""
    lines = []
    if comment is not None:
        lines.append(f"# {comment}")
    lines.append(",".join(CSV_COLUMNS))
    for row in rows:
        lines.append(
            ",".join(
                _format_field(getattr(row, col)) for col in CSV_COLUMNS
            )
        )
    return "\n".join(lines) + "\n"


def rows_from_csv(text: str) -> tuple[Row, ...]:
    """Parse a sweep CSV back into rows; comment lines are skipped."""
    lines = [
        ln for ln in text.splitlines()
        if ln.strip() and not ln.startswith("#")
    ]
    if not lines:
        raise ValueError("CSV has no header line")
    header = tuple(lines[0].split(","))
    if header != CSV_COLUMNS:
        raise ValueError(
            f"unexpected CSV header {header}; expected {CSV_COLUMNS}"
        )
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"malformed CSV row: {ln!r}")
        rows.append(
            Row(
                variant=parts[0],
                noise=parts[1],
                distance=int(parts[2]),
                rounds=int(parts[3]),
                p=float(parts[4]),
                shots=int(parts[5]),
                logical_errors=int(parts[6]),
                ler_shot=float(parts[7]),
                ler_round=float(parts[8]),
                ci_low=float(parts[9]),
                ci_high=float(parts[10]),
                seed=int(parts[11]),
            )
        )
    return tuple(rows)
