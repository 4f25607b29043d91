"""Acceptance gate: ten product-level checks, one verdict line each.

Checks 1-3 and 9-10 are exact and fast. Checks 4-5 are exact with runtime
caps. Checks 6-8 assert statistical claims about decoded performance at
scale; they are evaluated at face value with the measured numbers carried
in the verdict line. Check 8 first projects its full-scale wall time from
a small calibration pass and reports the projection instead of burning
hours when the stated budget cannot be met on this machine.
"""

import math
import os
import time

import numpy as np

from surfcycle.circuit import build_memory_circuit, default_rounds
from surfcycle.cli import main
from surfcycle.decoder import BOUNDARY, build_detector_graph, decode_batch
from surfcycle.experiments import (
    Row,
    SweepConfig,
    estimate_threshold,
    relative_ratio,
    run_sweep,
)
from surfcycle.layout import build_layout
from surfcycle.noise import apply_noise
from surfcycle.resources import delta_q, max_k, q_total, reduction_total
from surfcycle.sim import sample


def _verdict(num: int, passed: bool, detail: str) -> None:
    line = f"criterion {num:02d}: {'PASS' if passed else 'FAIL'} - {detail}"
    print(line)
    assert passed, line


Q_TOTALS = (
    (3, "original", 17),
    (5, "modified", 37),
    (13, "original", 337),
    (15, "modified", 337),
    (15, "original", 449),
    (17, "modified", 433),
    (27, "original", 1457),
    (31, "modified", 1441),
    (39, "original", 3041),
    (45, "modified", 3037),
    (53, "original", 5617),
    (61, "modified", 5581),
)


def test_criterion_01_qubit_totals_exact():
    bad = [
        (d, variant, q_total(d, variant), want)
        for d, variant, want in Q_TOTALS
        if q_total(d, variant) != want
    ]
    _verdict(
        1,
        not bad,
        "12/12 closed-form qubit totals exact"
        if not bad
        else f"mismatches (d, variant, got, want): {bad}",
    )


def test_criterion_02_upgrade_cost_identity():
    bad = []
    for d in range(3, 100, 2):
        closed = (d + 1) * (13 - d) // 2
        raw = q_total(d + 2, "modified") - q_total(d, "original")
        got = delta_q(d)
        sign = (got > 0) - (got < 0)
        want_sign = 1 if d < 13 else (0 if d == 13 else -1)
        if got != closed or got != raw or sign != want_sign:
            bad.append((d, got, closed, raw))
    _verdict(
        2,
        not bad,
        "closed form == raw subtraction for odd d <= 99; sign flips at 13"
        if not bad
        else f"mismatches: {bad[:5]}",
    )


def test_criterion_03_growth_and_saturation():
    ks = {d: max_k(d).exact_k for d in (13, 27, 39, 53)}
    r101 = reduction_total(101)
    ok = ks == {13: 2, 27: 4, 39: 6, 53: 8} and abs(r101 - 25.0) < 0.01
    _verdict(
        3,
        ok,
        f"max growth {ks}; reduction(101)={r101:.4f}% vs 25% +- 0.01",
    )


def test_criterion_04_noiseless_determinism():
    t0 = time.perf_counter()
    fired = []
    for d in (3, 5, 7):
        for variant in ("original", "modified"):
            c = build_memory_circuit(build_layout(d, variant),
                                     default_rounds(d))
            batch = sample(c, 10**4, seed=41)
            if batch.detector_events.any() or batch.observable_flips.any():
                fired.append((d, variant))
    elapsed = time.perf_counter() - t0
    ok = not fired and elapsed < 10.0
    _verdict(
        4,
        ok,
        f"6 configs x 1e4 shots silent in {elapsed:.2f}s (cap 10s)"
        if not fired
        else f"events fired in {fired}",
    )


def _oracle_tables(graph):
    """Independent shortest-path tables: dijkstra on the parity-doubled
    graph via networkx, no shared code with the decoder's own tables."""
    import networkx as nx

    n = graph.n_detectors
    g = nx.Graph()
    g.add_nodes_from(range(2 * (n + 1)))
    for e in graph.edges:
        b = e.b if e.b != BOUNDARY else n
        par = 1 if e.logical_flip else 0
        for q in (0, 1):
            g.add_edge(2 * e.a + q, 2 * b + (q ^ par), weight=e.weight)
    dmin = np.full((n + 1, n + 1), np.inf)
    for src in range(n + 1):
        lengths = nx.single_source_dijkstra_path_length(
            g, 2 * src, weight="weight"
        )
        for dst in range(n + 1):
            dmin[src, dst] = min(
                lengths.get(2 * dst, math.inf),
                lengths.get(2 * dst + 1, math.inf),
            )
    return dmin


def _oracle_best_weight(defects, dmin, nb):
    """Exhaustive minimum over all pairings with optional boundary."""
    best = [math.inf]

    def rec(rest, w):
        if w >= best[0]:
            return
        if not rest:
            best[0] = w
            return
        head, tail = rest[0], rest[1:]
        rec(tail, w + dmin[head, nb])
        for i in range(len(tail)):
            rec(tail[:i] + tail[i + 1 :], w + dmin[head, tail[i]])

    rec(tuple(defects), 0.0)
    return best[0]


def test_criterion_05_decoder_exactness():
    t0 = time.perf_counter()
    c = apply_noise(
        build_memory_circuit(build_layout(3, "original"), 10),
        "combined",
        0.02,
    )
    graph = build_detector_graph(c)
    batch = sample(c, 10**4, seed=51)
    _, weights = decode_batch(graph, batch.detector_events)
    dmin = _oracle_tables(graph)
    nb = graph.n_detectors
    checked = 0
    worst = 0.0
    bad = []
    for s in range(10**4):
        defects = np.flatnonzero(batch.detector_events[s])
        if len(defects) > 8:
            continue
        want = _oracle_best_weight([int(i) for i in defects], dmin, nb)
        got = float(weights[s])
        worst = max(worst, abs(got - want))
        if not math.isclose(got, want, rel_tol=1e-9, abs_tol=1e-12):
            bad.append((s, got, want))
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = checked > 0 and not bad and elapsed < 300.0
    _verdict(
        5,
        ok,
        f"{checked} shots (<=8 defects) of 1e4 match the exhaustive "
        f"oracle, max |diff|={worst:.2e}, {elapsed:.1f}s (cap 300s)"
        if not bad
        else f"{len(bad)} mismatches, first: {bad[:3]}",
    )


def test_criterion_06_distance_ordering():
    cfg = SweepConfig(
        variants=("original", "modified"),
        noise_kinds=("combined",),
        distances=(3, 5),
        p_values=(0.01,),
        shots=10**5,
        seed=61,
    )
    t0 = time.perf_counter()
    res = run_sweep(cfg)
    elapsed = time.perf_counter() - t0
    assert res.failures == ()
    rows = {(r.variant, r.distance): r for r in res.rows}
    ok = elapsed < 600.0
    parts = []
    for variant in ("original", "modified"):
        r3, r5 = rows[(variant, 3)], rows[(variant, 5)]
        better = r5.ler_round < r3.ler_round
        separated = r5.ci_high < r3.ci_low
        ok = ok and better and separated
        parts.append(
            f"{variant}: d3={r3.ler_round:.5f} "
            f"[{r3.ci_low:.5f},{r3.ci_high:.5f}] "
            f"d5={r5.ler_round:.5f} [{r5.ci_low:.5f},{r5.ci_high:.5f}]"
        )
    _verdict(
        6,
        ok,
        f"need d5 < d3 with disjoint CIs at p=0.01; {'; '.join(parts)}; "
        f"{elapsed:.0f}s",
    )


def test_criterion_07_recycling_cost_band():
    cfg = SweepConfig(
        variants=("original", "modified"),
        noise_kinds=("gate",),
        distances=(3, 5),
        p_values=(0.005, 0.01),
        shots=10**5,
        seed=71,
    )
    res = run_sweep(cfg)
    assert res.failures == ()
    report = relative_ratio(res.rows)
    ((_, grand),) = report.per_noise
    ok = 1.0 <= grand <= 2.5 and not report.excluded
    per_d = ", ".join(
        f"d{d}={mean:.4f}" for _, d, mean in report.per_distance
    )
    _verdict(
        7,
        ok,
        f"grand-mean modified/original = {grand:.4f}, band [1.0, 2.5]; "
        f"per-distance {per_d}; excluded={len(report.excluded)}",
    )


def test_criterion_08_threshold_bands():
    budget_s = 1800.0
    grid = (0.015, 0.025, 0.04)
    distances = (3, 5, 7)
    full_shots = 10**5
    calib_shots = 1000

    cell_times = {}
    rows = []
    for variant in ("original", "modified"):
        for d in distances:
            for p in grid:
                cfg = SweepConfig(
                    variants=(variant,),
                    noise_kinds=("combined",),
                    distances=(d,),
                    p_values=(p,),
                    shots=calib_shots,
                    seed=81,
                )
                t0 = time.perf_counter()
                res = run_sweep(cfg)
                cell_times[(variant, d, p)] = time.perf_counter() - t0
                assert res.failures == ()
                rows.extend(res.rows)
    projected = sum(cell_times.values()) * (full_shots / calib_shots)
    runtime_ok = projected <= budget_s

    scale = calib_shots
    if runtime_ok:
        cfg = SweepConfig(
            variants=("original", "modified"),
            noise_kinds=("combined",),
            distances=distances,
            p_values=grid,
            shots=full_shots,
            seed=81,
        )
        rows = list(run_sweep(cfg).rows)
        scale = full_shots

    est_o = estimate_threshold(rows, "combined", "original")
    est_m = estimate_threshold(rows, "combined", "modified")
    band_ok = est_o.estimate is not None and (
        0.015 <= est_o.estimate <= 0.045
    )
    rel_ok = (
        est_o.estimate is not None
        and est_m.estimate is not None
        and abs(est_m.estimate - est_o.estimate) <= 0.15 * est_o.estimate
    )

    by_p = {}
    for r in rows:
        if r.variant == "original":
            by_p.setdefault(r.p, {})[r.distance] = r.ler_round
    ordered_up = all(
        by_p[p][3] < by_p[p][5] < by_p[p][7] for p in grid
    )
    worst = sorted(cell_times.items(), key=lambda kv: -kv[1])[:3]
    print(
        f"  projected full-scale wall time: {projected / 60.0:.0f} min "
        f"for {len(cell_times)} cells at {full_shots} shots each "
        f"(budget 30 min, cpu_count={os.cpu_count()})"
    )
    print(
        "  slowest calibration cells (s per 1000 shots): "
        + ", ".join(
            f"{v}/d{d}/p{p}={t:.1f}" for (v, d, p), t in worst
        )
    )
    for p in grid:
        print(
            f"  original per-round rates at p={p}: "
            + ", ".join(f"d{d}={by_p[p][d]:.4f}" for d in distances)
        )
    if ordered_up:
        print(
            "  curves are strictly ordered d3 < d5 < d7 at every grid "
            "point: the whole grid sits above the regime change, so no "
            "crossing exists in [0.015, 0.045]"
        )
    if any(r.ler_round == 0.5 for r in rows):
        print(
            "  note: cells at the 0.5 saturation cap carry no distance "
            "information; crossings reported in that regime are noise "
            "artifacts around the cap, not threshold evidence"
        )
    fmt = lambda e: "none" if e.estimate is None else f"{e.estimate:.4f}"
    _verdict(
        8,
        runtime_ok and band_ok and rel_ok,
        f"projected {projected / 60.0:.0f} min vs 30 min budget; at "
        f"{scale} shots/cell estimate original={fmt(est_o)} "
        f"modified={fmt(est_m)} (band [0.015, 0.045], relative gap 15%)",
    )


def test_criterion_09_synthetic_threshold_recovery():
    rows = []
    for d in (3, 5, 7):
        for p in (0.02, 0.028, 0.035, 0.05):
            ler = (p / 0.03) ** ((d + 1) / 2)
            rows.append(
                Row("original", "combined", d, 3 * d + 1, p, 10**6,
                    0, ler, ler, ler, ler, 1)
            )
    est = estimate_threshold(rows, "combined", "original")
    ok = est.estimate is not None and abs(est.estimate - 0.03) < 1e-6
    _verdict(
        9,
        ok,
        f"injected power-law curves recover {est.estimate!r} "
        f"(target 0.03 +- 1e-6, {len(est.crossings)} crossings)",
    )


def test_criterion_10_bit_exact_reproducibility(tmp_path):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text(
        "variants = original, modified\n"
        "noise_kinds = combined\n"
        "distances = 3\n"
        "p_values = 0.0, 0.01, 0.02\n"
        "shots = 2000\n"
        "seed = 4242\n"
    )
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    rc1 = main(["sweep", "--config", str(cfg), "--out", str(a),
                "--jobs", "1"])
    rc2 = main(["sweep", "--config", str(cfg), "--out", str(b),
                "--jobs", "2"])
    ok = rc1 == 0 and rc2 == 0 and a.read_bytes() == b.read_bytes()
    _verdict(
        10,
        ok,
        f"jobs=1 vs jobs=2 CSVs identical "
        f"({len(a.read_bytes())} bytes, 6 cells)",
    )
