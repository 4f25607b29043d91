"""Detector graph construction and minimum-weight matching decoding.

Graph construction runs a reverse sensitivity sweep over the circuit: two
bitset arrays track, per qubit, which detector/observable parities an X or a
Z inserted at the current time point would flip. Sweeping backwards, each
gate transforms the arrays (H swaps them, CX spreads control X and target Z,
measurements fold their detector columns in, resets clear), and each noise
instruction snapshots the flip sets of every Pauli outcome it can produce.
One sweep therefore yields every single-error mechanism without per-error
forward simulation, and by construction agrees exactly with the sampler's
frame semantics.

Mechanisms become graph edges: one flipped detector is a boundary edge, two
an internal edge, three or four are decomposed into a minimal set of
existing edges whose flipped sets XOR to the mechanism's (probability mass
that cannot be represented accumulates in dropped_mass). Parallel
contributions merge via p <- p1(1-p2) + p2(1-p1).

Decoding reduces minimum-weight pairing with an optional boundary to a
max-weight matching without boundary copies: leaving every defect on the
boundary costs sum(b_i); matching a pair (i, j) instead saves the gain
b_i + b_j - d_ij. Maximizing total gain over matchings that use only
positive-gain edges is exactly equivalent to the textbook construction with
one virtual boundary copy per defect and zero-weight virtual-virtual edges,
because any pair with non-positive gain can be split onto the boundary
without increasing cost. Shortest paths are computed on a parity-doubled
graph so each distance carries the logical flip of its minimizing path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .circuit import Circuit, NOISE_OPCODES
from . import matching

BOUNDARY = -1


@dataclass(frozen=True)
class GraphEdge:
    """One decoding-graph edge; b == BOUNDARY marks a boundary edge."""

    a: int
    b: int
    p: float
    weight: float
    logical_flip: bool


@dataclass
class DetectorGraph:
    n_detectors: int
    edges: tuple[GraphEdge, ...]
    dropped_mass: float
    meta: dict
    _dmin: np.ndarray | None = field(default=None, repr=False)
    _dpar: np.ndarray | None = field(default=None, repr=False)
    _tables: tuple[bytes, bytes] | None = field(default=None, repr=False)

    def paths(self) -> tuple[np.ndarray, np.ndarray]:
        """Pairwise parity-aware shortest paths, computed once on demand.

        Returns (dmin, dpar), both (n+1, n+1) with the boundary as node n:
        dmin[a, b] is the shortest-path weight, dpar[a, b] the logical flip
        along the minimizing path (ties resolve to the even path).
        """
        if self._dmin is None:
            n = self.n_detectors + 1  # boundary is node n-1
            rows: list[int] = []
            cols: list[int] = []
            wts: list[float] = []
            for e in self.edges:
                a = e.a
                b = e.b if e.b != BOUNDARY else self.n_detectors
                par = 1 if e.logical_flip else 0
                for q in (0, 1):
                    rows.append(2 * a + q)
                    cols.append(2 * b + (q ^ par))
                    wts.append(e.weight)
            doubled = sparse.csr_matrix(
                (wts, (rows, cols)), shape=(2 * n, 2 * n)
            )
            dist = csgraph.dijkstra(
                doubled, directed=False, indices=np.arange(0, 2 * n, 2)
            )
            even = dist[:, 0::2]
            odd = dist[:, 1::2]
            self._dmin = np.minimum(even, odd)
            self._dpar = odd < even
        return self._dmin, self._dpar

    def _native_tables(self) -> tuple[bytes, bytes]:
        """Distance tables as raw buffers for the C batch decoder."""
        if self._tables is None:
            dmin, dpar = self.paths()
            self._tables = (
                np.ascontiguousarray(dmin, dtype=np.float64).tobytes(),
                np.ascontiguousarray(dpar, dtype=np.uint8).tobytes(),
            )
        return self._tables


@dataclass(frozen=True)
class Correction:
    """Decoder output for one shot: defect pairing (None = boundary),
    total matched weight, and the predicted observable flip."""

    matched_pairs: tuple[tuple[int, int | None], ...]
    total_weight: float
    logical_flip_prediction: bool


class DecodeError(ValueError):
    pass


def _measurement_parity_rows(circuit: Circuit) -> np.ndarray:
    """rows[m] = uint8 vector over detectors + observable containing m."""
    n_det = circuit.n_detectors
    rows = np.zeros((circuit.n_measurements, n_det + 1), dtype=np.uint8)
    for di, det in enumerate(circuit.detectors):
        for m in det.measurement_indices:
            rows[m, di] ^= 1
    for m in circuit.observable:
        rows[m, n_det] ^= 1
    return rows


def _collect_mechanisms(circuit: Circuit):
    """Reverse sweep; yields (det_index_tuple, observable_flip, probability)
    for every Pauli outcome of every noise instruction."""
    n_det = circuit.n_detectors
    det_rows = _measurement_parity_rows(circuit)
    sx = np.zeros((circuit.n_qubits, n_det + 1), dtype=np.uint8)
    sz = np.zeros_like(sx)

    bases = []
    m = 0
    for ins in circuit.instructions:
        bases.append(m)
        if ins.opcode in ("M", "MR"):
            m += len(ins.targets)

    mechanisms: list[tuple[tuple[int, ...], bool, float]] = []

    def emit(row: np.ndarray, p: float) -> None:
        nz = np.flatnonzero(row)
        obs = bool(row[n_det])
        if obs and nz[0] == n_det:
            raise DecodeError(
                "error mechanism flips the observable without firing "
                "any detector; circuit is not decodable"
            )
        dets = tuple(int(i) for i in nz if i != n_det)
        if dets or obs:
            mechanisms.append((dets, obs, p))

    for idx in range(len(circuit.instructions) - 1, -1, -1):
        ins = circuit.instructions[idx]
        op = ins.opcode
        t = np.asarray(ins.targets, dtype=np.intp)
        if op == "TICK":
            continue
        if op == "M":
            base = bases[idx]
            sx[t] ^= det_rows[base : base + len(t)]
            sz[t] = 0
        elif op == "MR":
            base = bases[idx]
            sx[t] = det_rows[base : base + len(t)]
            sz[t] = 0
        elif op == "R":
            sx[t] = 0
            sz[t] = 0
        elif op == "H":
            tmp = sx[t].copy()
            sx[t] = sz[t]
            sz[t] = tmp
        elif op == "CX":
            c, g = t[::2], t[1::2]
            sx[c] ^= sx[g]
            sz[g] ^= sz[c]
        elif op == "DEPOL1":
            if ins.prob > 0.0:
                p3 = ins.prob / 3.0
                for q in t:
                    rx, rz = sx[q], sz[q]
                    emit(rx, p3)
                    emit(rx ^ rz, p3)
                    emit(rz, p3)
        elif op == "DEPOL2":
            if ins.prob > 0.0:
                p15 = ins.prob / 15.0
                for a, b in zip(t[::2], t[1::2]):
                    comps = (None, sx[a], sx[a] ^ sz[a], sz[a])
                    compt = (None, sx[b], sx[b] ^ sz[b], sz[b])
                    for code in range(1, 16):
                        ra, rb = comps[code >> 2], compt[code & 3]
                        if ra is None:
                            row = rb
                        elif rb is None:
                            row = ra
                        else:
                            row = ra ^ rb
                        emit(row, p15)
        elif op in ("XERR", "FLIP_PRE_M", "FLIP_POST_R"):
            if ins.prob > 0.0:
                for q in t:
                    emit(sx[q], ins.prob)
        elif op == "ZERR":
            if ins.prob > 0.0:
                for q in t:
                    emit(sz[q], ins.prob)
        else:  # pragma: no cover
            raise AssertionError(op)
    return mechanisms


def _merge(p1: float, p2: float) -> float:
    return p1 * (1.0 - p2) + p2 * (1.0 - p1)


def _decomposition_candidates(dets: tuple[int, ...]):
    """Candidate edge sets for a multi-detector mechanism, smallest count
    first, deterministic order; elements are ((a, b)|(a, BOUNDARY), ...)."""
    if len(dets) == 3:
        a, b, c = dets
        yield ((a, b), (c, BOUNDARY))
        yield ((a, c), (b, BOUNDARY))
        yield ((b, c), (a, BOUNDARY))
        yield ((a, BOUNDARY), (b, BOUNDARY), (c, BOUNDARY))
    elif len(dets) == 4:
        a, b, c, d = dets
        yield ((a, b), (c, d))
        yield ((a, c), (b, d))
        yield ((a, d), (b, c))
        pairs = ((a, b), (a, c), (a, d), (b, c), (b, d), (c, d))
        for pair in pairs:
            rest = tuple(x for x in dets if x not in pair)
            yield (pair, (rest[0], BOUNDARY), (rest[1], BOUNDARY))
        yield tuple((x, BOUNDARY) for x in dets)
    else:  # pragma: no cover
        raise AssertionError(dets)


def build_detector_graph(circuit: Circuit) -> DetectorGraph:
    """Derive the weighted decoding graph from a noisy circuit."""
    if not any(i.opcode in NOISE_OPCODES for i in circuit.instructions):
        raise DecodeError(
            "circuit contains no noise instructions; the detector graph "
            "would be empty"
        )
    mechanisms = _collect_mechanisms(circuit)

    # Direct pass: one- and two-detector mechanisms become edges, bucketed
    # by endpoints and logical flag.
    buckets: dict[tuple[int, int], dict[bool, float]] = {}
    deferred: list[tuple[tuple[int, ...], bool, float]] = []
    dropped = 0.0
    for dets, obs, p in mechanisms:
        if len(dets) == 0:
            # detector-free and observable-free by emit(); pure no-ops were
            # already skipped, so nothing reaches here
            continue
        if len(dets) == 1:
            key = (dets[0], BOUNDARY)
        elif len(dets) == 2:
            key = dets
        elif len(dets) <= 4:
            deferred.append((dets, obs, p))
            continue
        else:
            raise DecodeError(
                f"mechanism fires {len(dets)} detectors {dets}; this "
                "circuit family should never exceed 4"
            )
        flags = buckets.setdefault(key, {})
        flags[obs] = _merge(flags.get(obs, 0.0), p)

    # Conflicting logical flags on one endpoint pair cannot be represented
    # by a single edge; keep the heavier side, drop the other.
    edge_p: dict[tuple[int, int], float] = {}
    edge_flag: dict[tuple[int, int], bool] = {}
    for key, flags in buckets.items():
        if len(flags) == 2 and flags[True] > flags[False]:
            winner = True
        elif len(flags) == 2:
            winner = False
        else:
            winner = next(iter(flags))
        if len(flags) == 2:
            dropped += flags[not winner]
        edge_p[key] = flags[winner]
        edge_flag[key] = winner

    # Decomposition pass: fold 3- and 4-detector mechanisms into existing
    # edges, requiring the component flags to XOR to the mechanism's flag.
    for dets, obs, p in deferred:
        chosen = None
        for cand in _decomposition_candidates(dets):
            if all(e in edge_flag for e in cand):
                parity = False
                for e in cand:
                    parity ^= edge_flag[e]
                if parity == obs:
                    chosen = cand
                    break
        if chosen is None:
            dropped += p
            continue
        for e in chosen:
            edge_p[e] = _merge(edge_p[e], p)

    edges = []
    for (a, b), p in sorted(edge_p.items()):
        if p == 0.0:
            continue  # never fires; keeps every weight finite
        if p >= 0.5:
            raise DecodeError(
                f"edge ({a}, {b}) reached probability {p:.4f} >= 0.5; "
                "weights would be non-positive"
            )
        edges.append(
            GraphEdge(a, b, p, math.log((1.0 - p) / p), edge_flag[(a, b)])
        )

    if not edges:
        raise DecodeError("no error mechanism has nonzero probability")

    graph = DetectorGraph(
        n_detectors=circuit.n_detectors,
        edges=tuple(edges),
        dropped_mass=dropped,
        meta=dict(circuit.meta),
    )
    return graph


def _solve_shot(
    graph: DetectorGraph,
    defects: np.ndarray,
    dmin: np.ndarray,
    dpar: np.ndarray,
    engine: str | None,
):
    nb = graph.n_detectors  # boundary column/row index in dmin
    k = len(defects)
    if k == 0:
        return (), 0.0, False

    bdist = dmin[defects, nb]
    if not np.all(np.isfinite(bdist)):
        bad = defects[~np.isfinite(bdist)][0]
        raise DecodeError(
            f"defect at detector {int(bad)} cannot reach the boundary; "
            "graph is disconnected"
        )
    bflag = dpar[defects, nb]
    if k == 1:
        d = int(defects[0])
        return ((d, None),), float(bdist[0]), bool(bflag[0])

    dd = dmin[np.ix_(defects, defects)]
    gain = bdist[:, None] + bdist[None, :] - dd
    iu, ju = np.triu_indices(k, 1)
    keep = gain[iu, ju] > 0.0
    us, vs, gs = iu[keep], ju[keep], gain[iu, ju][keep]

    pairs: list[tuple[int, int | None]] = []
    total = 0.0
    flip = False

    if len(us) == 0:
        for i in range(k):
            pairs.append((int(defects[i]), None))
            total += float(bdist[i])
            flip ^= bool(bflag[i])
        return tuple(pairs), total, flip

    adj = sparse.csr_matrix(
        (np.ones(len(us), dtype=np.uint8), (us, vs)), shape=(k, k)
    )
    ncomp, comp = csgraph.connected_components(adj, directed=False)
    edge_comp = comp[us]

    matched = np.full(k, -1, dtype=np.int64)
    for ci in range(ncomp):
        members = np.flatnonzero(comp == ci)
        if len(members) == 1:
            continue
        sel = edge_comp == ci
        cus, cvs, cgs = us[sel], vs[sel], gs[sel]
        if len(members) == 2:
            # single positive-gain edge: pairing strictly beats boundary
            matched[cus[0]] = cvs[0]
            matched[cvs[0]] = cus[0]
            continue
        local = {int(g): i for i, g in enumerate(members)}
        lu = np.array([local[int(x)] for x in cus], dtype=np.int32)
        lv = np.array([local[int(x)] for x in cvs], dtype=np.int32)
        mate = matching.max_weight_matching(
            len(members), lu, lv, cgs, engine=engine
        )
        for li, mi in enumerate(mate):
            if mi >= 0:
                matched[members[li]] = members[mi]

    for i in range(k):
        j = matched[i]
        if j < 0:
            pairs.append((int(defects[i]), None))
            total += float(bdist[i])
            flip ^= bool(bflag[i])
        elif j > i:
            pairs.append((int(defects[i]), int(defects[j])))
            total += float(dd[i, j])
            flip ^= bool(dpar[defects[i], defects[j]])
    return tuple(pairs), total, flip


def decode(
    graph: DetectorGraph, events: np.ndarray, engine: str | None = None
) -> Correction:
    """Decode one shot of detector events into a Correction."""
    ev = np.asarray(events)
    if ev.shape != (graph.n_detectors,):
        raise DecodeError(
            f"expected {graph.n_detectors} detector events, got shape "
            f"{ev.shape}"
        )
    dmin, dpar = graph.paths()
    defects = np.flatnonzero(ev)
    pairs, total, flip = _solve_shot(graph, defects, dmin, dpar, engine)
    return Correction(pairs, total, flip)


def decode_batch(
    graph: DetectorGraph,
    events: np.ndarray,
    engine: str | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Decode (shots, n_detectors) events; returns (predictions, weights).

    engine=None uses the compiled batch path when available; "python" and
    "networkx" force the per-shot reference loop. All paths agree shot for
    shot (same pairing weights, same prediction bits).
    """
    ev = np.asarray(events)
    if ev.ndim != 2 or ev.shape[1] != graph.n_detectors:
        raise DecodeError(
            f"expected (shots, {graph.n_detectors}) events, got {ev.shape}"
        )
    shots = ev.shape[0]
    if engine is None and matching.HAVE_NATIVE and shots > 0:
        return _decode_batch_native(graph, ev)
    dmin, dpar = graph.paths()
    pair_engine = None if engine == "python" else engine
    predictions = np.zeros(shots, dtype=np.uint8)
    weights = np.zeros(shots, dtype=np.float64)
    for s in range(shots):
        defects = np.flatnonzero(ev[s])
        _, total, flip = _solve_shot(graph, defects, dmin, dpar, pair_engine)
        predictions[s] = 1 if flip else 0
        weights[s] = total
    return predictions, weights


def _decode_batch_native(
    graph: DetectorGraph, ev: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    from . import _blossom

    shots = ev.shape[0]
    srows, scols = np.nonzero(ev)
    idx = scols.astype(np.int32)
    counts = np.bincount(srows, minlength=shots)
    off = np.zeros(shots + 1, dtype=np.int64)
    np.cumsum(counts, out=off[1:])
    dmin_b, dpar_b = graph._native_tables()
    try:
        pred_b, w_b = _blossom.decode_shots(
            graph.n_detectors, dmin_b, dpar_b, idx.tobytes(), off.tobytes()
        )
    except ValueError as exc:
        raise DecodeError(str(exc)) from None
    predictions = np.frombuffer(pred_b, dtype=np.uint8).copy()
    weights = np.frombuffer(w_b, dtype=np.float64).copy()
    return predictions, weights
