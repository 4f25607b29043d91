"""Max-weight matching front end.

The decoder reduces minimum-weight defect pairing to a max-weight matching
problem with only positive-gain edges (see decoder module). This module
hides the engine choice: the bundled C extension when it built, otherwise
networkx's pure-python implementation, which is exact but orders of
magnitude slower. Both receive identical integer-scaled weights, so they
must return matchings of identical total weight; the test suite runs them
differentially.

Weights are quantized to SCALE units before solving. All candidate weights
in this package are bounded by a few thousand, so quantization error per
edge is below 1e-9 and cannot flip a comparison between matchings whose
true weights differ by more than ~1e-7.
"""

from __future__ import annotations

import numpy as np

try:
    from . import _blossom

    HAVE_NATIVE = True
except ImportError:  # pragma: no cover - build-environment dependent
    _blossom = None
    HAVE_NATIVE = False

SCALE = float(1 << 32)
# scaled magnitudes must stay well under 2^52 so the solver's half-integer
# double arithmetic is exact
_MAX_WEIGHT = 1e5


def _quantize(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.size and not np.all(np.isfinite(w)):
        raise ValueError("matching weights must be finite")
    if w.size and np.abs(w).max() > _MAX_WEIGHT:
        raise ValueError(
            f"matching weight magnitude exceeds {_MAX_WEIGHT:g}; "
            "instance is out of this solver's exact range"
        )
    return np.round(w * SCALE).astype(np.int64)


def _solve_native(n: int, us: np.ndarray, vs: np.ndarray, wq: np.ndarray):
    mate_bytes = _blossom.solve(
        n,
        np.ascontiguousarray(us, dtype=np.int32).tobytes(),
        np.ascontiguousarray(vs, dtype=np.int32).tobytes(),
        wq.tobytes(),
    )
    return np.frombuffer(mate_bytes, dtype=np.int32).copy()


def _solve_networkx(n: int, us: np.ndarray, vs: np.ndarray, wq: np.ndarray):
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(range(n))
    for u, v, w in zip(us.tolist(), vs.tolist(), wq.tolist()):
        g.add_edge(u, v, weight=w)
    pairs = nx.max_weight_matching(g, maxcardinality=False, weight="weight")
    mate = np.full(n, -1, dtype=np.int32)
    for a, b in pairs:
        mate[a] = b
        mate[b] = a
    return mate


def max_weight_matching(
    n: int,
    us,
    vs,
    weights,
    engine: str | None = None,
) -> np.ndarray:
    """Return mate[v] for the maximum-weight matching, -1 where exposed.

    Edges (us[i], vs[i]) carry float weights[i]; parallel edges are the
    caller's responsibility to merge. engine: None picks the C extension
    when available, else "native" or "networkx" force one.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ValueError(f"vertex count must be a non-negative int, got {n!r}")
    us = np.ascontiguousarray(us, dtype=np.int32)
    vs = np.ascontiguousarray(vs, dtype=np.int32)
    if us.shape != vs.shape or us.ndim != 1:
        raise ValueError("edge endpoint arrays must be 1-d and equal length")
    wq = _quantize(weights)
    if wq.shape != us.shape:
        raise ValueError("weights length must match edge count")
    if n == 0:
        return np.empty(0, dtype=np.int32)

    if engine is None:
        engine = "native" if HAVE_NATIVE else "networkx"
    if engine == "native":
        if not HAVE_NATIVE:
            raise RuntimeError("native matching extension is not available")
        return _solve_native(n, us, vs, wq)
    if engine == "networkx":
        return _solve_networkx(n, us, vs, wq)
    raise ValueError(f"unknown matching engine {engine!r}")
