"""Pauli-frame sampling of noisy stabilizer circuits.

The sampler tracks, per shot, which qubits currently differ from a noiseless
reference execution by an X and/or Z Pauli.  Cliffords move the frame around
(H swaps the two masks, CX spreads X control-to-target and Z
target-to-control), resets clear it, and a Z-basis measurement records a
flipped outcome exactly when the qubit carries an X component.  Because
every detector and the observable are parities that are deterministic on the
noiseless circuit, the recorded flip parities are exactly the physical
detector values; no reference randomization is needed.

Randomness is counter-based and chunked: shots are processed in fixed blocks
of CHUNK_SHOTS, each block drawing from its own Philox stream keyed by
(seed, block index), and every instruction draws a full-block-sized array
even when the final block is short.  Shot i therefore receives identical
noise regardless of how many shots are requested, how blocks are distributed
over workers, or the --jobs setting.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .circuit import Circuit

CHUNK_SHOTS = 4096
_MASK64 = (1 << 64) - 1


@dataclass
class ShotBatch:
    """Detector events and observable flips for a block of shots."""

    detector_events: np.ndarray  # (shots, n_detectors) uint8
    observable_flips: np.ndarray  # (shots,) uint8
    seed: int
    shots: int


class _Compiled:
    """Circuit lowered to numpy-ready target arrays plus the sparse map from
    measurement records to detector/observable parities."""

    def __init__(self, circuit: Circuit):
        self.n_qubits = circuit.n_qubits
        self.n_detectors = circuit.n_detectors
        self.ops: list[tuple] = []
        n_meas = 0
        for ins in circuit.instructions:
            t = np.asarray(ins.targets, dtype=np.intp)
            if ins.opcode == "TICK":
                continue
            if ins.opcode in ("CX", "DEPOL2"):
                self.ops.append((ins.opcode, t[::2], t[1::2], ins.prob))
            elif ins.opcode in ("M", "MR"):
                self.ops.append((ins.opcode, t, n_meas, None))
                n_meas += len(t)
            else:
                self.ops.append((ins.opcode, t, None, ins.prob))
        self.n_meas = n_meas

        rows: list[int] = []
        cols: list[int] = []
        for di, det in enumerate(circuit.detectors):
            for m in det.measurement_indices:
                rows.append(di)
                cols.append(m)
        for m in circuit.observable:
            rows.append(self.n_detectors)
            cols.append(m)
        self.parity_map = sparse.csr_matrix(
            (np.ones(len(rows), dtype=np.uint8), (rows, cols)),
            shape=(self.n_detectors + 1, max(n_meas, 1)),
        )


def _chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, chunk_index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _pauli_bits(code: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # 0=I 1=X 2=Y 3=Z -> (has X component, has Z component)
    return (code == 1) | (code == 2), (code == 2) | (code == 3)


def _run_chunk(comp: _Compiled, seed: int, chunk_index: int, rows: int):
    """Execute all shots of one block; returns (events, observable) arrays."""
    rng = _chunk_rng(seed, chunk_index)
    full = CHUNK_SHOTS
    x = np.zeros((rows, comp.n_qubits), dtype=bool)
    z = np.zeros((rows, comp.n_qubits), dtype=bool)
    flips = np.zeros((rows, comp.n_meas), dtype=bool)

    for opcode, a, b, p in comp.ops:
        if opcode == "H":
            tmp = x[:, a].copy()
            x[:, a] = z[:, a]
            z[:, a] = tmp
        elif opcode == "CX":
            x[:, b] ^= x[:, a]
            z[:, a] ^= z[:, b]
        elif opcode == "R":
            x[:, a] = False
            z[:, a] = False
        elif opcode == "M":
            flips[:, b : b + len(a)] = x[:, a]
            z[:, a] = False  # post-measurement Z phase is unobservable
        elif opcode == "MR":
            flips[:, b : b + len(a)] = x[:, a]
            x[:, a] = False
            z[:, a] = False
        elif opcode == "DEPOL1":
            u = rng.random((full, len(a)))[:rows]
            act = u < p
            if p > 0.0:
                idx = np.minimum((u * (3.0 / p)).astype(np.int8), 2)
                x[:, a] ^= act & (idx <= 1)
                z[:, a] ^= act & (idx >= 1)
        elif opcode == "DEPOL2":
            u = rng.random((full, len(a)))[:rows]
            act = u < p
            if p > 0.0:
                code = np.minimum((u * (15.0 / p)).astype(np.int8), 14) + 1
                xa, za = _pauli_bits(code >> 2)
                xb, zb = _pauli_bits(code & 3)
                x[:, a] ^= act & xa
                z[:, a] ^= act & za
                x[:, b] ^= act & xb
                z[:, b] ^= act & zb
        elif opcode in ("XERR", "FLIP_PRE_M", "FLIP_POST_R"):
            u = rng.random((full, len(a)))[:rows]
            x[:, a] ^= u < p
        elif opcode == "ZERR":
            u = rng.random((full, len(a)))[:rows]
            z[:, a] ^= u < p
        else:  # pragma: no cover - opcodes are validated upstream
            raise AssertionError(opcode)

    parities = comp.parity_map @ flips.T.astype(np.uint8)
    parities &= 1
    events = parities[: comp.n_detectors].T.copy()
    observable = parities[comp.n_detectors]
    return events, observable


def sample_chunks(circuit: Circuit, shots: int, seed: int):
    """Yield (start_shot, detector_events, observable_flips) block by block.

    The streaming form of sample(): identical bits, bounded memory.
    """
    if not isinstance(shots, int) or isinstance(shots, bool) or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    comp = _Compiled(circuit)
    for chunk_index in range((shots + CHUNK_SHOTS - 1) // CHUNK_SHOTS):
        start = chunk_index * CHUNK_SHOTS
        rows = min(CHUNK_SHOTS, shots - start)
        events, observable = _run_chunk(comp, seed, chunk_index, rows)
        yield start, events, observable


def _worker(args):
    circuit, seed, chunk_index, rows = args
    return chunk_index, _run_chunk(_Compiled(circuit), seed, chunk_index, rows)


def sample(circuit: Circuit, shots: int, seed: int, jobs: int = 1) -> ShotBatch:
    """Sample detector events and observable flips for `shots` shots.

    Output is a pure function of (circuit, shots, seed): the jobs parameter
    only distributes whole blocks across processes.
    """
    if not isinstance(shots, int) or isinstance(shots, bool) or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots!r}")
    if not isinstance(jobs, int) or isinstance(jobs, bool) or jobs < 1:
        raise ValueError(f"jobs must be a positive integer, got {jobs!r}")

    n_det = len(circuit.detectors)
    events = np.empty((shots, n_det), dtype=np.uint8)
    observable = np.empty(shots, dtype=np.uint8)

    n_chunks = (shots + CHUNK_SHOTS - 1) // CHUNK_SHOTS
    sizes = [
        (c, min(CHUNK_SHOTS, shots - c * CHUNK_SHOTS)) for c in range(n_chunks)
    ]
    if jobs == 1 or n_chunks == 1:
        comp = _Compiled(circuit)
        results = ((c, _run_chunk(comp, seed, c, rows)) for c, rows in sizes)
        for c, (ev, ob) in results:
            start = c * CHUNK_SHOTS
            events[start : start + len(ob)] = ev
            observable[start : start + len(ob)] = ob
    else:
        tasks = [(circuit, seed, c, rows) for c, rows in sizes]
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            for c, (ev, ob) in pool.map(_worker, tasks):
                start = c * CHUNK_SHOTS
                events[start : start + len(ob)] = ev
                observable[start : start + len(ob)] = ob

    return ShotBatch(events, observable, seed=seed, shots=shots)
