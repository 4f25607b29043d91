"""Measurement-cycle circuits for Z-basis memory experiments.

A circuit is a flat instruction list over one qubit index space (data qubits
first, then ancillas), plus detector and observable definitions in terms of
absolute zero-based measurement indices.

Instruction vocabulary:

    H, CX, R, M, MR           Cliffords, reset, Z-basis measurement
    DEPOL1(p), DEPOL2(p)      uniform 1- and 2-qubit depolarizing channels
    XERR(p), ZERR(p)          biased single-Pauli channels
    FLIP_PRE_M(p)             X just before a measurement (flips the record)
    FLIP_POST_R(p)            X just after a reset
    TICK                      layer separator, no effect

CX and DEPOL2 take a flat even-length target list read as (control, target)
/ (first, second) pairs; pairs within one instruction act in parallel and
never reuse a qubit.

In the original variant every stabilizer owns an ancilla and the X/Z checks
run through four shared CX layers each round.  In the modified variant each
round has two sub-rounds: the X checks are measured first, then the same
ancilla bank is reset and reused to measure the Z checks.  Both variants
produce rounds * (d^2 - 1) ancilla measurements plus a terminal data
measurement, with identical measurement-index bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .layout import Layout, N_LAYERS

GATE_OPCODES = ("H", "CX", "R", "M", "MR", "TICK")
NOISE_OPCODES = ("DEPOL1", "DEPOL2", "XERR", "ZERR", "FLIP_PRE_M", "FLIP_POST_R")
PAIR_OPCODES = ("CX", "DEPOL2")


@dataclass(frozen=True)
class Instruction:
    opcode: str
    targets: tuple[int, ...] = ()
    prob: float | None = None

    def __post_init__(self):
        if self.opcode in GATE_OPCODES:
            if self.prob is not None:
                raise ValueError(f"{self.opcode} takes no probability")
        elif self.opcode in NOISE_OPCODES:
            if self.prob is None or not 0.0 <= self.prob <= 1.0:
                raise ValueError(f"{self.opcode} needs a probability in [0, 1], got {self.prob!r}")
        else:
            raise ValueError(f"unknown opcode {self.opcode!r}")
        if self.opcode == "TICK":
            if self.targets:
                raise ValueError("TICK takes no targets")
        elif not self.targets:
            raise ValueError(f"{self.opcode} needs at least one target")
        if self.opcode in PAIR_OPCODES:
            if len(self.targets) % 2:
                raise ValueError(f"{self.opcode} needs an even target count")
            pairs = list(zip(self.targets[::2], self.targets[1::2]))
            used = [q for p in pairs for q in p]
            if len(set(used)) != len(used):
                raise ValueError(f"{self.opcode} reuses a qubit within one layer")
        if any(q < 0 for q in self.targets):
            raise ValueError(f"{self.opcode} has a negative target")


@dataclass(frozen=True)
class Detector:
    """Parity of 1..5 measurement records, deterministic absent noise.

    round_index is 1-based; the terminal data-measurement detectors use
    rounds + 1.  stabilizer_id names the check being compared.
    """

    measurement_indices: tuple[int, ...]
    round_index: int
    stabilizer_id: int

    def __post_init__(self):
        if not 1 <= len(self.measurement_indices) <= 5:
            raise ValueError("detector needs 1 to 5 measurement indices")
        if len(set(self.measurement_indices)) != len(self.measurement_indices):
            raise ValueError("detector repeats a measurement index")


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    instructions: tuple[Instruction, ...]
    detectors: tuple[Detector, ...]
    observable: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        n_meas = 0
        for ins in self.instructions:
            if ins.opcode != "TICK" and any(q >= self.n_qubits for q in ins.targets):
                raise ValueError(f"{ins.opcode} targets qubit outside 0..{self.n_qubits - 1}")
            if ins.opcode in ("M", "MR"):
                n_meas += len(ins.targets)
        for det in self.detectors:
            if any(m >= n_meas for m in det.measurement_indices):
                raise ValueError(
                    f"detector references measurement {max(det.measurement_indices)} "
                    f"but the circuit records only {n_meas}"
                )
        if any(m >= n_meas for m in self.observable):
            raise ValueError("observable references a measurement the circuit never records")

    @property
    def n_measurements(self) -> int:
        return sum(len(i.targets) for i in self.instructions if i.opcode in ("M", "MR"))

    @property
    def n_detectors(self) -> int:
        return len(self.detectors)


def default_rounds(distance: int) -> int:
    """Measurement rounds for a memory experiment: three per unit of
    distance plus one."""
    if distance < 3 or distance % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3, got {distance}")
    return 3 * distance + 1


def _cx_layer(stabs, layer: int) -> tuple[int, ...]:
    targets: list[int] = []
    for s in stabs:
        for q, lay in zip(s.support, s.layers):
            if lay != layer:
                continue
            if s.kind == "X":
                targets.extend((s.ancilla, q))  # ancilla controls
            else:
                targets.extend((q, s.ancilla))  # data controls
    return tuple(targets)


def build_memory_circuit(layout: Layout, rounds: int) -> Circuit:
    """Noiseless Z-basis memory experiment over the given layout.

    Data qubits start in |0>, stabilizers are measured for `rounds` rounds,
    then all data qubits are measured in Z.  Detectors: first-round Z checks
    (X outcomes that round are random and get none), every check compared
    against its previous-round value from round 2 on, and each Z check's
    data-support parity against its last ancilla measurement at the end.
    The observable is the parity of the logical-Z column's terminal
    measurements.
    """
    if not isinstance(rounds, int) or isinstance(rounds, bool) or rounds < 1:
        raise ValueError(f"rounds must be a positive integer, got {rounds!r}")

    d = layout.distance
    n_stabs = len(layout.stabilizers)
    xs = layout.x_stabilizers()
    zs = layout.z_stabilizers()
    ins: list[Instruction] = []

    ins.append(Instruction("R", tuple(range(layout.n_data))))
    ins.append(Instruction("TICK"))

    ancilla_bank = tuple(range(layout.n_data, layout.n_qubits))

    def extraction(stabs, hadamard: bool) -> None:
        ins.append(Instruction("R", ancilla_bank))
        ins.append(Instruction("TICK"))
        if hadamard:
            ins.append(Instruction("H", ancilla_bank))
            ins.append(Instruction("TICK"))
        for layer in range(N_LAYERS):
            targets = _cx_layer(stabs, layer)
            if targets:
                ins.append(Instruction("CX", targets))
            ins.append(Instruction("TICK"))
        if hadamard:
            ins.append(Instruction("H", ancilla_bank))
            ins.append(Instruction("TICK"))
        ins.append(Instruction("M", tuple(s.ancilla for s in stabs)))
        ins.append(Instruction("TICK"))

    for _ in range(rounds):
        if layout.variant == "original":
            # Both kinds share the four CX layers; only X ancillas need the
            # basis change.
            ins.append(Instruction("R", ancilla_bank))
            ins.append(Instruction("TICK"))
            x_anc = tuple(s.ancilla for s in xs)
            ins.append(Instruction("H", x_anc))
            ins.append(Instruction("TICK"))
            for layer in range(N_LAYERS):
                targets = _cx_layer(layout.stabilizers, layer)
                if targets:
                    ins.append(Instruction("CX", targets))
                ins.append(Instruction("TICK"))
            ins.append(Instruction("H", x_anc))
            ins.append(Instruction("TICK"))
            ins.append(Instruction("M", tuple(s.ancilla for s in layout.stabilizers)))
            ins.append(Instruction("TICK"))
        else:
            extraction(xs, hadamard=True)   # sub-round 1: X checks
            extraction(zs, hadamard=False)  # sub-round 2: same bank, Z checks
    ins.append(Instruction("M", tuple(range(layout.n_data))))

    # Measurement index of stabilizer s in round r (1-based): X ids precede Z
    # ids, and the modified variant measures the X block then the Z block, so
    # both variants share this map.
    def meas(r: int, sid: int) -> int:
        return (r - 1) * n_stabs + sid

    final_base = rounds * n_stabs

    detectors: list[Detector] = []
    for s in zs:
        detectors.append(Detector((meas(1, s.id),), 1, s.id))
    for r in range(2, rounds + 1):
        for s in layout.stabilizers:
            detectors.append(Detector((meas(r - 1, s.id), meas(r, s.id)), r, s.id))
    for s in zs:
        indices = (meas(rounds, s.id),) + tuple(final_base + q for q in s.support)
        detectors.append(Detector(indices, rounds + 1, s.id))

    observable = tuple(final_base + q for q in layout.logical_z)

    circuit = Circuit(
        n_qubits=layout.n_qubits,
        instructions=tuple(ins),
        detectors=tuple(detectors),
        observable=observable,
        meta={
            "variant": layout.variant,
            "distance": d,
            "rounds": rounds,
            "noise": "none",
            "p": 0.0,
        },
    )
    assert circuit.n_measurements == rounds * n_stabs + layout.n_data
    assert len(detectors) == rounds * n_stabs
    return circuit


# --- text serialization ----------------------------------------------------


def serialize_circuit(circuit: Circuit, header: str | None = None) -> str:
    """Render a circuit to its line-based text form.

    One instruction per line; noise probabilities are printed with repr so
    the exact float round-trips.  DETECTOR lines carry round index and
    stabilizer id before the absolute measurement indices.
    """
    lines: list[str] = []
    if header:
        for h in header.splitlines():
            lines.append(f"# {h}")
    lines.append(f"NQUBITS {circuit.n_qubits}")
    if circuit.meta:
        parts = " ".join(f"{k}={circuit.meta[k]!r}" for k in sorted(circuit.meta))
        lines.append(f"META {parts}")
    for ins in circuit.instructions:
        op = ins.opcode if ins.prob is None else f"{ins.opcode}({ins.prob!r})"
        lines.append(" ".join([op, *map(str, ins.targets)]) if ins.targets else op)
    for det in circuit.detectors:
        lines.append(
            " ".join(
                ["DETECTOR", str(det.round_index), str(det.stabilizer_id),
                 *map(str, det.measurement_indices)]
            )
        )
    lines.append(" ".join(["OBSERVABLE", *map(str, circuit.observable)]))
    return "\n".join(lines) + "\n"


def _parse_meta_value(key: str, raw: str):
    if key in ("distance", "rounds"):
        return int(raw)
    if key == "p":
        return float(raw)
    return raw


def parse_circuit(text: str) -> Circuit:
    """Inverse of serialize_circuit; rejects malformed or out-of-range input."""
    n_qubits: int | None = None
    meta: dict = {}
    instructions: list[Instruction] = []
    detectors: list[Detector] = []
    observable: tuple[int, ...] | None = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        word = fields[0]
        try:
            if word == "NQUBITS":
                if n_qubits is not None:
                    raise ValueError("duplicate NQUBITS")
                n_qubits = int(fields[1])
                if n_qubits < 1:
                    raise ValueError("NQUBITS must be positive")
            elif word == "META":
                for part in fields[1:]:
                    key, _, val = part.partition("=")
                    meta[key] = _parse_meta_value(key, val.strip("'\""))
            elif word == "DETECTOR":
                if len(fields) < 4:
                    raise ValueError("DETECTOR needs round, stabilizer and indices")
                detectors.append(
                    Detector(tuple(int(f) for f in fields[3:]), int(fields[1]), int(fields[2]))
                )
            elif word == "OBSERVABLE":
                if observable is not None:
                    raise ValueError("duplicate OBSERVABLE")
                observable = tuple(int(f) for f in fields[1:])
            else:
                opcode, _, probpart = word.partition("(")
                prob = None
                if probpart:
                    if not probpart.endswith(")"):
                        raise ValueError("unterminated probability")
                    prob = float(probpart[:-1])
                if opcode not in GATE_OPCODES and opcode not in NOISE_OPCODES:
                    raise ValueError(f"unknown opcode {opcode!r}")
                instructions.append(
                    Instruction(opcode, tuple(int(f) for f in fields[1:]), prob)
                )
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None

    if n_qubits is None:
        raise ValueError("missing NQUBITS line")
    # Circuit.__post_init__ re-checks qubit ranges and measurement indices.
    return Circuit(
        n_qubits=n_qubits,
        instructions=tuple(instructions),
        detectors=tuple(detectors),
        observable=observable if observable is not None else (),
        meta=meta,
    )
