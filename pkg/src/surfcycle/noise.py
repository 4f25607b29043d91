"""Noise insertion passes over memory-experiment circuits.

Four models, all driven by a single physical rate p:

    depolarizing   DEPOL1(p) on all data at the start of every full round,
                   DEPOL1(p) after every H, DEPOL2(p) after every CX pair
    gate           XERR(p) then ZERR(p) on all data after every full round
                   (two independent channels), DEPOL1(p) after every H,
                   DEPOL2(p) after every CX pair
    readout_reset  FLIP_PRE_M(p) before every M, FLIP_POST_R(p) after every
                   R, both around every MR
    combined       set union of the three; insertions that two models share
                   (the after-H and after-CX depolarizing) appear once, so
                   every (location, channel) pair carries exactly rate p

The modified variant gets its start-of-round data layer once per full round,
before the X sub-round, mirroring the original's single layer per round.

A pass refuses circuits that already contain noise; models never stack.
"""

from __future__ import annotations

from .circuit import Circuit, Instruction, NOISE_OPCODES

NOISE_KINDS = ("depolarizing", "gate", "readout_reset", "combined")


def _round_start_indices(circuit: Circuit) -> list[int]:
    """Instruction indices at which full rounds begin.

    Rounds open with a reset of the ancilla bank; the modified variant resets
    the bank twice per round (once per sub-round), so only every other bank
    reset opens a round there.
    """
    meta = circuit.meta
    for key in ("variant", "distance", "rounds"):
        if key not in meta:
            raise ValueError(f"circuit meta lacks {key!r}; build it with build_memory_circuit")
    n_data = meta["distance"] ** 2
    bank = tuple(range(n_data, circuit.n_qubits))
    bank_resets = [
        i for i, ins in enumerate(circuit.instructions)
        if ins.opcode == "R" and ins.targets == bank
    ]
    per_round = 1 if meta["variant"] == "original" else 2
    if len(bank_resets) != per_round * meta["rounds"]:
        raise ValueError(
            f"expected {per_round * meta['rounds']} ancilla-bank resets, "
            f"found {len(bank_resets)}"
        )
    return bank_resets[::per_round]


def apply_noise(circuit: Circuit, kind: str, p: float) -> Circuit:
    """Return a copy of `circuit` with one noise model's channels inserted."""
    if kind not in NOISE_KINDS:
        raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {kind!r}")
    if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be a probability in [0, 1], got {p!r}")
    p = float(p)
    for ins in circuit.instructions:
        if ins.opcode in NOISE_OPCODES:
            raise ValueError("circuit already carries noise; refusing to stack models")

    depol = kind in ("depolarizing", "combined")
    gate = kind in ("gate", "combined")
    readout = kind in ("readout_reset", "combined")

    n_data = circuit.meta["distance"] ** 2 if "distance" in circuit.meta else None
    starts = set(_round_start_indices(circuit))
    if n_data is None:
        raise ValueError("circuit meta lacks 'distance'")
    data = tuple(range(n_data))

    final_m = len(circuit.instructions) - 1
    last = circuit.instructions[final_m]
    if last.opcode != "M" or last.targets != data:
        raise ValueError("circuit does not end with the terminal data measurement")

    out: list[Instruction] = []
    rounds_opened = 0
    for i, ins in enumerate(circuit.instructions):
        if i in starts:
            if gate and rounds_opened >= 1:
                out.append(Instruction("XERR", data, p))
                out.append(Instruction("ZERR", data, p))
            if depol:
                out.append(Instruction("DEPOL1", data, p))
            rounds_opened += 1
        if i == final_m and gate:
            # close out the last full round before the terminal readout
            out.append(Instruction("XERR", data, p))
            out.append(Instruction("ZERR", data, p))
        if readout and ins.opcode in ("M", "MR"):
            out.append(Instruction("FLIP_PRE_M", ins.targets, p))
        out.append(ins)
        if (depol or gate) and ins.opcode == "H":
            out.append(Instruction("DEPOL1", ins.targets, p))
        if (depol or gate) and ins.opcode == "CX":
            out.append(Instruction("DEPOL2", ins.targets, p))
        if readout and ins.opcode in ("R", "MR"):
            out.append(Instruction("FLIP_POST_R", ins.targets, p))

    meta = dict(circuit.meta)
    meta["noise"] = kind
    meta["p"] = p
    return Circuit(
        n_qubits=circuit.n_qubits,
        instructions=tuple(out),
        detectors=circuit.detectors,
        observable=circuit.observable,
        meta=meta,
    )
