import pytest

from surfcycle.circuit import (
    Circuit,
    Instruction,
    build_memory_circuit,
    default_rounds,
    parse_circuit,
    serialize_circuit,
)
from surfcycle.layout import build_layout


@pytest.mark.parametrize("d,r", [(3, 10), (5, 16), (7, 22)])
def test_default_rounds(d, r):
    assert default_rounds(d) == r


def test_measurement_and_detector_counts():
    lay = build_layout(3, "original")
    c = build_memory_circuit(lay, 10)
    # 8 ancilla measurements per round plus the 9 data measurements
    assert c.n_measurements == 89
    assert c.n_detectors == 80


@pytest.mark.parametrize("d", [3, 5])
def test_measurement_map_identical_across_variants(d):
    """The shared-ancilla circuit reorders hardware, not records: both
    variants must expose the same measurement indexing, detector
    definitions, and observable."""
    r = default_rounds(d)
    orig = build_memory_circuit(build_layout(d, "original"), r)
    mod = build_memory_circuit(build_layout(d, "modified"), r)
    assert orig.n_measurements == mod.n_measurements
    assert orig.detectors == mod.detectors
    assert orig.observable == mod.observable


def test_first_round_detectors_are_z_only():
    lay = build_layout(3, "original")
    c = build_memory_circuit(lay, 4)
    z_ids = {s.id for s in lay.z_stabilizers()}
    first = [d for d in c.detectors if d.round_index == 1]
    assert {d.stabilizer_id for d in first} == z_ids
    for det in first:
        assert len(det.measurement_indices) == 1


def test_middle_round_detectors_compare_consecutive_rounds():
    lay = build_layout(3, "original")
    c = build_memory_circuit(lay, 4)
    n_stabs = len(lay.stabilizers)
    mids = [d for d in c.detectors if 2 <= d.round_index <= 4]
    assert len(mids) == 3 * n_stabs
    for det in mids:
        a, b = det.measurement_indices
        assert b - a == n_stabs


def test_final_detectors_fold_in_data_measurements():
    lay = build_layout(3, "original")
    c = build_memory_circuit(lay, 4)
    final_base = c.n_measurements - lay.n_data
    finals = [d for d in c.detectors if d.round_index == 5]
    by_id = {s.id: s for s in lay.stabilizers}
    assert {d.stabilizer_id for d in finals} == {
        s.id for s in lay.z_stabilizers()
    }
    for det in finals:
        stab = by_id[det.stabilizer_id]
        anchor, *data = det.measurement_indices
        assert anchor < final_base
        assert tuple(m - final_base for m in data) == stab.support


def test_observable_is_logical_column_of_data_measurements():
    lay = build_layout(5, "original")
    c = build_memory_circuit(lay, 3)
    final_base = c.n_measurements - lay.n_data
    assert c.observable == tuple(final_base + q for q in lay.logical_z)


def test_total_detector_count_scales_with_rounds():
    lay = build_layout(3, "original")
    for r in (1, 2, 7):
        c = build_memory_circuit(lay, r)
        assert c.n_detectors == r * len(lay.stabilizers)


def test_modified_runs_x_then_z_each_round():
    lay = build_layout(3, "modified")
    c = build_memory_circuit(lay, 2)
    meas_blocks = [i.targets for i in c.instructions if i.opcode == "M"]
    # two ancilla measurement blocks per round, each over the shared bank,
    # then the final data block
    assert len(meas_blocks) == 5
    bank = set(meas_blocks[0])
    assert all(set(b) == bank for b in meas_blocks[:4])
    assert meas_blocks[4] == tuple(range(9))


def test_rounds_must_be_positive():
    lay = build_layout(3, "original")
    with pytest.raises(ValueError):
        build_memory_circuit(lay, 0)


def test_serialize_parse_round_trip():
    for variant in ("original", "modified"):
        c = build_memory_circuit(build_layout(3, variant), 3)
        back = parse_circuit(serialize_circuit(c))
        assert back == c


def test_serialize_header_becomes_comments():
    c = build_memory_circuit(build_layout(3, "original"), 1)
    text = serialize_circuit(c, header="alpha\nbeta")
    lines = text.splitlines()
    assert lines[0] == "# alpha"
    assert lines[1] == "# beta"
    assert parse_circuit(text) == c


def test_serialize_round_trips_noise_probability():
    c = Circuit(
        n_qubits=2,
        instructions=(
            Instruction("XERR", (0,), 0.1 + 1e-17),
            Instruction("CX", (0, 1), None),
        ),
        detectors=(),
        observable=(),
        meta={},
    )
    assert parse_circuit(serialize_circuit(c)) == c


@pytest.mark.parametrize(
    "text",
    [
        "NQUBITS 2\nWOBBLE 0\nOBSERVABLE",
        "NQUBITS 2\nNQUBITS 2\nOBSERVABLE",
        "NQUBITS 0\nOBSERVABLE",
        "NQUBITS 2\nXERR(0.1 0\nOBSERVABLE",
        "H 0\nOBSERVABLE",
    ],
)
def test_parse_rejects_malformed(text):
    with pytest.raises(ValueError):
        parse_circuit(text)


def test_circuit_validates_targets_and_observable():
    with pytest.raises(ValueError):
        Circuit(
            n_qubits=1,
            instructions=(Instruction("H", (1,), None),),
            detectors=(),
            observable=(),
            meta={},
        )
    with pytest.raises(ValueError):
        Circuit(
            n_qubits=1,
            instructions=(Instruction("M", (0,), None),),
            detectors=(),
            observable=(1,),
            meta={},
        )
