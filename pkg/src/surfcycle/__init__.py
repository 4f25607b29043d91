"""Surface-code memory experiments with a shared-ancilla variant.

The package covers the whole pipeline: lattice layout, syndrome-extraction
circuits, noise channels, Pauli-frame sampling, exact minimum-weight
matching decode, and Monte Carlo sweep orchestration, for both the
standard layout (one ancilla per stabilizer) and the half-ancilla layout
that runs X and Z checks through one recycled bank.
"""

__version__ = "0.1.0"

from .circuit import (
    Circuit,
    build_memory_circuit,
    default_rounds,
    parse_circuit,
    serialize_circuit,
)
from .decoder import (
    Correction,
    DecodeError,
    DetectorGraph,
    GraphEdge,
    build_detector_graph,
    decode,
    decode_batch,
)
from .experiments import (
    RatioReport,
    Row,
    SweepConfig,
    SweepResult,
    ThresholdEstimate,
    estimate_threshold,
    per_round_rate,
    relative_ratio,
    rows_from_csv,
    rows_to_csv,
    run_sweep,
    wilson_interval,
)
from .layout import Layout, Stabilizer, VARIANTS, build_layout, render_grid
from .noise import NOISE_KINDS, apply_noise
from .resources import (
    MaxGrowth,
    delta_q,
    max_k,
    plan_report,
    q_total,
    reduction_total,
)
from .sim import ShotBatch, sample, sample_chunks

__all__ = [
    "__version__",
    "Circuit",
    "Correction",
    "DecodeError",
    "DetectorGraph",
    "GraphEdge",
    "Layout",
    "MaxGrowth",
    "NOISE_KINDS",
    "RatioReport",
    "Row",
    "ShotBatch",
    "Stabilizer",
    "SweepConfig",
    "SweepResult",
    "ThresholdEstimate",
    "VARIANTS",
    "apply_noise",
    "build_detector_graph",
    "build_layout",
    "build_memory_circuit",
    "decode",
    "decode_batch",
    "default_rounds",
    "delta_q",
    "estimate_threshold",
    "max_k",
    "parse_circuit",
    "per_round_rate",
    "plan_report",
    "q_total",
    "reduction_total",
    "relative_ratio",
    "render_grid",
    "rows_from_csv",
    "rows_to_csv",
    "run_sweep",
    "sample",
    "sample_chunks",
    "serialize_circuit",
    "wilson_interval",
]
