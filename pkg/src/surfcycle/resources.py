"""Qubit-count planning for the two surface-code layouts.

All arithmetic here is exact integer math (no floats except in the final
percentage / approximation reports), so the numbers can be trusted for
planning hardware budgets at any distance.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

VARIANTS = ("original", "modified")

# Largest distance growth per retired ancilla block scales like (2/sqrt(3)-1)*d.
# Kept as a module constant so reports can show the rule-of-thumb next to the
# exact search result.
GROWTH_FACTOR = 2.0 / math.sqrt(3.0) - 1.0


def _check_distance(distance: int) -> None:
    if not isinstance(distance, int) or isinstance(distance, bool):
        raise ValueError(f"distance must be an integer, got {distance!r}")
    if distance < 3:
        raise ValueError(f"distance must be at least 3, got {distance}")
    if distance % 2 == 0:
        raise ValueError(f"distance must be odd, got {distance}")


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def q_total(distance: int, variant: str) -> int:
    """Total physical qubits for a distance-d patch.

    original: d*d data qubits plus one dedicated ancilla per stabilizer,
    giving 2*d*d - 1.  modified: the X and Z stabilizer halves share one
    ancilla bank of (d*d - 1) // 2, giving (3*d*d - 1) // 2.
    """
    _check_distance(distance)
    _check_variant(variant)
    if variant == "original":
        return 2 * distance * distance - 1
    return (3 * distance * distance - 1) // 2


def reduction_total(distance: int) -> float:
    """Percentage of qubits the shared-ancilla layout removes at equal distance.

    Exactly 100 * (d^2 - 1) / (2 * (2*d^2 - 1)); approaches 25% from below
    as d grows.
    """
    _check_distance(distance)
    saved = q_total(distance, "original") - q_total(distance, "modified")
    return 100.0 * saved / q_total(distance, "original")


def delta_q(distance: int) -> int:
    """Extra qubits needed to run distance d+2 shared-ancilla instead of
    distance d original.

    Equals (d + 1) * (13 - d) // 2: positive below d = 13 (the upgrade costs
    qubits), zero at d = 13 (break-even), negative above (the upgrade saves
    qubits outright).
    """
    _check_distance(distance)
    return q_total(distance + 2, "modified") - q_total(distance, "original")


@dataclass(frozen=True)
class MaxGrowth:
    """Result of the largest-affordable-distance search.

    exact_k: largest integer k >= 0 with q_total(d+k, modified) still within
        the distance-d original budget, found by exact integer search of
        3*(d+k)^2 <= 4*d^2 - 1.
    approx_k: floor(GROWTH_FACTOR * d), the closed-form rule of thumb.
    approx_differs: True when the rule of thumb misses the exact answer.
    odd_preserving_k: exact_k rounded down to even so d+k stays odd (an even
        target distance is not a valid patch).
    target_distance: d + odd_preserving_k.
    qubits_saved: original budget minus the shared-ancilla cost at the target.
    """

    distance: int
    exact_k: int
    approx_k: int
    approx_differs: bool
    odd_preserving_k: int
    target_distance: int
    qubits_saved: int


def max_k(distance: int) -> MaxGrowth:
    """Largest distance increase that fits in the original layout's budget.

    The shared-ancilla patch at distance D fits iff (3*D^2 - 1) / 2 is at
    most 2*d^2 - 1, i.e. 3*D^2 <= 4*d^2 - 1.  Searched exactly over
    integers; no floating point is involved in the bound itself.
    """
    _check_distance(distance)
    budget = 4 * distance * distance - 1
    k = 0
    while 3 * (distance + k + 1) ** 2 <= budget:
        k += 1
    approx = math.floor(GROWTH_FACTOR * distance)
    odd_k = k if k % 2 == 0 else k - 1
    target = distance + odd_k
    saved = q_total(distance, "original") - q_total(target, "modified")
    return MaxGrowth(
        distance=distance,
        exact_k=k,
        approx_k=approx,
        approx_differs=approx != k,
        odd_preserving_k=odd_k,
        target_distance=target,
        qubits_saved=saved,
    )


def plan_report(distance: int, case: str) -> dict:
    """Planning summary for one of three upgrade questions.

    Case "a": run the same distance on fewer qubits.  Case "b": spend the
    ancilla savings on a distance d+2 patch and report the price relative to
    both the current patch and a direct d+2 original build (incremental and
    absolute totals are labeled separately; they are different numbers and
    quoting one as the other is a classic budgeting mistake).  Case "c":
    grow distance as far as the current budget allows.
    """
    _check_distance(distance)
    case = case.lower()
    if case not in ("a", "b", "c"):
        raise ValueError(f"case must be 'a', 'b', or 'c', got {case!r}")

    base_original = q_total(distance, "original")
    report: dict = {"case": case, "distance": distance}

    if case == "a":
        same_modified = q_total(distance, "modified")
        report.update(
            q_original=base_original,
            q_modified=same_modified,
            qubits_saved=base_original - same_modified,
            reduction_percent=reduction_total(distance),
        )
    elif case == "b":
        target = distance + 2
        upgraded = q_total(target, "modified")
        direct = q_total(target, "original")
        change = delta_q(distance)
        report.update(
            target_distance=target,
            q_original_now=base_original,
            q_modified_target_total=upgraded,
            q_original_target_total=direct,
            incremental_cost_modified=change,
            incremental_cost_original=direct - base_original,
            delta_q=change,
            regime=(
                "costs-qubits" if change > 0 else "break-even" if change == 0 else "saves-qubits"
            ),
        )
    else:
        growth = max_k(distance)
        report.update(
            q_original_now=base_original,
            q_modified_target_total=q_total(growth.target_distance, "modified"),
            **asdict(growth),
        )
    return report
