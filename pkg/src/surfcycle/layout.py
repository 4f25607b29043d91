"""Rotated surface-code lattice: qubit coordinates, stabilizers, schedules.

Coordinates live on a (2d+1) x (2d+1) integer grid with y growing downward.
Data qubits sit on odd-odd sites; stabilizer ancillas on even-even sites.
X-type boundary stabilizers hang off the left/right edges, Z-type off the
top/bottom, so a Z logical runs vertically and an X logical horizontally.

The four CX layers follow a fixed schedule:

    X stabilizers visit NW, SW, NE, SE   (column scan)
    Z stabilizers visit NW, NE, SW, SE   (row scan)

in screen coordinates (N = -y).  The pair of scan shapes is what keeps a
mid-cycle ancilla fault from spreading onto two data qubits aligned with the
logical it threatens: X-ancilla faults land on vertically adjacent data
qubits (harmless to the vertical Z logical), Z-ancilla faults on horizontally
adjacent ones.  It also leaves every data qubit touched at most once per
layer and keeps simultaneously measured X/Z pairs commuting, both of which
are asserted at build time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Offsets (dx, dy) from a stabilizer site to its data qubits, by CX layer.
X_SCHEDULE = ((-1, -1), (-1, 1), (1, -1), (1, 1))
Z_SCHEDULE = ((-1, -1), (1, -1), (-1, 1), (1, 1))

N_LAYERS = 4

VARIANTS = ("original", "modified")


def _check_distance(distance: int) -> None:
    if not isinstance(distance, int) or isinstance(distance, bool):
        raise ValueError(f"distance must be an integer, got {distance!r}")
    if distance < 3:
        raise ValueError(f"distance must be at least 3, got {distance}")
    if distance % 2 == 0:
        raise ValueError(f"distance must be odd, got {distance}")


def _is_x_site(x: int, y: int, d: int) -> bool:
    # X stabilizers: even sites of one checkerboard color, clipped off the
    # top/bottom rows so their half boundary cells sit on the left/right edges.
    return (
        x % 2 == 0
        and y % 2 == 0
        and (x + y) % 4 == 2
        and 0 <= x <= 2 * d
        and 2 <= y <= 2 * d - 2
    )


def _is_z_site(x: int, y: int, d: int) -> bool:
    return (
        x % 2 == 0
        and y % 2 == 0
        and (x + y) % 4 == 0
        and 2 <= x <= 2 * d - 2
        and 0 <= y <= 2 * d
    )


def _data_id(x: int, y: int, d: int) -> int:
    return ((y - 1) // 2) * d + (x - 1) // 2


@dataclass(frozen=True)
class Stabilizer:
    """One parity check: its site, kind, data support, and CX timing.

    support holds data-qubit ids in schedule order; layers[i] is the CX layer
    (0..3) in which support[i] is touched.  Boundary checks skip the two
    off-lattice offsets, so their support has length 2.
    """

    id: int
    kind: str  # "X" or "Z"
    x: int
    y: int
    support: tuple[int, ...]
    layers: tuple[int, ...]
    ancilla: int
    boundary: bool


@dataclass(frozen=True)
class Layout:
    distance: int
    variant: str
    n_data: int
    n_ancilla: int
    n_qubits: int
    data_coords: tuple[tuple[int, int], ...]
    stabilizers: tuple[Stabilizer, ...]
    # (x_stabilizer_id, z_stabilizer_id) ancilla-sharing pairs; empty for the
    # original variant.
    pairs: tuple[tuple[int, int], ...]
    logical_z: tuple[int, ...]

    def x_stabilizers(self) -> tuple[Stabilizer, ...]:
        return tuple(s for s in self.stabilizers if s.kind == "X")

    def z_stabilizers(self) -> tuple[Stabilizer, ...]:
        return tuple(s for s in self.stabilizers if s.kind == "Z")


def _site_support(x: int, y: int, d: int, schedule) -> tuple[tuple[int, ...], tuple[int, ...]]:
    support = []
    layers = []
    for layer, (dx, dy) in enumerate(schedule):
        qx, qy = x + dx, y + dy
        if 0 < qx < 2 * d and 0 < qy < 2 * d:
            support.append(_data_id(qx, qy, d))
            layers.append(layer)
    return tuple(support), tuple(layers)


def _pair_ancillas(x_stabs: list[Stabilizer], z_stabs: list[Stabilizer]) -> list[tuple[int, int]]:
    """Greedy nearest-neighbor pairing of X checks to Z checks.

    Each X stabilizer, in id order, grabs the geometrically nearest Z
    stabilizer still unclaimed (squared Euclidean distance between sites,
    ties broken by lowest Z id).  Counts of the two kinds are equal, so this
    always yields a bijection.
    """
    free = {s.id: s for s in z_stabs}
    pairs = []
    for xs in x_stabs:
        best = min(
            free.values(),
            key=lambda zs: ((zs.x - xs.x) ** 2 + (zs.y - xs.y) ** 2, zs.id),
        )
        del free[best.id]
        pairs.append((xs.id, best.id))
    return pairs


def _validate_schedule(stabilizers: list[Stabilizer]) -> None:
    # Each data qubit at most once per CX layer across the combined schedule.
    for layer in range(N_LAYERS):
        seen: set[int] = set()
        for s in stabilizers:
            for q, lay in zip(s.support, s.layers):
                if lay != layer:
                    continue
                assert q not in seen, f"layer {layer} touches data qubit {q} twice"
                seen.add(q)
    # Simultaneously measured X/Z checks must commute through the interleaved
    # CX order: on every shared data-qubit pair the two checks' visit orders
    # must agree, otherwise the circuit measures the wrong operators.
    xs = [s for s in stabilizers if s.kind == "X"]
    zs = [s for s in stabilizers if s.kind == "Z"]
    for a in xs:
        a_layers = dict(zip(a.support, a.layers))
        for b in zs:
            shared = [q for q in a.support if q in b.support]
            if len(shared) < 2:
                continue
            b_layers = dict(zip(b.support, b.layers))
            signs = {a_layers[q] < b_layers[q] for q in shared}
            assert len(signs) == 1, f"X{a.id}/Z{b.id} interleave out of order"


def build_layout(distance: int, variant: str) -> Layout:
    """Construct the full lattice description for one code variant.

    original: every stabilizer gets a dedicated ancilla, 2*d^2 - 1 qubits
    total.  modified: the X checks run first each round and their ancilla
    bank is reset and reused by the Z checks, (3*d^2 - 1) // 2 qubits total.
    """
    _check_distance(distance)
    if variant not in VARIANTS:
        raise ValueError(f"variant must be 'original' or 'modified', got {variant!r}")

    d = distance
    data_coords = tuple(
        (2 * col + 1, 2 * row + 1) for row in range(d) for col in range(d)
    )

    x_sites = sorted(
        ((x, y) for y in range(0, 2 * d + 1, 2) for x in range(0, 2 * d + 1, 2)
         if _is_x_site(x, y, d)),
        key=lambda s: (s[1], s[0]),
    )
    z_sites = sorted(
        ((x, y) for y in range(0, 2 * d + 1, 2) for x in range(0, 2 * d + 1, 2)
         if _is_z_site(x, y, d)),
        key=lambda s: (s[1], s[0]),
    )
    assert len(x_sites) == len(z_sites) == (d * d - 1) // 2

    n_data = d * d
    stabilizers: list[Stabilizer] = []
    for sid, (x, y) in enumerate(x_sites):
        support, layers = _site_support(x, y, d, X_SCHEDULE)
        stabilizers.append(
            Stabilizer(sid, "X", x, y, support, layers, -1, len(support) == 2)
        )
    for i, (x, y) in enumerate(z_sites):
        sid = len(x_sites) + i
        support, layers = _site_support(x, y, d, Z_SCHEDULE)
        stabilizers.append(
            Stabilizer(sid, "Z", x, y, support, layers, -1, len(support) == 2)
        )

    for s in stabilizers:
        assert len(s.support) in (2, 4), f"stabilizer {s.id} has support {len(s.support)}"

    # CSS orthogonality: every X/Z support overlap must be even.
    for a in stabilizers:
        if a.kind != "X":
            continue
        for b in stabilizers:
            if b.kind != "Z":
                continue
            overlap = len(set(a.support) & set(b.support))
            assert overlap % 2 == 0, f"X{a.id} and Z{b.id} overlap on {overlap} qubits"

    _validate_schedule(stabilizers)

    if variant == "original":
        pairs: list[tuple[int, int]] = []
        n_ancilla = len(stabilizers)
        ancilla_of = {s.id: n_data + s.id for s in stabilizers}
    else:
        xs = [s for s in stabilizers if s.kind == "X"]
        zs = [s for s in stabilizers if s.kind == "Z"]
        pairs = _pair_ancillas(xs, zs)
        n_ancilla = len(pairs)
        ancilla_of = {}
        for bank_slot, (x_id, z_id) in enumerate(pairs):
            ancilla_of[x_id] = n_data + bank_slot
            ancilla_of[z_id] = n_data + bank_slot

    stabilizers = [
        Stabilizer(s.id, s.kind, s.x, s.y, s.support, s.layers, ancilla_of[s.id], s.boundary)
        for s in stabilizers
    ]

    logical_z = tuple(row * d for row in range(d))  # leftmost data column

    layout = Layout(
        distance=d,
        variant=variant,
        n_data=n_data,
        n_ancilla=n_ancilla,
        n_qubits=n_data + n_ancilla,
        data_coords=data_coords,
        stabilizers=tuple(stabilizers),
        pairs=tuple(pairs),
        logical_z=logical_z,
    )

    # The logical Z chain must commute with every X check (even overlap).
    chain = set(layout.logical_z)
    for s in layout.stabilizers:
        if s.kind == "X":
            assert len(chain & set(s.support)) % 2 == 0, f"logical Z clashes with X{s.id}"
    return layout


def logical_z_support(layout: Layout) -> tuple[int, ...]:
    """Data qubits whose final Z measurements form the logical observable.

    One straight boundary-to-boundary column of exactly d qubits (the
    leftmost), linking the two Z-type boundaries.
    """
    return layout.logical_z


def render_grid(layout: Layout) -> str:
    """ASCII picture of the lattice: D data, X/Z stabilizer sites."""
    d = layout.distance
    grid = [["." for _ in range(2 * d + 1)] for _ in range(2 * d + 1)]
    for (x, y) in layout.data_coords:
        grid[y][x] = "D"
    for s in layout.stabilizers:
        grid[s.y][s.x] = s.kind
    return "\n".join(" ".join(row) for row in grid)
