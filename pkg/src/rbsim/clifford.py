"""The 24-element single-qubit Clifford group and its microwave realization.

Each element carries three representations that must stay consistent:

* an axis decomposition (x, y, z rotation angles from {0, +-pi/2, pi},
  composed z-first), which defines the canonical matrix;
* a canonical 2x2 matrix, phase-fixed so the first nonzero top-row entry
  is real positive;
* a microwave pulse train of at most three equatorial pulses (areas are
  positive multiples of pi/2; -pi/2 rotations are issued as +3*pi/2).

Pulse areas are stored as integer multiples of pi/2 so area bookkeeping
(for example the 7*pi/4 group average) stays exact.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import su2

HALF_PI = 0.5 * np.pi
_S = 1.0 / np.sqrt(2.0)

# Indices of the 4 elements (1-based) that map |1> to |0> up to phase; used
# as recovery-gate candidates.  Filled in by _check_table at import of the
# tables, but kept as a constant to document the expectation.
TRANSFER_COUNT = 4


class GroupIntegrityError(RuntimeError):
    """Raised when the stored group data fails a consistency check."""


@dataclass(frozen=True)
class CliffordElement:
    """One group element.

    ``axis_halfpi`` holds the (x, y, z) rotation angles in units of pi/2
    (so entries are -1, 0, 1 or 2).  ``pulse_areas_halfpi`` holds the issued
    pulse areas in the same units, in application order, matching ``pulses``.
    """

    index: int
    axis_halfpi: tuple
    pulses: tuple
    pulse_areas_halfpi: tuple
    matrix: np.ndarray
    theta_total_halfpi: int

    @property
    def theta_total(self):
        return self.theta_total_halfpi * HALF_PI

    def pulse_product(self):
        """Unitary realized by the pulse train (identity for no pulses)."""
        if not self.pulses:
            return su2.ID2.copy()
        return su2.compose(
            [su2.detuned_pulse(p.phi_mw, p.area, 0.0) for p in self.pulses]
        )

    def axis_product(self):
        """Unitary from the axis decomposition, z applied first."""
        ax, ay, az = (a * HALF_PI for a in self.axis_halfpi)
        return su2.rotation("x", ax) @ su2.rotation("y", ay) @ su2.rotation("z", az)


# Table rows: (axis x, axis y, axis z) in pi/2 units, pulse train in
# application order as (axis, area) with area in pi/2 units, canonical matrix.
# Pulse trains realize the element with at most three equatorial pulses.
_X, _Y = "x", "y"
_TABLE = (
    ((0, 0, 0), (), ((1, 0), (0, 1))),
    ((0, 0, 1), ((_X, 3), (_Y, 1), (_X, 1)), ((1, 0), (0, 1j))),
    ((0, 0, 2), ((_Y, 2), (_X, 2)), ((1, 0), (0, -1))),
    ((0, 0, -1), ((_X, 3), (_Y, 3), (_X, 1)), ((1, 0), (0, -1j))),
    ((0, 2, 0), ((_Y, 2),), ((0, 1), (-1, 0))),
    ((0, 2, 1), ((_X, 1), (_Y, 1), (_X, 1)), ((0, 1), (1j, 0))),
    ((2, 0, 0), ((_X, 2),), ((0, 1), (1, 0))),
    ((2, 0, 1), ((_X, 1), (_Y, 3), (_X, 1)), ((0, 1), (-1j, 0))),
    ((2, 1, 0), ((_Y, 1), (_X, 2)), ((_S, _S), (_S, -_S))),
    ((0, -1, 0), ((_Y, 3),), ((_S, _S), (-_S, _S))),
    ((1, 0, 1), ((_X, 1), (_Y, 3)), ((_S, _S), (-1j * _S, 1j * _S))),
    ((1, 2, 1), ((_X, 3), (_Y, 3)), ((_S, _S), (1j * _S, -1j * _S))),
    ((2, -1, 0), ((_Y, 3), (_X, 2)), ((_S, -_S), (-_S, -_S))),
    ((-1, 0, 1), ((_X, 3), (_Y, 1)), ((_S, -_S), (1j * _S, 1j * _S))),
    ((0, 1, 0), ((_Y, 1),), ((_S, -_S), (_S, _S))),
    ((-1, 2, 1), ((_X, 1), (_Y, 1)), ((_S, -_S), (-1j * _S, -1j * _S))),
    ((-1, -1, 0), ((_Y, 3), (_X, 3)), ((_S, 1j * _S), (-_S, 1j * _S))),
    ((-1, 1, 0), ((_Y, 1), (_X, 3)), ((_S, 1j * _S), (_S, -1j * _S))),
    ((-1, 2, 0), ((_Y, 2), (_X, 3)), ((_S, 1j * _S), (-1j * _S, -_S))),
    ((-1, 0, 0), ((_X, 3),), ((_S, 1j * _S), (1j * _S, _S))),
    ((1, -1, 0), ((_Y, 3), (_X, 1)), ((_S, -1j * _S), (-_S, -1j * _S))),
    ((1, 0, 0), ((_X, 1),), ((_S, -1j * _S), (-1j * _S, _S))),
    ((1, 2, 0), ((_Y, 2), (_X, 1)), ((_S, -1j * _S), (1j * _S, -_S))),
    ((1, 1, 0), ((_Y, 1), (_X, 1)), ((_S, -1j * _S), (_S, 1j * _S))),
)

_PHI = {"x": 0.0, "y": HALF_PI}


def _build_element(index, row):
    axis, pulse_rows, matrix_rows = row
    pulses = tuple(
        su2.PulseSpec(phi_mw=_PHI[ax], area=n * HALF_PI) for ax, n in pulse_rows
    )
    areas = tuple(n for _, n in pulse_rows)
    matrix = np.array(matrix_rows, dtype=complex)
    matrix.setflags(write=False)
    return CliffordElement(
        index=index,
        axis_halfpi=axis,
        pulses=pulses,
        pulse_areas_halfpi=areas,
        matrix=matrix,
        theta_total_halfpi=sum(areas),
    )


@lru_cache(maxsize=1)
def load_group():
    """The 24 elements, 1-indexed by convention (element i at position i-1)."""
    return tuple(_build_element(i + 1, row) for i, row in enumerate(_TABLE))


def average_pulse_area(group=None, short_inverses=False):
    """Mean microwave pulse area per element, in radians.

    With ``short_inverses`` every 3*pi/2 pulse is counted as the equivalent
    -pi/2 rotation of area pi/2 instead.  The stock table averages exactly
    7*pi/4; the shortened count gives 13*pi/12 per element.
    """
    return float(average_pulse_area_halfpi(group, short_inverses)) * HALF_PI


def average_pulse_area_halfpi(group=None, short_inverses=False):
    """Exact group-average pulse area as a Fraction, in units of pi/2."""
    group = group or load_group()
    total = 0
    for el in group:
        for n in el.pulse_areas_halfpi:
            total += 1 if (short_inverses and n == 3) else n
    return Fraction(total, len(group))


@dataclass(frozen=True)
class GroupTables:
    """Integer multiplication/inverse/recovery tables over 1-based indices."""

    product: np.ndarray  # (25, 25), entry [i, j] = index of U_i U_j
    inverse: np.ndarray  # (25,)
    recovery: np.ndarray  # (25,), best transfer gate after accumulated index k


def _match_index(u, group, tol=su2.PHASE_TOL):
    hits = [el.index for el in group if su2.phase_equivalent(u, el.matrix, tol)]
    if len(hits) != 1:
        raise GroupIntegrityError(
            f"product matched {len(hits)} elements (expected exactly 1): {hits}"
        )
    return hits[0]


@lru_cache(maxsize=1)
def build_tables():
    """Build and cache the integer group tables from the canonical matrices."""
    group = load_group()
    product = np.zeros((25, 25), dtype=np.int64)
    for a in group:
        for b in group:
            product[a.index, b.index] = _match_index(a.matrix @ b.matrix, group)

    inverse = np.zeros(25, dtype=np.int64)
    for a in group:
        hits = [b.index for b in group if product[a.index, b.index] == 1]
        if len(hits) != 1:
            raise GroupIntegrityError(f"element {a.index} has {len(hits)} inverses")
        inverse[a.index] = hits[0]

    recovery = np.zeros(25, dtype=np.int64)
    for k in group:
        recovery[k.index] = _recovery_by_search(k.matrix, group)
    return GroupTables(product=product, inverse=inverse, recovery=recovery)


def multiply(i, j):
    """Index of U_i @ U_j, i.e. element j applied first."""
    tables = build_tables()
    if not (1 <= i <= 24 and 1 <= j <= 24):
        raise ValueError(f"element indices must lie in 1..24, got ({i}, {j})")
    return int(tables.product[i, j])


def inverse_index(i):
    """Index of the group inverse of element i."""
    tables = build_tables()
    if not 1 <= i <= 24:
        raise ValueError(f"element index must lie in 1..24, got {i}")
    return int(tables.inverse[i])


def product_index(indices):
    """Fold a gate-index sequence (first applied first) through the table."""
    tables = build_tables()
    acc = 1
    for i in indices:
        acc = int(tables.product[i, acc])
    return acc


def _recovery_by_search(accumulated, group):
    candidates = []
    for el in group:
        amp = (el.matrix @ accumulated)[0, 1]
        if (amp * amp.conjugate()).real > 1.0 - 1e-9:
            candidates.append(el)
    if not candidates:
        raise GroupIntegrityError("no element transfers the accumulated state to |0>")
    candidates.sort(key=lambda el: (el.theta_total_halfpi, el.index))
    return candidates[0].index


def recovery_gate(accumulated):
    """Index of the cheapest gate returning ``accumulated``|1> to |0>.

    Among the elements R with |<0| U_R * accumulated |1>|^2 > 1 - 1e-9
    (exactly four exist for any group element) the one with the smallest
    total pulse area wins, with the lower index breaking ties.
    """
    accumulated = su2.validate_unitary(accumulated)
    return _recovery_by_search(accumulated, load_group())


def recovery_index(accumulated_index):
    """Table-driven recovery lookup for an accumulated group element."""
    tables = build_tables()
    if not 1 <= accumulated_index <= 24:
        raise ValueError(f"element index must lie in 1..24, got {accumulated_index}")
    return int(tables.recovery[accumulated_index])


@dataclass(frozen=True)
class GroupReport:
    """Outcome of the full self-check; empty failure lists mean a clean pass."""

    closure_checked: int
    closure_failures: tuple
    inverse_failures: tuple
    pulse_failures: tuple
    axis_failures: tuple
    average_area_halfpi: Fraction
    average_area_short_halfpi: Fraction

    @property
    def passed(self):
        return not (
            self.closure_failures
            or self.inverse_failures
            or self.pulse_failures
            or self.axis_failures
        )


def verify_group(group=None, tol=1e-9):
    """Check closure, inverses, and both matrix reconstructions for each element."""
    group = group or load_group()
    closure_failures = []
    checked = 0
    for a in group:
        for b in group:
            checked += 1
            hits = [
                el.index
                for el in group
                if su2.phase_equivalent(a.matrix @ b.matrix, el.matrix, tol)
            ]
            if len(hits) != 1:
                closure_failures.append((a.index, b.index, tuple(hits)))

    inverse_failures = []
    for a in group:
        hits = [
            b.index
            for b in group
            if su2.phase_equivalent(a.matrix @ b.matrix, su2.ID2, tol)
        ]
        if len(hits) != 1:
            inverse_failures.append((a.index, tuple(hits)))

    pulse_failures = []
    axis_failures = []
    for el in group:
        if not su2.phase_equivalent(el.pulse_product(), el.matrix, tol):
            pulse_failures.append(el.index)
        if not su2.phase_equivalent(el.axis_product(), el.matrix, tol):
            axis_failures.append(el.index)

    return GroupReport(
        closure_checked=checked,
        closure_failures=tuple(closure_failures),
        inverse_failures=tuple(inverse_failures),
        pulse_failures=tuple(pulse_failures),
        axis_failures=tuple(axis_failures),
        average_area_halfpi=average_pulse_area_halfpi(group),
        average_area_short_halfpi=average_pulse_area_halfpi(group, True),
    )


def group_to_json(group=None, report=None):
    """JSON-ready dict with every element and the verification summary."""
    group = group or load_group()
    report = report or verify_group(group)
    elements = []
    for el in group:
        elements.append(
            {
                "index": el.index,
                "axis_halfpi": list(el.axis_halfpi),
                "pulses": [
                    {"axis": "x" if p.phi_mw == 0.0 else "y", "area_halfpi": n}
                    for p, n in zip(el.pulses, el.pulse_areas_halfpi)
                ],
                "theta_total_halfpi": el.theta_total_halfpi,
                "matrix": [
                    [[float(z.real), float(z.imag)] for z in row] for row in el.matrix
                ],
            }
        )
    return {
        "elements": elements,
        "checks": {
            "closure_checked": report.closure_checked,
            "closure_failures": len(report.closure_failures),
            "inverse_failures": len(report.inverse_failures),
            "pulse_failures": len(report.pulse_failures),
            "axis_failures": len(report.axis_failures),
            "passed": report.passed,
        },
        "average_area_over_pi": float(report.average_area_halfpi / 2),
        "average_area_short_over_pi": float(report.average_area_short_halfpi / 2),
    }


def dump_group_json(path, group=None):
    data = group_to_json(group)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
