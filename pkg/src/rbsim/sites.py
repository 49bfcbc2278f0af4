"""Tweezer-array geometry, Stark-beam addressing, and crosstalk analysis.

A rectangular array of trapped qubits shares one global microwave drive,
detuned by delta from the qubit transition.  A focused beam Stark-shifts a
chosen site back into resonance; every other site sees the same pulses at
an effective detuning set by how much beam intensity leaks onto it.  This
module computes those per-site detunings, the resulting spectator
(crosstalk) errors, and the full site-selected benchmarking experiment
over the array, plus stochastic loading and fluorescence readout
statistics.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import clifford, rb, su2

TWO_PI = 2.0 * math.pi

# Stream tags 1-3 are taken by the benchmarking engine; these continue the
# same namespace.  Beam jitter is common mode (one pointing error per shot
# moves the beam for every site), so it gets a site-independent stream.
STREAM_BEAM = 4
STREAM_LOAD = 5

ROLES = ("target", "nn", "far")


@dataclass(frozen=True)
class ArrayGeometry:
    """Rectangular site grid, row-major indexed from the upper-left corner."""

    rows: int = 7
    cols: int = 7
    pitch: float = 3.8e-6

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(
                f"grid must have at least one row and column, got "
                f"{self.rows}x{self.cols}"
            )
        if not (math.isfinite(self.pitch) and self.pitch > 0.0):
            raise ValueError(f"pitch must be positive, got {self.pitch}")

    @property
    def n_sites(self):
        return self.rows * self.cols

    def site_index(self, row, col):
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise ValueError(f"({row}, {col}) outside {self.rows}x{self.cols} grid")
        return row * self.cols + col

    def site_rowcol(self, site):
        if not 0 <= site < self.n_sites:
            raise ValueError(f"site {site} outside 0..{self.n_sites - 1}")
        return divmod(site, self.cols)

    def position(self, site):
        """(x, y) in meters; x runs along columns, y along rows."""
        row, col = self.site_rowcol(site)
        return (col * self.pitch, row * self.pitch)

    def positions(self):
        return np.array([self.position(k) for k in range(self.n_sites)])

    def orthogonal_neighbors(self, site):
        """The up-to-four sites one pitch away along x or y."""
        row, col = self.site_rowcol(site)
        out = []
        for r, c in ((row - 1, col), (row + 1, col), (row, col - 1), (row, col + 1)):
            if 0 <= r < self.rows and 0 <= c < self.cols:
                out.append(r * self.cols + c)
        return tuple(out)


@dataclass(frozen=True)
class StarkBeam:
    """Focused beam that shifts one site into resonance with the drive.

    ``center`` is the pointing in meters; None means "wherever the target
    is", which is the calibrated experiment.  ``peak_shift`` is the
    differential light shift at the beam center in rad/s; None means
    "calibrated equal to the drive detuning", the resonance condition.
    The jitter fields are per-shot standard deviations (pointing in
    meters, intensity relative to 1) consumed by site_selected_rb.
    """

    waist_x: float = 3.2e-6
    waist_y: float = 2.7e-6
    center: tuple = None
    peak_shift: float = None
    pointing_jitter: float = 0.0
    intensity_jitter: float = 0.0

    def __post_init__(self):
        if not (self.waist_x > 0.0 and self.waist_y > 0.0):
            raise ValueError(
                f"waists must be positive, got ({self.waist_x}, {self.waist_y})"
            )
        if self.center is not None and len(self.center) != 2:
            raise ValueError(f"center must be an (x, y) pair, got {self.center!r}")
        if self.pointing_jitter < 0.0 or self.intensity_jitter < 0.0:
            raise ValueError("jitter standard deviations must be >= 0")

    @property
    def jittered(self):
        return self.pointing_jitter > 0.0 or self.intensity_jitter > 0.0


def relative_intensity(beam, position, center=None):
    """Gaussian beam intensity at ``position``, 1 at the beam center.

    exp(-2 (dx^2/w_x^2 + dy^2/w_y^2)) with the 1/e^2 waists of ``beam``.
    ``center`` overrides the beam's own pointing; an unset pointing means
    the origin.
    """
    if center is None:
        center = beam.center if beam.center is not None else (0.0, 0.0)
    dx = (position[0] - center[0]) / beam.waist_x
    dy = (position[1] - center[1]) / beam.waist_y
    return math.exp(-2.0 * (dx * dx + dy * dy))


@dataclass(frozen=True)
class DriveParams:
    """Global microwave drive settings for site-selected (addressed) gates."""

    delta: float = TWO_PI * 33e3
    omega: float = TWO_PI * 8.5e3

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0.0):
            raise ValueError(f"Rabi frequency must be positive, got {self.omega}")
        if not math.isfinite(self.delta):
            raise ValueError(f"detuning must be finite, got {self.delta}")

    @property
    def ratio(self):
        return self.delta / self.omega


@dataclass(frozen=True)
class SiteDriveMap:
    """Per-site effective detuning-to-Rabi ratios for one addressing setup."""

    target: int
    ratios: tuple

    def ratio(self, site):
        return self.ratios[site]


def effective_detunings(
    geometry, beam, drive, target, pointing_offset=(0.0, 0.0), intensity_scale=1.0
):
    """Effective detuning ratio r_k = delta_k / Omega at every site.

    Site k keeps the raw drive detuning minus its share of the light shift:
    delta_k = delta - scale * peak * I_k, so the targeted site lands exactly
    on resonance when the beam is centered on it with the calibrated peak.
    ``pointing_offset`` displaces the beam center and ``intensity_scale``
    scales the peak shift; both exist so shot-to-shot jitter can reuse the
    same arithmetic.
    """
    if not 0 <= target < geometry.n_sites:
        raise ValueError(f"target {target} outside 0..{geometry.n_sites - 1}")
    peak = drive.delta if beam.peak_shift is None else beam.peak_shift
    base = beam.center if beam.center is not None else geometry.position(target)
    center = (base[0] + pointing_offset[0], base[1] + pointing_offset[1])
    ratios = []
    for k in range(geometry.n_sites):
        leak = relative_intensity(beam, geometry.position(k), center)
        ratios.append((drive.delta - intensity_scale * peak * leak) / drive.omega)
    return SiteDriveMap(target=target, ratios=tuple(ratios))


def _pulses_of(gate):
    if isinstance(gate, clifford.CliffordElement):
        return gate.pulses
    if isinstance(gate, su2.PulseSpec):
        return (gate,)
    return tuple(gate)


def spectator_unitary(gate, ratio):
    """Ordered product of the gate's pulses at detuning ratio ``ratio``.

    Composite gates share one phase-coherent drive frame with zero gap
    between pulses, so a spectator's evolution is just the product of the
    individual detuned pulses.  Accepts a CliffordElement, a single
    PulseSpec, or any iterable of PulseSpec; an empty train is the
    identity.
    """
    pulses = _pulses_of(gate)
    if not pulses:
        return su2.ID2.copy()
    return su2.compose([su2.detuned_pulse(p.phi_mw, p.area, ratio) for p in pulses])


def crosstalk_error(gate, ratio):
    """Bloch-averaged infidelity of a spectator during ``gate``.

    For a single pulse this reduces to (2/3) sin^2(theta sqrt(1+r^2)/2).
    """
    return 1.0 - su2.bloch_avg_fidelity(spectator_unitary(gate, ratio))


def spinflip_error(gate, ratio):
    """Probability that ``gate`` flips a spectator prepared in |1> to |0>."""
    u = spectator_unitary(gate, ratio)
    return float(abs(u[0, 1]) ** 2)


def optimal_detuning(theta_r, n):
    """Detuning ratio at which a theta_r pulse closes n full spectator loops.

    sqrt(n^2 16 pi^2 / theta_r^2 - 1): the effective area theta_r
    sqrt(1+r^2) equals n * 4 pi, so the spectator unitary is exactly the
    identity.  Requires n * 4 pi >= theta_r, otherwise no real solution
    exists.
    """
    if not theta_r > 0.0:
        raise ValueError(f"pulse area must be positive, got {theta_r}")
    if n != int(n) or n < 1:
        raise ValueError(f"loop count must be a positive integer, got {n}")
    radicand = (n * 4.0 * math.pi / theta_r) ** 2 - 1.0
    if radicand < 0.0:
        raise ValueError(
            f"{n} loops need area <= {n * 4.0 * math.pi:.6g}, got {theta_r:.6g}"
        )
    return math.sqrt(radicand)


def default_scan_gates():
    """The four addressed gates usually scanned: x and z by pi/2 and pi.

    The z rotations use their equatorial pulse decompositions (three and
    two pulses respectively), so the scan probes exactly what a spectator
    experiences.
    """
    by_axis = {el.axis_halfpi: el for el in clifford.load_group()}
    return (
        ("Rx(pi/2)", by_axis[(1, 0, 0)].pulses),
        ("Rx(pi)", by_axis[(2, 0, 0)].pulses),
        ("Rz(pi/2)", by_axis[(0, 0, 1)].pulses),
        ("Rz(pi)", by_axis[(0, 0, 2)].pulses),
    )


def detuning_scan(gates, r_range=(0.0, 8.0), steps=801):
    """Dense (r, gate, E_xt, spinflip) table over ``r_range``.

    ``gates`` is a sequence of (label, pulses) pairs; rows are emitted
    detuning-major in the given gate order.
    """
    if steps < 2:
        raise ValueError(f"need at least 2 scan steps, got {steps}")
    lo, hi = float(r_range[0]), float(r_range[1])
    if not hi > lo:
        raise ValueError(f"scan range must increase, got ({lo}, {hi})")
    gates = list(gates)
    rows = []
    for r in np.linspace(lo, hi, steps):
        r = float(r)
        for label, gate in gates:
            rows.append(
                (r, label, crosstalk_error(gate, r), spinflip_error(gate, r))
            )
    return rows


def scan_to_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "gate", "E_xt", "spinflip"])
        for r, label, ext, flip in rows:
            w.writerow([repr(r), label, repr(ext), repr(flip)])


@dataclass(frozen=True)
class SiteFit:
    """Fitted decay of one site during a site-selected run."""

    site: int
    row: int
    col: int
    role: str
    r_ratio: float
    fit: object  # DecayFit

    @property
    def figure(self):
        """F^2 for the target; per-gate crosstalk error d/2 for spectators."""
        if self.role == "target":
            return self.fit.f_squared
        return 0.5 * self.fit.d

    @property
    def figure_stderr(self):
        return 0.5 * self.fit.stderr_d


@dataclass(frozen=True)
class ArrayRBResult:
    """Per-site fits plus roll-up statistics for one site-selected run."""

    target: int
    seed: int
    sites: tuple
    skipped: tuple

    def by_role(self, role):
        return tuple(s for s in self.sites if s.role == role)

    @property
    def f2_target(self):
        hits = self.by_role("target")
        return hits[0].fit.f_squared if hits else None

    def mean_crosstalk(self, roles=("nn", "far")):
        vals = [s.figure for s in self.sites if s.role in roles]
        return float(np.mean(vals)) if vals else math.nan

    def summary(self):
        return {
            "target": self.target,
            "target_skipped": not self.by_role("target"),
            "f2_target": self.f2_target,
            "mean_ext": self.mean_crosstalk(("nn", "far")),
            "mean_ext_nn": self.mean_crosstalk(("nn",)),
            "mean_ext_far": self.mean_crosstalk(("far",)),
            "n_fitted": len(self.sites),
            "skipped": list(self.skipped),
        }

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["site", "row", "col", "role", "r_ratio", "d_if", "d",
                 "F2_or_Ext", "stderr"]
            )
            for s in self.sites:
                w.writerow(
                    [s.site, s.row, s.col, s.role, repr(s.r_ratio),
                     repr(s.fit.d_if), repr(s.fit.d), repr(s.figure),
                     repr(s.figure_stderr)]
                )


def _jittered_ratios(geometry, beam, drive, site, base_center, offsets, scales):
    # Same arithmetic as effective_detunings, vectorized over shots.
    peak = drive.delta if beam.peak_shift is None else beam.peak_shift
    x, y = geometry.position(site)
    dx = (x - base_center[0] - offsets[:, 0]) / beam.waist_x
    dy = (y - base_center[1] - offsets[:, 1]) / beam.waist_y
    leak = np.exp(-2.0 * (dx * dx + dy * dy))
    return (drive.delta - scales * peak * leak) / drive.omega


def site_selected_rb(
    geometry,
    beam,
    drive,
    params,
    lengths,
    n_sequences,
    shots,
    seed,
    target,
    occupancy=None,
    workers=1,
    shared_prefix=True,
    kernel=None,
):
    """Benchmark every occupied site while the beam addresses ``target``.

    One set of random sequences drives the whole array.  The target evolves
    on resonance and is fitted with the standard decay (sign +1); every
    spectator starts in |1>, sees each pulse at its own detuning ratio, and
    is fitted sign-inverted, reporting the per-gate crosstalk error d/2.
    ``params.omega`` is overridden by the drive's Rabi frequency so pulse
    durations and detuning ratios stay mutually consistent.

    Beam jitter, when enabled, draws one pointing offset and one intensity
    scale per shot, shared by all sites of that shot (the beam moves as a
    whole).  ``occupancy`` masks out empty sites; those are skipped and
    listed in the result.
    """
    if occupancy is not None:
        occupancy = tuple(bool(x) for x in occupancy)
        if len(occupancy) != geometry.n_sites:
            raise ValueError(
                f"occupancy mask has {len(occupancy)} entries for "
                f"{geometry.n_sites} sites"
            )
    run_params = replace(params, omega=drive.omega)
    dmap = effective_detunings(geometry, beam, drive, target)
    base_center = (
        beam.center if beam.center is not None else geometry.position(target)
    )
    seqs = rb.generate_sequences(lengths, n_sequences, seed, shared_prefix)
    group = clifford.load_group()
    programs = {(s.seq_id, s.length): rb.build_program(s, group) for s in seqs}
    nn = set(geometry.orthogonal_neighbors(target))

    jitter = {}
    if beam.jittered:
        for s in seqs:
            jrng = rb.stream(seed, STREAM_BEAM, s.seq_id, s.length)
            offsets = jrng.normal(0.0, beam.pointing_jitter, size=(shots, 2))
            scales = np.clip(
                jrng.normal(1.0, beam.intensity_jitter, size=shots), 0.0, None
            )
            jitter[(s.seq_id, s.length)] = (offsets, scales)

    occupied = [
        k for k in range(geometry.n_sites) if occupancy is None or occupancy[k]
    ]
    skipped = tuple(
        k for k in range(geometry.n_sites) if occupancy is not None and not occupancy[k]
    )

    def task(pair):
        site, seq = pair
        rng = rb.stream(seed, rb.STREAM_SITE, site, seq.seq_id, seq.length)
        prog = programs[(seq.seq_id, seq.length)]
        if beam.jittered:
            offsets, scales = jitter[(seq.seq_id, seq.length)]
            r_shots = _jittered_ratios(
                geometry, beam, drive, site, base_center, offsets, scales
            )
            return rb.simulate_sequence(
                seq, run_params, shots, rng, r_jitter=r_shots,
                kernel=kernel, group=group, program=prog,
            )
        return rb.simulate_sequence(
            seq, run_params, shots, rng,
            site_detuning_ratio=dmap.ratios[site],
            kernel=kernel, group=group, program=prog,
        )

    pairs = [(site, seq) for site in occupied for seq in seqs]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(task, pairs))
    else:
        counts = [task(p) for p in pairs]

    digest = rb.params_digest(run_params)
    fits = []
    per_seq = len(seqs)
    for i, site in enumerate(occupied):
        rows = tuple(
            (seq.seq_id, seq.length, shots, counts[i * per_seq + j])
            for j, seq in enumerate(seqs)
        )
        ds = rb.RBDataset(rows=rows, seed=seed, params_digest=digest)
        role = "target" if site == target else ("nn" if site in nn else "far")
        fit = rb.fit_decay(ds, sign=1 if role == "target" else -1)
        row, col = geometry.site_rowcol(site)
        fits.append(
            SiteFit(
                site=site, row=row, col=col, role=role,
                r_ratio=dmap.ratios[site], fit=fit,
            )
        )
    return ArrayRBResult(
        target=target, seed=seed, sites=tuple(fits), skipped=skipped
    )


@dataclass(frozen=True)
class LoadingResult:
    """Occupancy masks for repeated stochastic loads of one array."""

    masks: np.ndarray
    counts: np.ndarray
    histogram: np.ndarray

    @property
    def mean_occupied(self):
        return float(self.counts.mean())

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["occupied_count", "frequency"])
            for n, freq in enumerate(self.histogram):
                w.writerow([n, int(freq)])


def load_array(geometry, p_fill, runs, rng):
    """Independent per-site Bernoulli loading, repeated ``runs`` times."""
    if not 0.0 <= p_fill <= 1.0:
        raise ValueError(f"fill probability must lie in [0, 1], got {p_fill}")
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    masks = rng.random((runs, geometry.n_sites)) < p_fill
    counts = masks.sum(axis=1).astype(np.int64)
    histogram = np.bincount(counts, minlength=geometry.n_sites + 1)
    return LoadingResult(masks=masks, counts=counts, histogram=histogram)


@dataclass(frozen=True)
class ReadoutModel:
    """Two-Gaussian photoelectron-count model for state discrimination.

    The defaults put the midpoint threshold 2.5 sigma from either mean,
    for an analytic overlap of 4.07e-4.
    """

    dark_mean: float = 10.0
    bright_mean: float = 40.0
    sigma: float = 4.24

    def __post_init__(self):
        for name in ("dark_mean", "bright_mean", "sigma"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.dark_mean > self.bright_mean:
            raise ValueError(
                f"dark mean {self.dark_mean} exceeds bright mean {self.bright_mean}"
            )
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")

    @property
    def threshold(self):
        return 0.5 * (self.dark_mean + self.bright_mean)

    def analytic_overlap(self):
        """Integral of min(dark pdf, bright pdf): erfc(sep / (2 sigma sqrt 2))."""
        if self.bright_mean == self.dark_mean:
            return 1.0
        if self.sigma == 0.0:
            return 0.0
        sep = self.bright_mean - self.dark_mean
        return math.erfc(sep / (2.0 * self.sigma * math.sqrt(2.0)))


def readout_counts(bright, model, rng):
    """Sample photoelectron counts (clamped at 0) and threshold-classify.

    Scalar in, scalar out; arrays broadcast per shot.
    """
    arr = np.atleast_1d(np.asarray(bright, dtype=bool))
    means = np.where(arr, model.bright_mean, model.dark_mean)
    counts = np.maximum(rng.normal(means, model.sigma), 0.0)
    classified = counts >= model.threshold
    if np.ndim(bright) == 0:
        return float(counts[0]), bool(classified[0])
    return counts, classified
