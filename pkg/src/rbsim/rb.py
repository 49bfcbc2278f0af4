"""Randomized-benchmarking engine: sequences, Monte Carlo runs, datasets.

A benchmarking run draws master sequences of uniformly random Clifford
indices, truncates each at the requested lengths, closes every truncation
with its recovery transfer, and Monte Carlo simulates the pulse-level
physics shot by shot.  All randomness flows through counter-based Philox
streams keyed by (purpose, sequence, length), so a run is reproducible
bit for bit regardless of how many workers execute it.
"""

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels, clifford
from .fitting import binomial_sigma, fit_survival
from .noise import sample_quasistatic_detuning

# Stream tags: one namespace per purpose so adding draws to one phase never
# shifts another phase's randomness.
STREAM_SEQGEN = 1
STREAM_RB_SHOTS = 2
STREAM_SITE = 3


def stream(seed, *key):
    """Philox generator for one (seed, purpose key) combination."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key)))
    )


@dataclass(frozen=True)
class RBSequence:
    """One truncated random Clifford sequence plus its recovery transfer."""

    seed: int
    seq_id: int
    length: int
    gate_indices: tuple
    recovery_index: int

    def __post_init__(self):
        if self.length < 1 or len(self.gate_indices) != self.length:
            raise ValueError("length must match gate_indices and be >= 1")
        expected = clifford.recovery_index(clifford.product_index(self.gate_indices))
        if self.recovery_index != expected:
            raise ValueError(
                f"recovery index {self.recovery_index} does not close the "
                f"sequence (expected {expected})"
            )


def generate_sequences(lengths, n_sequences, seed, shared_prefix=True):
    """All (sequence, length) records for one run, reproducible from seed.

    With ``shared_prefix`` each master sequence is drawn once at the longest
    length and truncated, so longer truncations extend shorter ones; with
    ``shared_prefix=False`` every (sequence, length) pair draws independently.
    """
    lengths = sorted(set(int(x) for x in lengths))
    if not lengths:
        raise ValueError("lengths must be nonempty")
    if lengths[0] < 1:
        raise ValueError(f"sequence lengths must be >= 1, got {lengths[0]}")
    if n_sequences < 1:
        raise ValueError(f"n_sequences must be >= 1, got {n_sequences}")

    out = []
    max_len = lengths[-1]
    for i in range(n_sequences):
        if shared_prefix:
            master = stream(seed, STREAM_SEQGEN, i).integers(1, 25, size=max_len)
            for ell in lengths:
                gates = tuple(int(g) for g in master[:ell])
                out.append(_close(seed, i, ell, gates))
        else:
            for ell in lengths:
                draws = stream(seed, STREAM_SEQGEN, i, ell).integers(1, 25, size=ell)
                out.append(_close(seed, i, ell, tuple(int(g) for g in draws)))
    return out


def _close(seed, seq_id, length, gates):
    rec = clifford.recovery_index(clifford.product_index(gates))
    return RBSequence(
        seed=seed,
        seq_id=seq_id,
        length=length,
        gate_indices=gates,
        recovery_index=rec,
    )


@dataclass(frozen=True)
class PulseProgram:
    """Flat per-pulse arrays for one sequence, recovery included."""

    cphi: np.ndarray
    sphi: np.ndarray
    theta: np.ndarray
    gate_start: np.ndarray
    gate_area: np.ndarray

    @property
    def n_pulses(self):
        return self.theta.shape[0]

    @property
    def n_gates(self):
        return self.gate_area.shape[0]

    @property
    def total_area(self):
        return float(self.theta.sum())


def build_program(seq, group=None):
    group = group if group is not None else clifford.load_group()
    indices = list(seq.gate_indices) + [seq.recovery_index]
    phis, thetas, starts, areas = [], [], [0], []
    for idx in indices:
        el = group[idx - 1]
        for p in el.pulses:
            phis.append(p.phi_mw)
            thetas.append(p.area)
        starts.append(len(thetas))
        areas.append(el.theta_total)
    phis = np.asarray(phis, dtype=float)
    return PulseProgram(
        cphi=np.cos(phis),
        sphi=np.sin(phis),
        theta=np.asarray(thetas, dtype=float),
        gate_start=np.asarray(starts, dtype=np.int64),
        gate_area=np.asarray(areas, dtype=float),
    )


def exact_unitary(seq, group=None):
    """Noise-free product of every pulse in the sequence plus recovery."""
    group = group if group is not None else clifford.load_group()
    total = np.eye(2, dtype=complex)
    for idx in list(seq.gate_indices) + [seq.recovery_index]:
        total = group[idx - 1].pulse_product() @ total
    return total


def exact_survival_probability(seq, group=None):
    """|<0|U|1>|^2 for the noise-free sequence; 1 when recovery closes it."""
    u = exact_unitary(seq, group)
    return float(abs(u[0, 1]) ** 2)


def simulate_sequence(
    seq,
    params,
    shots,
    rng,
    site_detuning_ratio=0.0,
    r_jitter=None,
    kernel=None,
    group=None,
    program=None,
):
    """Monte Carlo one sequence; returns the bright-detection count.

    Per shot: one quasi-static detuning draw, per-pulse (or per-shot) timing
    jitter, preparation flip, density-matrix pulse evolution, optional
    depolarization per sequence Clifford, and a single projective sample
    classified through the push-out/readout error model.

    ``site_detuning_ratio`` adds a constant axis tilt (addressing crosstalk);
    ``r_jitter`` optionally adds a per-shot tilt array for beam jitter drawn
    by the caller.  ``program`` accepts a prebuilt pulse program for callers
    that replay one sequence many times.  The draw order below is frozen;
    changing it changes every published artifact.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    run_shots = (
        _kernels.run_shots if kernel is None else _kernels.get_kernel(kernel).run_shots
    )
    prog = program if program is not None else build_program(seq, group)
    mode = params.t2star_coupling

    # 1) quasi-static detuning, one value per shot
    shot_detuning = sample_quasistatic_detuning(rng, params.t2_star, size=shots)
    if np.isscalar(shot_detuning):
        shot_detuning = np.zeros(shots)
    # 2) pulse-area jitter
    f = params.timing_error_fraction
    if f > 0.0:
        if params.timing_correlation == "per_shot":
            timing = np.repeat(
                rng.uniform(-f, f, size=(shots, 1)), prog.n_pulses, axis=1
            )
        else:
            timing = rng.uniform(-f, f, size=(shots, prog.n_pulses))
    else:
        timing = np.zeros((shots, prog.n_pulses))
    # 3) refreshed detuning draws for the Markovian dephasing modes
    pulse_time = prog.theta / params.omega
    use_phase = 0 if math.isinf(params.t2_star) else 1
    if mode == "per_pulse":
        draws = sample_quasistatic_detuning(
            rng, params.t2_star, size=(shots, prog.n_pulses)
        )
        phase = draws * pulse_time[None, :]
    elif mode == "per_gate":
        draws = sample_quasistatic_detuning(
            rng, params.t2_star, size=(shots, prog.n_gates)
        )
        phase = np.zeros((shots, prog.n_pulses))
        for g in range(prog.n_gates):
            if prog.gate_start[g + 1] > prog.gate_start[g]:
                last = prog.gate_start[g + 1] - 1
                phase[:, last] = draws[:, g] * (prog.gate_area[g] / params.omega)
    elif mode == "per_shot_phase":
        phase = shot_detuning[:, None] * pulse_time[None, :]
    else:  # per_shot_tilt
        phase = np.zeros((shots, prog.n_pulses))
        use_phase = 0
    # 4) preparation flip, 5) projective sample, 6) classification sample
    prep_flip = (rng.random(shots) < params.spam.prep_error).astype(np.uint8)
    u_proj = rng.random(shots)
    u_class = rng.random(shots)

    tilt = np.full(shots, params.static_detuning / params.omega + site_detuning_ratio)
    if mode == "per_shot_tilt":
        tilt = tilt + shot_detuning / params.omega
    if r_jitter is not None:
        jit = np.asarray(r_jitter, dtype=float)
        if jit.shape != (shots,):
            raise ValueError("r_jitter must have one entry per shot")
        tilt = tilt + jit

    if math.isinf(params.t1):
        gate_damp = np.zeros(prog.n_gates)
    else:
        gate_damp = 1.0 - np.exp(-prog.gate_area / params.omega / params.t1)

    return int(
        run_shots(
            prog.cphi,
            prog.sphi,
            prog.theta,
            prog.gate_start,
            gate_damp,
            np.ascontiguousarray(tilt),
            np.ascontiguousarray(timing),
            np.ascontiguousarray(phase),
            use_phase,
            params.depolarization,
            prep_flip,
            u_proj,
            u_class,
            params.spam.p_bright_given_zero,
            params.spam.p_bright_given_one,
        )
    )


def params_digest(params):
    """Stable fingerprint of a NoiseParams value for dataset metadata."""
    blob = json.dumps(asdict(params), sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RBDataset:
    """Survival counts per (sequence, length) plus run provenance."""

    rows: tuple  # of (seq_id, length, shots, survivors)
    seed: int
    params_digest: str

    def __post_init__(self):
        for seq_id, length, shots, survivors in self.rows:
            if not 0 <= survivors <= shots:
                raise ValueError(
                    f"survivors {survivors} outside [0, {shots}] in row "
                    f"({seq_id}, {length})"
                )

    def lengths(self):
        return np.array([r[1] for r in self.rows], dtype=float)

    def fractions(self):
        return np.array([r[3] / r[2] for r in self.rows], dtype=float)

    def shots(self):
        return np.array([r[2] for r in self.rows], dtype=float)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["seq_id", "length", "shots", "survivors"])
            for row in self.rows:
                w.writerow(row)

    @classmethod
    def from_csv(cls, path, seed=0, params_digest=""):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["seq_id", "length", "shots", "survivors"]:
                raise ValueError(f"unexpected dataset header: {header}")
            rows = tuple(tuple(int(x) for x in line) for line in reader if line)
        return cls(rows=rows, seed=seed, params_digest=params_digest)

    def to_json_dict(self):
        return {
            "metadata": {"seed": self.seed, "params_digest": self.params_digest},
            "rows": [
                {"seq_id": r[0], "length": r[1], "shots": r[2], "survivors": r[3]}
                for r in self.rows
            ],
        }


def run_rb(
    params,
    lengths,
    n_sequences,
    shots,
    seed,
    workers=1,
    shared_prefix=True,
    kernel=None,
    group=None,
):
    """Full benchmarking run; deterministic for fixed seed at any worker count."""
    group = group if group is not None else clifford.load_group()
    seqs = generate_sequences(lengths, n_sequences, seed, shared_prefix)

    def task(seq):
        rng = stream(seed, STREAM_RB_SHOTS, seq.seq_id, seq.length)
        return simulate_sequence(
            seq, params, shots, rng, kernel=kernel, group=group
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(task, seqs))
    else:
        counts = [task(s) for s in seqs]

    rows = tuple(
        (s.seq_id, s.length, shots, c) for s, c in zip(seqs, counts)
    )
    return RBDataset(rows=rows, seed=seed, params_digest=params_digest(params))


def fit_decay(dataset, sign=1):
    """Weighted decay fit of a dataset's survival fractions."""
    fr = dataset.fractions()
    return fit_survival(
        dataset.lengths(), fr, binomial_sigma(fr, dataset.shots()), sign=sign
    )
