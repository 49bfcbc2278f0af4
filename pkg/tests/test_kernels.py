"""Cross-checks between the compiled kernel, the numpy kernel, and a
straightforward dense-matrix reference implementation.

The kernels only report survivor counts, so the reference comparisons use a
deterministic projective grid: with u_proj = (k + 1/2)/N the count equals
round(N * p0) exactly, recovering the final |0> population to 1/(2N).
"""

import math

import numpy as np
import pytest

from rbsim import _kernels, clifford, rb, su2
from rbsim._kernels import pure

N_GRID = 200_001


def available():
    return _kernels.available_kernels()


def grid_run(kernel, prog, tilt, phase, use_phase, depol, timing_row=None):
    """Run one physics configuration over the projective grid; return p0."""
    n = N_GRID
    timing = np.zeros((n, prog.n_pulses))
    if timing_row is not None:
        timing[:] = timing_row
    ph = np.tile(phase, (n, 1))
    count = kernel.run_shots(
        prog.cphi,
        prog.sphi,
        prog.theta,
        prog.gate_start,
        np.zeros(prog.n_gates),
        np.full(n, tilt),
        timing,
        np.ascontiguousarray(ph),
        use_phase,
        depol,
        np.zeros(n, dtype=np.uint8),
        (np.arange(n) + 0.5) / n,
        np.zeros(n),  # u_class < 1 always: classification ideal
        1.0,
        0.0,
    )
    return count / n


def reference_p0(prog, tilt, phase, use_phase, depol, timing_row=None):
    """Dense-matrix evolution of the same program."""
    rho = su2.pure_density(su2.make_state(math.pi, 0.0))  # |1>
    n_gates = prog.n_gates
    for g in range(n_gates):
        for p in range(prog.gate_start[g], prog.gate_start[g + 1]):
            area = prog.theta[p]
            if timing_row is not None:
                area = area * (1.0 + timing_row[p])
            phi = math.atan2(prog.sphi[p], prog.cphi[p])
            rho = su2.evolve(rho, su2.detuned_pulse(phi, area, tilt))
            if use_phase and phase[p] != 0.0:
                rho = su2.evolve(rho, su2.rotation("z", phase[p]))
        if depol > 0.0 and g < n_gates - 1:
            rho = su2.depolarize(rho, depol)
    return float(rho[0, 0].real)


def make_program(seed=3, length=6):
    seq = rb.generate_sequences([length], 1, seed=seed)[0]
    return rb.build_program(seq)


class TestKernelAvailability:
    def test_compiled_kernel_present(self):
        assert "python" in available()
        assert "cython" in available(), "compiled kernel failed to build"

    def test_active_kernel_contract(self):
        assert _kernels.KERNEL_NAME in ("cython", "python")
        assert callable(_kernels.run_shots)


class TestAgainstDenseReference:
    @pytest.mark.parametrize("name", ["python", "cython"])
    def test_noiseless(self, name):
        prog = make_program()
        k = _kernels.get_kernel(name)
        p0 = grid_run(k, prog, 0.0, np.zeros(prog.n_pulses), 0, 0.0)
        assert p0 == pytest.approx(1.0, abs=1e-5)

    @pytest.mark.parametrize("name", ["python", "cython"])
    def test_tilted_pulses(self, name):
        prog = make_program(seed=5, length=4)
        want = reference_p0(prog, 0.3, np.zeros(prog.n_pulses), 0, 0.0)
        got = grid_run(
            _kernels.get_kernel(name), prog, 0.3, np.zeros(prog.n_pulses), 0, 0.0
        )
        assert got == pytest.approx(want, abs=1e-5)

    @pytest.mark.parametrize("name", ["python", "cython"])
    def test_phase_kicks(self, name):
        prog = make_program(seed=6, length=5)
        rng = np.random.default_rng(2)
        phase = rng.normal(0.0, 0.2, prog.n_pulses)
        want = reference_p0(prog, 0.0, phase, 1, 0.0)
        got = grid_run(_kernels.get_kernel(name), prog, 0.0, phase, 1, 0.0)
        assert got == pytest.approx(want, abs=1e-5)

    @pytest.mark.parametrize("name", ["python", "cython"])
    def test_depolarization_skips_recovery(self, name):
        prog = make_program(seed=7, length=3)
        want = reference_p0(prog, 0.1, np.zeros(prog.n_pulses), 0, 0.2)
        got = grid_run(
            _kernels.get_kernel(name), prog, 0.1, np.zeros(prog.n_pulses), 0, 0.2
        )
        assert got == pytest.approx(want, abs=1e-5)
        # Depolarizing the recovery too would shrink the polarization by a
        # further factor (1 - d); confirm the check can tell these apart.
        with_recovery_depol = 0.5 + (want - 0.5) * 0.8
        assert abs(want - with_recovery_depol) > 1e-3

    @pytest.mark.parametrize("name", ["python", "cython"])
    def test_timing_stretch(self, name):
        prog = make_program(seed=8, length=4)
        row = np.full(prog.n_pulses, 0.01)
        want = reference_p0(prog, 0.0, np.zeros(prog.n_pulses), 0, 0.0, row)
        got = grid_run(
            _kernels.get_kernel(name),
            prog,
            0.0,
            np.zeros(prog.n_pulses),
            0,
            0.0,
            row,
        )
        assert got == pytest.approx(want, abs=1e-5)


class TestKernelEquivalence:
    def test_identical_counts_full_noise_stack(self):
        from rbsim.noise import NoiseParams, SpamParams

        params = NoiseParams(
            omega=2.0 * math.pi * 4.74e3,
            spam=SpamParams(0.04, 0.01, 0.0004),
            depolarization=0.002,
        )
        a = rb.run_rb(params, [1, 10, 25], 3, 500, seed=77, kernel="python")
        b = rb.run_rb(params, [1, 10, 25], 3, 500, seed=77, kernel="cython")
        assert a.rows == b.rows

    def test_identical_counts_all_coupling_modes(self):
        import dataclasses

        from rbsim.noise import NoiseParams, SpamParams

        base = NoiseParams(
            omega=2.0 * math.pi * 4.74e3, spam=SpamParams(0.0, 0.0, 0.0)
        )
        for mode in ("per_pulse", "per_gate", "per_shot_phase", "per_shot_tilt"):
            params = dataclasses.replace(base, t2star_coupling=mode)
            a = rb.run_rb(params, [5, 20], 2, 400, seed=13, kernel="python")
            b = rb.run_rb(params, [5, 20], 2, 400, seed=13, kernel="cython")
            assert a.rows == b.rows, mode


class TestMeasurementModel:
    def test_classification_probabilities(self):
        # All population in |1>: bright only through the push-out error path.
        group = clifford.load_group()
        seq = rb.RBSequence(
            seed=0,
            seq_id=0,
            length=1,
            gate_indices=(1,),
            recovery_index=clifford.recovery_index(1),
        )
        prog = rb.build_program(seq, group)
        n = N_GRID
        eps_push, eps_ro = 0.3, 0.1
        p_b1 = eps_push * (1.0 - eps_ro / 2.0) + (1.0 - eps_push) * (eps_ro / 2.0)
        count = pure.run_shots(
            prog.cphi,
            prog.sphi,
            np.zeros_like(prog.theta),  # freeze every pulse: stay in |1>
            prog.gate_start,
            np.zeros(prog.n_gates),
            np.zeros(n),
            np.zeros((n, prog.n_pulses)),
            np.zeros((n, prog.n_pulses)),
            0,
            0.0,
            np.zeros(n, dtype=np.uint8),
            np.full(n, 0.5),  # p0 = 0 so outcome is always |1>
            (np.arange(n) + 0.5) / n,
            1.0 - eps_ro / 2.0,
            p_b1,
        )
        assert count / n == pytest.approx(p_b1, abs=1e-5)

    def test_prep_flip_inverts_outcome(self):
        group = clifford.load_group()
        seq = rb.RBSequence(
            seed=0,
            seq_id=0,
            length=1,
            gate_indices=(1,),
            recovery_index=clifford.recovery_index(1),
        )
        prog = rb.build_program(seq, group)
        n = 1001
        # Prep flipped into |0>; the recovery pulse then maps it to |1>.
        count = pure.run_shots(
            prog.cphi,
            prog.sphi,
            prog.theta,
            prog.gate_start,
            np.zeros(prog.n_gates),
            np.zeros(n),
            np.zeros((n, prog.n_pulses)),
            np.zeros((n, prog.n_pulses)),
            0,
            0.0,
            np.ones(n, dtype=np.uint8),
            np.full(n, 0.5),
            np.full(n, 0.5),
            1.0,
            0.0,
        )
        assert count == 0
