"""Engine tests: sequence generation, Monte Carlo shots, datasets, decay fits."""

import dataclasses
import math

import numpy as np
import pytest

from rbsim import clifford, rb
from rbsim.noise import NoiseParams, SpamParams, analytic_dif, analytic_survival

OMEGA = 2.0 * math.pi * 4.74e3
FIG3_LENGTHS = [1, 12, 23, 34, 45, 56, 67, 78, 89, 100]

QUIET = NoiseParams(omega=OMEGA).without_noise()


def quiet(**overrides):
    return dataclasses.replace(QUIET, **overrides)


class TestGenerateSequences:
    def test_record_count_and_determinism(self):
        a = rb.generate_sequences(FIG3_LENGTHS, 7, seed=42)
        b = rb.generate_sequences(FIG3_LENGTHS, 7, seed=42)
        assert len(a) == 70
        assert a == b

    def test_seed_changes_sequences(self):
        a = rb.generate_sequences([10], 1, seed=1)[0]
        b = rb.generate_sequences([10], 1, seed=2)[0]
        assert a.gate_indices != b.gate_indices

    def test_shared_prefix(self):
        records = rb.generate_sequences([3, 10, 50], 2, seed=7)
        by_key = {(r.seq_id, r.length): r for r in records}
        for i in (0, 1):
            g3 = by_key[(i, 3)].gate_indices
            g10 = by_key[(i, 10)].gate_indices
            g50 = by_key[(i, 50)].gate_indices
            assert g10[:3] == g3
            assert g50[:10] == g10

    def test_independent_mode(self):
        records = rb.generate_sequences([3, 50], 1, seed=7, shared_prefix=False)
        by_len = {r.length: r for r in records}
        assert by_len[50].gate_indices[:3] != by_len[3].gate_indices

    def test_all_indices_in_group_range(self):
        for r in rb.generate_sequences([100], 3, seed=5):
            assert all(1 <= g <= 24 for g in r.gate_indices)

    def test_validation(self):
        with pytest.raises(ValueError):
            rb.generate_sequences([], 3, seed=0)
        with pytest.raises(ValueError):
            rb.generate_sequences([0, 5], 3, seed=0)
        with pytest.raises(ValueError):
            rb.generate_sequences([5], 0, seed=0)

    def test_recovery_invariant_enforced(self):
        good = rb.generate_sequences([5], 1, seed=3)[0]
        bad_recovery = good.recovery_index % 24 + 1
        with pytest.raises(ValueError):
            rb.RBSequence(
                seed=good.seed,
                seq_id=0,
                length=good.length,
                gate_indices=good.gate_indices,
                recovery_index=bad_recovery,
            )


class TestPrograms:
    def test_program_matches_group_tables(self):
        group = clifford.load_group()
        seq = rb.generate_sequences([8], 1, seed=11)[0]
        prog = rb.build_program(seq)
        assert prog.n_gates == 9  # 8 Cliffords + recovery
        want_pulses = sum(
            len(group[i - 1].pulses)
            for i in list(seq.gate_indices) + [seq.recovery_index]
        )
        assert prog.n_pulses == want_pulses
        assert prog.gate_start[0] == 0
        assert prog.gate_start[-1] == prog.n_pulses
        assert prog.total_area == pytest.approx(prog.gate_area.sum(), rel=1e-12)

    def test_exact_recovery_closes_to_zero_state(self):
        for seq in rb.generate_sequences([1, 25, 100], 4, seed=13):
            assert rb.exact_survival_probability(seq) == pytest.approx(
                1.0, abs=1e-12
            )


class TestSimulateSequence:
    def test_noiseless_all_survive(self):
        seq = rb.generate_sequences([50], 1, seed=21)[0]
        rng = rb.stream(21, rb.STREAM_RB_SHOTS, 0, 50)
        assert rb.simulate_sequence(seq, QUIET, 500, rng) == 500

    def test_depolarize_only_matches_analytic(self):
        spam = SpamParams(prep_error=0.04, pushout_error=0.01, readout_overlap=0.0004)
        params = quiet(depolarization=0.0035, spam=spam)
        seq = rb.generate_sequences([100], 1, seed=8)[0]
        shots = 100_000
        rng = rb.stream(8, rb.STREAM_RB_SHOTS, 0, 100)
        got = rb.simulate_sequence(seq, params, shots, rng) / shots
        want = analytic_survival(spam, 0.0035, 100)
        sigma = math.sqrt(want * (1.0 - want) / shots)
        assert abs(got - want) < 3.0 * sigma

    def test_eq1_paper_point(self):
        # d_if = 0.092 from SPAM alone, d = 0.0035: P(100) approx 0.8198.
        spam = SpamParams(
            prep_error=0.5 * (1.0 - 0.908 / 0.9996),
            pushout_error=0.0,
            readout_overlap=0.0004,
        )
        assert analytic_dif(spam) == pytest.approx(0.092, abs=1e-12)
        params = quiet(depolarization=0.0035, spam=spam)
        seq = rb.generate_sequences([100], 1, seed=17)[0]
        shots = 100_000
        rng = rb.stream(17, rb.STREAM_RB_SHOTS, 0, 100)
        got = rb.simulate_sequence(seq, params, shots, rng) / shots
        assert got == pytest.approx(0.8198, abs=3.0 * math.sqrt(0.82 * 0.18 / shots))

    def test_prep_error_only(self):
        params = quiet(spam=SpamParams(prep_error=0.1))
        seq = rb.generate_sequences([5], 1, seed=30)[0]
        shots = 50_000
        rng = rb.stream(30, rb.STREAM_RB_SHOTS, 0, 5)
        got = rb.simulate_sequence(seq, params, shots, rng) / shots
        assert got == pytest.approx(0.9, abs=3.0 * math.sqrt(0.09 / shots))

    def test_static_tilt_reduces_survival(self):
        params = quiet(static_detuning=0.15 * OMEGA)
        seq = rb.generate_sequences([20], 1, seed=31)[0]
        rng = rb.stream(31, rb.STREAM_RB_SHOTS, 0, 20)
        got = rb.simulate_sequence(seq, params, 2000, rng)
        assert got < 2000

    def test_site_detuning_ratio_dominates(self):
        seq = rb.generate_sequences([10], 1, seed=32)[0]
        rng = rb.stream(32, rb.STREAM_RB_SHOTS, 0, 10)
        near = rb.simulate_sequence(seq, QUIET, 2000, rng, site_detuning_ratio=3.88)
        assert 0 < near < 2000

    def test_amplitude_damping_decays(self):
        params = quiet(t1=2e-3)
        seq = rb.generate_sequences([30], 1, seed=33)[0]
        rng = rb.stream(33, rb.STREAM_RB_SHOTS, 0, 30)
        got = rb.simulate_sequence(seq, params, 5000, rng)
        # T1 pulls toward |0> from below but the twirl mixes; just bound it.
        assert got < 5000

    def test_zero_jitter_array_is_bit_exact(self):
        params = quiet(static_detuning=50.0)
        seq = rb.generate_sequences([10], 1, seed=34)[0]
        a = rb.simulate_sequence(
            seq, params, 1000, rb.stream(34, 0), r_jitter=np.zeros(1000)
        )
        b = rb.simulate_sequence(seq, params, 1000, rb.stream(34, 0))
        assert a == b

    def test_jitter_shape_validated(self):
        seq = rb.generate_sequences([5], 1, seed=35)[0]
        with pytest.raises(ValueError):
            rb.simulate_sequence(seq, QUIET, 100, rb.stream(35, 0), r_jitter=np.zeros(7))

    def test_identity_heavy_sequence_per_gate_mode(self):
        # Identity gates carry zero pulses; the per-gate dephasing path must
        # skip them without consuming their phase slot.
        seq = rb.RBSequence(
            seed=0,
            seq_id=0,
            length=3,
            gate_indices=(1, 1, 1),
            recovery_index=clifford.recovery_index(1),
        )
        params = quiet(t2_star=2.7e-3, t2star_coupling="per_gate")
        got = rb.simulate_sequence(seq, params, 1000, rb.stream(36, 0))
        assert got > 900  # only the recovery pulse dephases

    def test_coupling_modes_all_run(self):
        seq = rb.generate_sequences([12], 1, seed=37)[0]
        results = {}
        for mode in ("per_pulse", "per_gate", "per_shot_phase", "per_shot_tilt"):
            params = quiet(t2_star=1e-4, t2star_coupling=mode)
            results[mode] = rb.simulate_sequence(
                seq, params, 3000, rb.stream(37, 0)
            )
        # Strong dephasing: every phase-coupled mode must lose population.
        assert results["per_pulse"] < 3000
        assert results["per_gate"] < 3000
        assert results["per_shot_phase"] < 3000

    def test_shots_validated(self):
        seq = rb.generate_sequences([5], 1, seed=38)[0]
        with pytest.raises(ValueError):
            rb.simulate_sequence(seq, QUIET, 0, rb.stream(38, 0))


class TestRunRB:
    def test_worker_count_invariance(self):
        params = quiet(depolarization=0.01)
        one = rb.run_rb(params, [1, 20, 40], 3, 400, seed=5, workers=1)
        four = rb.run_rb(params, [1, 20, 40], 3, 400, seed=5, workers=4)
        assert one.rows == four.rows
        assert one.params_digest == four.params_digest

    def test_kernels_agree(self):
        params = quiet(depolarization=0.02, spam=SpamParams(0.03, 0.01, 0.001))
        a = rb.run_rb(params, [1, 15, 30], 2, 300, seed=9, kernel="python")
        b = rb.run_rb(params, [1, 15, 30], 2, 300, seed=9, kernel="cython")
        assert a.rows == b.rows

    def test_digest_tracks_params(self):
        a = rb.run_rb(QUIET, [1, 5], 1, 10, seed=1)
        b = rb.run_rb(quiet(depolarization=0.1), [1, 5], 1, 10, seed=1)
        assert a.params_digest != b.params_digest

    def test_fitted_d_converges_to_injected(self):
        params = quiet(depolarization=0.008)
        ds = rb.run_rb(params, [1, 30, 60, 100], 3, 100_000, seed=44, workers=4)
        fit = rb.fit_decay(ds)
        assert abs(fit.d - 0.008) < 3.0 * fit.stderr_d
        assert fit.stderr_d < 3e-4

    def test_survival_monotone_in_length(self):
        spam = SpamParams(0.04, 0.01, 0.0004)
        last = 1.0
        for ell in range(1, 101, 7):
            cur = analytic_survival(spam, 0.01, ell)
            assert cur <= last + 1e-15
            last = cur


class TestDataset:
    def test_csv_round_trip(self, tmp_path):
        ds = rb.run_rb(quiet(depolarization=0.05), [1, 10], 2, 50, seed=3)
        path = tmp_path / "rb.csv"
        ds.to_csv(path)
        text = path.read_text().splitlines()
        assert text[0] == "seq_id,length,shots,survivors"
        back = rb.RBDataset.from_csv(path, seed=ds.seed, params_digest=ds.params_digest)
        assert back == ds

    def test_header_validated(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c,d\n1,2,3,4\n")
        with pytest.raises(ValueError):
            rb.RBDataset.from_csv(path)

    def test_row_bounds_validated(self):
        with pytest.raises(ValueError):
            rb.RBDataset(rows=((0, 1, 10, 11),), seed=0, params_digest="")

    def test_json_dict(self):
        ds = rb.RBDataset(rows=((0, 1, 10, 9),), seed=7, params_digest="abc")
        d = ds.to_json_dict()
        assert d["metadata"] == {"seed": 7, "params_digest": "abc"}
        assert d["rows"] == [{"seq_id": 0, "length": 1, "shots": 10, "survivors": 9}]
