"""Noise-model tests: coherence factor, budget, detuning sampler, pulse noise."""

import math

import numpy as np
import pytest

from rbsim import noise, su2
from rbsim.noise import NoiseParams, SpamParams

OMEGA = 2.0 * math.pi * 4.74e3
T2 = 2.7e-3


def default_params(**overrides):
    base = dict(omega=OMEGA)
    base.update(overrides)
    return NoiseParams(**base)


class TestCoherenceAlpha:
    def test_zero_time_is_one(self):
        assert noise.coherence_alpha(0.0, 1e-3) == 1.0

    def test_budget_anchor_point(self):
        # Frozen: 0.5 + 0.5*(1 + 0.95*(185/2700)^2)^-1.5
        assert noise.coherence_alpha(185e-6, 2.7e-3) == pytest.approx(
            0.996674, abs=1e-6
        )

    def test_long_time_asymptote(self):
        assert noise.coherence_alpha(1e3, 1e-3) == pytest.approx(0.5, abs=1e-9)

    def test_monotone_nonincreasing_onto_half_one(self):
        ts = np.linspace(0.0, 50e-3, 400)
        vals = [noise.coherence_alpha(t, T2) for t in ts]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert all(0.5 < v <= 1.0 for v in vals)

    def test_infinite_t2_star(self):
        assert noise.coherence_alpha(1.0, math.inf) == 1.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            noise.coherence_alpha(1e-3, 0.0)
        with pytest.raises(ValueError):
            noise.coherence_alpha(-1e-3, 1e-3)


class TestAnalyticBudget:
    def test_paper_operating_point(self):
        b = noise.analytic_budget(default_params(t2_star=T2))
        assert b.mean_gate_time == pytest.approx(184.6e-6, abs=1e-6)
        assert b.f_squared == pytest.approx(0.99834, abs=2e-5)

    def test_frozen_value(self):
        # Independent evaluation: t = 7pi/4 / (2pi*4740) s, alpha as above.
        t = 1.75 * math.pi / OMEGA
        alpha = 0.5 + 0.5 * (1.0 + 0.95 * (t / T2) ** 2) ** -1.5
        b = noise.analytic_budget(default_params(t2_star=T2))
        assert b.f_squared == pytest.approx(1.0 - 0.5 * (1.0 - alpha), abs=1e-15)
        assert b.f_squared == pytest.approx(0.998344, abs=1e-6)

    def test_infinite_t2_star_is_perfect(self):
        b = noise.analytic_budget(default_params(t2_star=math.inf))
        assert b.f_squared == 1.0

    def test_zero_area_is_perfect(self):
        b = noise.analytic_budget(default_params(t2_star=T2), mean_area=0.0)
        assert b.f_squared == 1.0
        assert b.mean_gate_time == 0.0


class TestQuasistaticDetuning:
    def test_scale_parameter(self):
        p = default_params(t2_star=T2)
        assert p.detuning_scale == pytest.approx(math.sqrt(0.95) / T2, rel=1e-12)
        assert p.detuning_scale == pytest.approx(360.99, abs=0.01)

    def test_centered(self):
        rng = np.random.default_rng(11)
        s = math.sqrt(0.95) / T2
        draws = noise.sample_quasistatic_detuning(rng, T2, size=1_000_000)
        assert abs(draws.mean()) < 3.0 * s * math.sqrt(3.0) / 1000.0

    def test_ramsey_contrast_matches_characteristic_function(self):
        # |<exp(i delta t)>| must equal (1 + 0.95 (t/T2*)^2)^(-3/2) = 2 alpha - 1.
        rng = np.random.default_rng(7)
        draws = noise.sample_quasistatic_detuning(rng, T2, size=100_000)
        for frac in (0.1, 0.5, 1.0, 2.0):
            t = frac * T2
            cf = np.exp(1j * draws * t).mean()
            expected = 2.0 * noise.coherence_alpha(t, T2) - 1.0
            sigma = 1.0 / math.sqrt(draws.size)
            assert abs(abs(cf) - expected) < 3.0 * sigma

    def test_contrast_at_t2_star(self):
        rng = np.random.default_rng(3)
        draws = noise.sample_quasistatic_detuning(rng, T2, size=100_000)
        contrast = abs(np.exp(1j * draws * T2).mean())
        assert contrast == pytest.approx(1.95**-1.5, abs=0.01)

    def test_infinite_t2_star_draws_zero(self):
        rng = np.random.default_rng(0)
        assert noise.sample_quasistatic_detuning(rng, math.inf) == 0.0
        assert np.all(noise.sample_quasistatic_detuning(rng, math.inf, size=5) == 0.0)

    def test_domain_error(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            noise.sample_quasistatic_detuning(rng, -1.0)


class TestPerturbedPulse:
    def test_noise_free_is_bit_exact(self):
        p = default_params(
            static_detuning=0.0, timing_error_fraction=0.0, t2_star=math.inf
        )
        rng = np.random.default_rng(5)
        pulse = su2.PulseSpec(phi_mw=0.7, area=math.pi)
        got = noise.perturbed_pulse(pulse, p, 0.0, rng)
        want = su2.detuned_pulse(0.7, math.pi, 0.0)
        assert np.array_equal(got, want)

    def test_static_offset_ratio(self):
        # 2pi*100 / 2pi*4740 = 0.02110 axis tilt, no timing jitter.
        p = default_params(timing_error_fraction=0.0, t2_star=math.inf)
        rng = np.random.default_rng(5)
        pulse = su2.PulseSpec(phi_mw=0.0, area=0.5 * math.pi)
        got = noise.perturbed_pulse(pulse, p, 0.0, rng)
        ratio = 100.0 / 4740.0
        assert ratio == pytest.approx(0.0211, abs=1e-4)
        want = su2.detuned_pulse(0.0, 0.5 * math.pi, ratio)
        assert np.allclose(got, want, atol=1e-15)

    def test_detunings_add(self):
        p = default_params(timing_error_fraction=0.0)
        rng = np.random.default_rng(5)
        pulse = su2.PulseSpec(phi_mw=1.0, area=math.pi)
        got = noise.perturbed_pulse(pulse, p, 200.0, rng, site_detuning=300.0)
        ratio = (p.static_detuning + 200.0 + 300.0) / OMEGA
        want = su2.detuned_pulse(1.0, math.pi, ratio)
        assert np.allclose(got, want, atol=1e-15)

    def test_timing_jitter_bound(self):
        # Worst-case pi pulse area error 0.2% -> survival error below 1e-5.
        p = default_params(static_detuning=0.0, t2_star=math.inf)
        rng = np.random.default_rng(5)
        pulse = su2.PulseSpec(phi_mw=0.0, area=math.pi)
        worst = 0.0
        for _ in range(200):
            u = noise.perturbed_pulse(pulse, p, 0.0, rng)
            worst = max(worst, 1.0 - abs(u[1, 0]) ** 2)
        assert worst <= math.sin(0.001 * math.pi) ** 2 + 1e-12
        assert worst > 0.0

    def test_unitary_output(self):
        p = default_params()
        rng = np.random.default_rng(5)
        pulse = su2.PulseSpec(phi_mw=2.0, area=1.5 * math.pi)
        u = noise.perturbed_pulse(pulse, p, 150.0, rng)
        su2.validate_unitary(u)


class TestSpamComposition:
    def test_probability_validation(self):
        with pytest.raises(ValueError):
            SpamParams(prep_error=-0.1)
        with pytest.raises(ValueError):
            SpamParams(readout_overlap=1.5)

    def test_classification_probabilities(self):
        spam = SpamParams(prep_error=0.04, pushout_error=0.01, readout_overlap=0.0004)
        assert spam.p_bright_given_zero == pytest.approx(0.9998, abs=1e-12)
        assert spam.p_bright_given_one == pytest.approx(
            0.01 * 0.9998 + 0.99 * 0.0002, abs=1e-15
        )

    def test_survival_is_decay_model_without_pushout(self):
        spam = SpamParams(prep_error=0.04, pushout_error=0.0, readout_overlap=0.0004)
        d = 0.0035
        d_if = noise.analytic_dif(spam)
        for ell in (1, 12, 56, 100):
            want = 0.5 + 0.5 * (1.0 - d_if) * (1.0 - d) ** ell
            assert noise.analytic_survival(spam, d, ell) == pytest.approx(
                want, abs=1e-15
            )

    def test_paper_point(self):
        # d_if = 0.092, d = 0.0035, l = 100 gives survival near 0.8198.
        spam = SpamParams(
            prep_error=0.5 * (1.0 - 0.908 / 0.9996),
            pushout_error=0.0,
            readout_overlap=0.0004,
        )
        assert noise.analytic_dif(spam) == pytest.approx(0.092, abs=1e-12)
        p = noise.analytic_survival(spam, 0.0035, 100)
        assert p == pytest.approx(0.8198, abs=2e-4)

    def test_pushout_shifts_intercept(self):
        spam = SpamParams(prep_error=0.0, pushout_error=0.01, readout_overlap=0.0)
        # At infinite length the curve settles at 1/2 + pushout/2.
        assert noise.analytic_survival(spam, 0.5, 2000) == pytest.approx(
            0.505, abs=1e-9
        )


class TestNoiseParams:
    def test_defaults(self):
        p = default_params()
        assert p.static_detuning == pytest.approx(2.0 * math.pi * 100.0)
        assert p.timing_error_fraction == 0.002
        assert p.t2_star == 2.7e-3
        assert p.t2star_coupling == "per_pulse"
        assert p.depolarization == 0.0
        assert math.isinf(p.t1)
        assert p.spam.prep_error == 0.04

    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseParams(omega=0.0)
        with pytest.raises(ValueError):
            default_params(t2_star=-1.0)
        with pytest.raises(ValueError):
            default_params(depolarization=1.5)
        with pytest.raises(ValueError):
            default_params(timing_correlation="sometimes")
        with pytest.raises(ValueError):
            default_params(t2star_coupling="magic")

    def test_without_noise(self):
        q = default_params().without_noise()
        assert q.static_detuning == 0.0
        assert q.timing_error_fraction == 0.0
        assert math.isinf(q.t2_star)
        assert q.detuning_scale == 0.0
        assert q.spam.prep_error == 0.0
        assert q.spam.pushout_error == 0.0
        assert q.spam.readout_overlap == 0.0
