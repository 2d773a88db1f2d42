"""Basis-function evaluation, sampling and correlation properties."""

import itertools
import math

import numpy as np
import pytest

from chaoscomm import (
    ChaoticBasisParams,
    ConfigError,
    RrcParams,
    autocorrelation,
    eval_chaotic_basis,
    eval_rrc,
    sample_chaotic_basis,
    sample_rrc,
)

from conftest import F_HZ, FS_HZ, TS


class TestChaoticBasis:
    def test_value_at_origin(self, basis_params):
        # both branches give 1 - e^{-ln 2} = 1/2 at t = 0
        assert abs(eval_chaotic_basis(basis_params, 0.0) - 0.5) < 1e-12

    def test_zero_from_support_end(self, basis_params):
        assert eval_chaotic_basis(basis_params, TS) == 0.0
        assert eval_chaotic_basis(basis_params, 10 * TS) == 0.0

    def test_acausal_envelope_bound(self, basis_params):
        # |p(t)| <= (1 - 2^-1) * 2^(t*f) * (1 + beta/omega) for t < 0
        bound = 0.5 * 2.0**-10 * (1.0 + basis_params.beta / basis_params.omega)
        assert abs(eval_chaotic_basis(basis_params, -10 * TS)) <= bound

    def test_continuity_at_junctions(self, basis_params, chaos_pulse):
        eps = 1e-9 / F_HZ
        peak = np.max(np.abs(chaos_pulse.samples))
        for t0 in (0.0, TS):
            left = eval_chaotic_basis(basis_params, t0 - eps)
            mid = eval_chaotic_basis(basis_params, t0)
            right = eval_chaotic_basis(basis_params, t0 + eps)
            assert abs(left - mid) < 1e-6 * peak
            assert abs(right - mid) < 1e-6 * peak

    def test_vectorized_matches_scalar(self, basis_params, rng):
        ts = rng.uniform(-5 * TS, 2 * TS, size=64)
        vec = eval_chaotic_basis(basis_params, ts)
        scl = np.array([eval_chaotic_basis(basis_params, t) for t in ts])
        np.testing.assert_allclose(vec, scl, rtol=0, atol=0)

    def test_rejects_bad_frequency(self):
        with pytest.raises(ConfigError):
            ChaoticBasisParams(0.0)


class TestChaoticSampling:
    def test_samples_per_symbol(self, chaos_pulse):
        assert chaos_pulse.samples_per_symbol == 16

    def test_tail_tolerance_sets_start(self, basis_params):
        pulse = sample_chaotic_basis(basis_params, FS_HZ, tail_tol=2.0**-20)
        assert pulse.t_start <= -20 * TS + 1e-12
        # first retained symbol period of tail stays under the scaled envelope
        n_tail = int(round(-pulse.t_start * F_HZ))
        head = np.abs(pulse.samples[: pulse.samples_per_symbol])
        envelope = 2.0 ** (1 - n_tail) * np.max(np.abs(pulse.samples))
        assert np.all(head <= envelope)

    def test_support_ends_before_one_period(self, basis_params, chaos_pulse):
        t_last = chaos_pulse.t_start + (len(chaos_pulse) - 1) / FS_HZ
        assert t_last < TS
        assert eval_chaotic_basis(basis_params, TS) == 0.0

    def test_energy_positive(self, chaos_pulse):
        assert chaos_pulse.energy > 0

    def test_integral_stable_under_tighter_tolerance(self, basis_params):
        coarse = sample_chaotic_basis(basis_params, FS_HZ, tail_tol=2.0**-20)
        fine = sample_chaotic_basis(basis_params, FS_HZ, tail_tol=2.0**-21)
        i_coarse = np.sum(coarse.samples) / FS_HZ
        i_fine = np.sum(fine.samples) / FS_HZ
        peak = np.max(np.abs(coarse.samples))
        assert abs(i_fine - i_coarse) < 2.0**-20 * peak / F_HZ

    def test_rejects_fractional_samples_per_symbol(self, basis_params):
        with pytest.raises(ConfigError):
            sample_chaotic_basis(basis_params, 9500.0)

    def test_rejects_bad_tolerance(self, basis_params):
        with pytest.raises(ConfigError):
            sample_chaotic_basis(basis_params, FS_HZ, tail_tol=1.5)


class TestRrc:
    def test_origin_limit(self, rrc_params):
        closed = eval_rrc(rrc_params, 0.0)
        expected = (1 - rrc_params.gamma + 4 * rrc_params.gamma / math.pi) / math.sqrt(
            rrc_params.Ts
        )
        assert abs(closed - expected) < 1e-12 * abs(expected)
        dt = rrc_params.Ts * 1e-6
        numeric = 0.5 * (eval_rrc(rrc_params, dt) + eval_rrc(rrc_params, -dt))
        assert abs(closed - numeric) < 1e-6 * abs(closed)

    def test_band_edge_limit(self, rrc_params):
        g, Ts = rrc_params.gamma, rrc_params.Ts
        ts = Ts / (4 * g)
        closed = eval_rrc(rrc_params, ts)
        expected = (g / math.sqrt(2 * Ts)) * (
            (1 + 2 / math.pi) * math.sin(math.pi / (4 * g))
            + (1 - 2 / math.pi) * math.cos(math.pi / (4 * g))
        )
        assert abs(closed - expected) < 1e-12 * abs(expected)
        dt = Ts * 1e-6
        numeric = 0.5 * (eval_rrc(rrc_params, ts + dt) + eval_rrc(rrc_params, ts - dt))
        assert abs(closed - numeric) < 1e-6 * abs(closed)

    def test_even_symmetry(self, rrc_params, rng):
        ts = rng.uniform(0, 6 * rrc_params.Ts, size=50)
        np.testing.assert_allclose(
            eval_rrc(rrc_params, ts), eval_rrc(rrc_params, -ts), rtol=1e-12
        )

    def test_sample_count(self, rrc_pulse):
        assert len(rrc_pulse) == 2 * 4 * 16 + 1

    def test_peak_at_origin(self, rrc_pulse):
        assert np.argmax(rrc_pulse.samples) == (len(rrc_pulse) - 1) // 2

    def test_main_lobe_and_side_lobes(self, rrc_pulse):
        # qualitative shape: single dominant lobe, side lobes decaying
        s = rrc_pulse.samples
        center = (len(s) - 1) // 2
        sps = rrc_pulse.samples_per_symbol
        lobe1 = np.max(np.abs(s[center + sps : center + 2 * sps]))
        lobe3 = np.max(np.abs(s[center + 3 * sps : center + 4 * sps]))
        assert lobe1 < s[center]
        assert lobe3 < lobe1

    def test_unit_energy_convention(self):
        pulse = sample_rrc(RrcParams(0.35, TS, 8), FS_HZ)
        assert abs(pulse.energy - 1.0) < 0.01

    def test_rejects_fractional_samples_per_symbol(self, rrc_params):
        with pytest.raises(ConfigError):
            sample_rrc(rrc_params, 9700.0)

    def test_param_validation(self):
        with pytest.raises(ConfigError):
            RrcParams(0.0, TS)
        with pytest.raises(ConfigError):
            RrcParams(1.2, TS)
        with pytest.raises(ConfigError):
            RrcParams(0.35, TS, span=0)


class TestAutocorrelation:
    def test_zero_lag_is_energy(self, chaos_pulse, rrc_pulse):
        for pulse in (chaos_pulse, rrc_pulse):
            assert abs(autocorrelation(pulse, 0.0) - pulse.energy) < 1e-12

    def test_even(self, chaos_pulse):
        for k in range(1, 8):
            lag = k / FS_HZ * 3
            assert autocorrelation(chaos_pulse, lag) == pytest.approx(
                autocorrelation(chaos_pulse, -lag), rel=1e-12
            )

    def test_out_of_support_is_zero(self, chaos_pulse):
        assert autocorrelation(chaos_pulse, 30 * TS) == 0.0

    def test_rejects_off_grid_lag(self, chaos_pulse):
        with pytest.raises(ConfigError):
            autocorrelation(chaos_pulse, 0.3 / FS_HZ)

    def test_geometric_tail_bound(self, chaos_pulse):
        # |R(-k/f)| <= 2^-k * c * R(0) with one constant for all k
        r0 = autocorrelation(chaos_pulse, 0.0)
        scaled = [
            abs(autocorrelation(chaos_pulse, -k * TS)) * 2.0**k / r0
            for k in range(1, 11)
        ]
        assert max(scaled) <= 0.15

    def test_geometric_tail_ratio(self, chaos_pulse):
        vals = [abs(autocorrelation(chaos_pulse, -k * TS)) for k in range(1, 12)]
        for k in range(10):
            assert vals[k + 1] / vals[k] <= 0.6

    def test_positive_definite_quadratic_form(self, chaos_pulse):
        r = [autocorrelation(chaos_pulse, k * TS) for k in range(8)]
        tol = -1e-12 * chaos_pulse.energy
        for bits in itertools.product((1.0, -1.0), repeat=8):
            s = np.array(bits)
            total = sum(
                s[m] * s[n] * r[abs(m - n)] for m in range(8) for n in range(8)
            )
            assert total >= tol
