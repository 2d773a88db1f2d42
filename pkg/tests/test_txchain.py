"""Bipolar mapping, pulse shaping and DSB-SC modulation."""

import numpy as np
import pytest

from chaoscomm import (
    CarrierParams,
    ConfigError,
    SymbolSequence,
    bits_to_symbols,
    modulate_dsbsc,
    shape_pulses,
)
from chaoscomm.harness import power_spectrum
from chaoscomm.signals import SampledSignal

from conftest import F_HZ, FS_HZ, FC_HZ, TS

# 30-symbol reference sequence used for the waveform exports
SEQ30 = [1, -1, 1, -1, 1, 1, 1, -1, 1, 1, -1, 1, 1, -1, -1,
         1, -1, -1, -1, 1, -1, 1, 1, -1, 1, -1, -1, -1, -1, 1]


class TestBitsToSymbols:
    def test_basic_mapping(self):
        np.testing.assert_array_equal(
            bits_to_symbols([1, 0, 1]).values, [1.0, -1.0, 1.0]
        )
        np.testing.assert_array_equal(bits_to_symbols([0]).values, [-1.0])

    def test_reference_sequence(self):
        bits = [(1 + s) // 2 for s in SEQ30]
        np.testing.assert_array_equal(bits_to_symbols(bits).values, SEQ30)

    def test_rejects_empty(self):
        with pytest.raises(ConfigError):
            bits_to_symbols([])

    def test_rejects_non_binary(self):
        with pytest.raises(ConfigError):
            bits_to_symbols([0, 2])

    def test_symbol_sequence_validation(self):
        with pytest.raises(ConfigError):
            SymbolSequence(np.array([1.0, 0.5]))


class TestShapePulses:
    def test_single_symbol_is_pulse(self, chaos_pulse):
        out = shape_pulses(SymbolSequence(np.array([1.0])), chaos_pulse)
        np.testing.assert_allclose(out.samples, chaos_pulse.samples, atol=1e-15)
        assert out.t_start == chaos_pulse.t_start

    def test_negation(self, chaos_pulse, rng):
        s = SymbolSequence(rng.choice([-1.0, 1.0], size=40))
        a = shape_pulses(s, chaos_pulse)
        b = shape_pulses(SymbolSequence(-s.values), chaos_pulse)
        np.testing.assert_allclose(a.samples, -b.samples, atol=1e-15)

    def test_output_length(self, chaos_pulse):
        n = 25
        out = shape_pulses(SymbolSequence(np.ones(n)), chaos_pulse)
        assert len(out) == (n - 1) * chaos_pulse.samples_per_symbol + len(chaos_pulse)

    def test_linearity_over_sum_alphabet(self, chaos_pulse, rng):
        a = rng.choice([-1.0, 1.0], size=60)
        b = rng.choice([-1.0, 1.0], size=60)
        out_a = shape_pulses(a, chaos_pulse).samples
        out_b = shape_pulses(b, chaos_pulse).samples
        out_sum = shape_pulses(a + b, chaos_pulse).samples
        np.testing.assert_allclose(out_a + out_b, out_sum, atol=1e-12)

    def test_zero_prefix_delays_output(self, chaos_pulse, rng):
        k = 3
        s = rng.choice([-1.0, 1.0], size=30)
        base = shape_pulses(s, chaos_pulse).samples
        delayed = shape_pulses(np.concatenate([np.zeros(k), s]), chaos_pulse).samples
        sps = chaos_pulse.samples_per_symbol
        np.testing.assert_allclose(delayed[: k * sps], 0.0, atol=1e-15)
        np.testing.assert_allclose(delayed[k * sps :], base, atol=1e-12)

    def test_tracks_symbol_staircase(self, chaos_pulse):
        # shaped output crosses each symbol's sign at the decision instants
        s = SymbolSequence(np.array(SEQ30, dtype=float))
        out = shape_pulses(s, chaos_pulse)
        t = out.times()
        for m, sym in enumerate(SEQ30):
            idx = np.argmin(np.abs(t - (m * TS + TS / 2)))
            assert np.sign(out.samples[idx]) == sym


class TestModulateDsbsc:
    def test_zero_in_zero_out(self, rng):
        sig = SampledSignal(np.zeros(256), FS_HZ)
        out = modulate_dsbsc(sig, CarrierParams(FC_HZ))
        assert np.all(out.samples == 0.0)

    def test_constant_gives_carrier(self):
        sig = SampledSignal(np.ones(512), FS_HZ)
        out = modulate_dsbsc(sig, CarrierParams(FC_HZ, 0.0))
        t = np.arange(512) / FS_HZ
        np.testing.assert_allclose(out.samples, np.cos(2 * np.pi * FC_HZ * t),
                                   atol=1e-12)

    def test_absolute_time_base(self, chaos_pulse):
        # t_start is honored: shifting the time base changes the carrier phase
        x = np.ones(64)
        a = modulate_dsbsc(SampledSignal(x, FS_HZ, 0.0), CarrierParams(FC_HZ, 0.0))
        b = modulate_dsbsc(
            SampledSignal(x, FS_HZ, 1.0 / FS_HZ), CarrierParams(FC_HZ, 0.0)
        )
        np.testing.assert_allclose(a.samples[1:], b.samples[:-1], atol=1e-12)

    def test_power_halving(self, chaos_pulse, rng):
        s = SymbolSequence(rng.choice([-1.0, 1.0], size=200))
        u = shape_pulses(s, chaos_pulse)
        m = modulate_dsbsc(u, CarrierParams(FC_HZ, 0.7))
        ratio = m.occupied_power() / u.occupied_power()
        assert 0.45 <= ratio <= 0.55

    def test_spectrum_moves_to_carrier(self, chaos_pulse, rng):
        s = SymbolSequence(rng.choice([-1.0, 1.0], size=600))
        u = shape_pulses(s, chaos_pulse)
        m = modulate_dsbsc(u, CarrierParams(FC_HZ, 0.0))
        freqs, density = power_spectrum(m, 1024)
        band = (freqs >= FC_HZ - 2 * F_HZ) & (freqs <= FC_HZ + 2 * F_HZ)
        assert density[band].sum() / density.sum() > 0.95

    def test_rejects_aliasing_carrier(self):
        sig = SampledSignal(np.ones(64), FS_HZ)
        with pytest.raises(ConfigError):
            modulate_dsbsc(sig, CarrierParams(FS_HZ / 2))
