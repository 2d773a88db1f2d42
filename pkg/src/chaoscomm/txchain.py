"""Transmit chain: bipolar symbol mapping, pulse shaping, DSB-SC modulation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .signals import SampledSignal, convolve_full
from .waveforms import PulseShape


@dataclass(frozen=True)
class SymbolSequence:
    """Ordered bipolar symbols; every element is exactly +1 or -1."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise ConfigError("symbol sequence must be a nonempty 1-D array")
        if not np.all(np.abs(values) == 1.0):
            raise ConfigError("symbols must be exactly +1 or -1")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class CarrierParams:
    """Carrier frequency (Hz) and initial phase (radians)."""

    fc: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.fc) and self.fc > 0):
            raise ConfigError(f"carrier frequency must be positive, got {self.fc}")
        if not math.isfinite(self.theta):
            raise ConfigError("carrier phase must be finite")


def bits_to_symbols(bits) -> SymbolSequence:
    """Map bits to bipolar symbols: 1 -> +1, 0 -> -1, order preserved."""
    bits = np.asarray(bits)
    if bits.size == 0:
        raise ConfigError("bit sequence is empty")
    if not np.all((bits == 0) | (bits == 1)):
        raise ConfigError("bits must be 0 or 1")
    return SymbolSequence(2.0 * bits.astype(np.float64) - 1.0)


def shape_pulses(symbols, pulse: PulseShape) -> SampledSignal:
    """Superpose symbol-scaled copies of the pulse, one per symbol period.

    Symbol m occupies [m/f, (m+1)/f); its pulse copy starts at
    m/f + pulse.t_start, so the output time base starts at pulse.t_start
    and the operation is linear in the symbol values.  Raw arrays are
    accepted alongside SymbolSequence so algebraic identities (sums of
    sequences, zero padding) can be exercised directly.
    """
    values = symbols.values if isinstance(symbols, SymbolSequence) else np.asarray(
        symbols, dtype=np.float64
    )
    if values.size == 0:
        raise ConfigError("symbol sequence is empty")
    sps = pulse.samples_per_symbol
    train = np.zeros((values.size - 1) * sps + 1)
    train[::sps] = values
    samples = convolve_full(train, pulse.samples)
    return SampledSignal(samples, pulse.sample_rate, pulse.t_start)


def modulate_dsbsc(baseband: SampledSignal, carrier: CarrierParams) -> SampledSignal:
    """Multiply by the cosine carrier evaluated at absolute sample times."""
    if carrier.fc >= baseband.sample_rate / 2.0:
        raise ConfigError(
            f"carrier {carrier.fc} Hz aliases at sample rate {baseband.sample_rate} Hz"
        )
    phase = 2.0 * math.pi * carrier.fc * baseband.times() + carrier.theta
    return SampledSignal(
        baseband.samples * np.cos(phase), baseband.sample_rate, baseband.t_start
    )
