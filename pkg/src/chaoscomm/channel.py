"""Wireless channel model: finite tapped delay line plus calibrated AWGN."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .signals import SampledSignal

DOMAINS = ("passband", "baseband")


@dataclass(frozen=True)
class MultipathSpec:
    """Tapped delay line: (attenuation, delay-seconds) pairs, delays increasing.

    ``domain`` records where the line is applied in the chain: at passband
    (physical placement) or directly on the baseband shaping output.
    """

    taps: tuple
    domain: str = "passband"

    def __post_init__(self):
        taps = tuple((float(a), float(tau)) for a, tau in self.taps)
        object.__setattr__(self, "taps", taps)
        if len(taps) == 0:
            raise ConfigError("multipath spec needs at least one tap")
        if taps[0][0] <= 0:
            raise ConfigError("first tap attenuation must be positive")
        last = -1.0
        for a, tau in taps:
            if not (math.isfinite(a) and math.isfinite(tau)):
                raise ConfigError("tap values must be finite")
            if tau < 0 or tau <= last:
                raise ConfigError("tap delays must be >= 0 and strictly increasing")
            last = tau
        if self.domain not in DOMAINS:
            raise ConfigError(f"channel domain must be one of {DOMAINS}")

    @property
    def max_delay(self) -> float:
        return self.taps[-1][1]


@dataclass(frozen=True)
class NoiseSpec:
    """Target SNR in dB (+inf for noise-free) and the RNG seed for the trial."""

    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ConfigError(f"snr_db must be finite or +inf, got {self.snr_db}")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError("seed must fit in an unsigned 64-bit integer")


def _delays_in_samples(spec: MultipathSpec, sample_rate: float) -> list[int]:
    delays = []
    for _, tau in spec.taps:
        d = tau * sample_rate
        if abs(d - round(d)) > 1e-6:
            raise ConfigError(
                f"tap delay {tau} s is not aligned to the 1/{sample_rate} s grid"
            )
        delays.append(int(round(d)))
    return delays


def apply_multipath(signal: SampledSignal, spec: MultipathSpec) -> SampledSignal:
    """Sum attenuated, delayed copies; output grows by the maximum delay."""
    delays = _delays_in_samples(spec, signal.sample_rate)
    n = signal.samples.size
    out = np.zeros(n + delays[-1])
    for (alpha, _), d in zip(spec.taps, delays):
        out[d : d + n] += alpha * signal.samples
    return SampledSignal(out, signal.sample_rate, signal.t_start)


def add_awgn(signal: SampledSignal, noise: NoiseSpec) -> SampledSignal:
    """Add white Gaussian noise calibrated against the occupied signal power.

    Noise variance is P_sig / 10^(snr_db/10) with P_sig measured over the
    t >= 0 region (the acausal shaping lead-in carries negligible power and
    would bias the reference).  Deterministic for a given seed; +inf SNR
    returns the input unchanged.
    """
    if math.isinf(noise.snr_db):
        return signal
    p_sig = signal.occupied_power()
    sigma = math.sqrt(p_sig / 10.0 ** (noise.snr_db / 10.0))
    rng = np.random.default_rng(int(noise.seed))
    return SampledSignal(
        signal.samples + sigma * rng.standard_normal(signal.samples.size),
        signal.sample_rate,
        signal.t_start,
    )


def apply_channel(
    signal: SampledSignal, spec: MultipathSpec, noise: NoiseSpec
) -> SampledSignal:
    """Tapped delay line followed by AWGN referenced to the multipath output."""
    return add_awgn(apply_multipath(signal, spec), noise)
