"""Sampled-signal container and small numeric helpers used by the whole chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConfigError

# np.convolve is faster for short sequences; FFT wins well before this size.
_FFT_THRESHOLD = 1 << 12


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled real-valued signal with its sample rate and start time.

    ``t_start`` may be negative: pulse shaping produces an acausal lead-in and
    the receive filter shifts the time base again.  All operations in the
    chain keep absolute time consistent through this field.
    """

    samples: np.ndarray
    sample_rate: float
    t_start: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ConfigError("signal must be a nonempty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise ConfigError("signal contains NaN or Inf samples")
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise ConfigError(f"sample rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return self.samples.size

    def times(self) -> np.ndarray:
        """Absolute sample times in seconds."""
        return self.t_start + np.arange(self.samples.size) / self.sample_rate

    def power(self) -> float:
        """Mean square over all samples."""
        return float(np.mean(self.samples**2))

    def occupied_power(self) -> float:
        """Mean square over t >= 0, excluding any acausal lead-in samples."""
        if self.t_start >= 0:
            return self.power()
        skip = int(np.ceil(-self.t_start * self.sample_rate - 1e-9))
        if skip <= 0 or skip >= self.samples.size:
            return self.power()
        return float(np.mean(self.samples[skip:] ** 2))

    def scaled(self, gain: float) -> "SampledSignal":
        return SampledSignal(self.samples * gain, self.sample_rate, self.t_start)


def convolve_full(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear convolution, FFT-based when the operands are long."""
    if a.size + b.size > _FFT_THRESHOLD:
        return fftconvolve(a, b, mode="full")
    return np.convolve(a, b)
