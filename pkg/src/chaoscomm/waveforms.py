"""Pulse-shaping basis functions and their correlation structure.

Two basis families are supported: the chaotic hybrid-system basis (a
one-period fixed-point-approach segment with an exponentially growing
acausal oscillation) and the conventional root raised cosine.  Both are
evaluated in closed form, sampled onto a uniform grid, and correlated with
rectangle-rule integration so that transmit shaping, matched filtering and
tap-gain computation all agree on the same discrete inner product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class ChaoticBasisParams:
    """Parameters of the chaotic basis pulse.

    The base frequency ``f`` doubles as the symbol rate (one symbol per
    period, Ts = 1/f).  Decay rate and angular frequency are tied to ``f``
    and exposed as derived properties so they can never drift out of sync:
    ``beta = f*ln(2)`` makes the acausal envelope halve every period, and
    ``omega = 2*pi*f`` makes the oscillation period-locked to the symbol.
    """

    f: float

    def __post_init__(self):
        if not (math.isfinite(self.f) and self.f > 0):
            raise ConfigError(f"base frequency must be positive, got {self.f}")

    @property
    def beta(self) -> float:
        return self.f * math.log(2.0)

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.f


@dataclass(frozen=True)
class RrcParams:
    """Root-raised-cosine parameters: roll-off, symbol period, truncation span."""

    gamma: float
    Ts: float
    span: int = 4

    def __post_init__(self):
        if not (0.0 < self.gamma <= 1.0):
            raise ConfigError(f"roll-off must be in (0, 1], got {self.gamma}")
        if not (math.isfinite(self.Ts) and self.Ts > 0):
            raise ConfigError(f"symbol period must be positive, got {self.Ts}")
        if int(self.span) != self.span or self.span < 1:
            raise ConfigError(f"span must be an integer >= 1, got {self.span}")


@dataclass(frozen=True)
class PulseShape:
    """A sampled, truncated basis waveform plus its metadata.

    Samples outside ``[t_start, t_start + len/sample_rate)`` are implicitly
    zero.  ``energy`` is the rectangle-rule integral of the squared samples,
    which is also the autocorrelation at lag zero.
    """

    samples: np.ndarray
    sample_rate: float
    t_start: float
    symbol_rate: float
    energy: float = field(init=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ConfigError("pulse must be a nonempty 1-D array")
        if not (self.sample_rate > 0 and self.symbol_rate > 0):
            raise ConfigError("pulse rates must be positive")
        ratio = self.sample_rate / self.symbol_rate
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError(
                f"sample rate {self.sample_rate} is not an integer multiple "
                f"of the symbol rate {self.symbol_rate}"
            )
        energy = float(np.sum(samples**2) / self.sample_rate)
        if energy <= 0.0:
            raise ConfigError("pulse energy must be positive")
        object.__setattr__(self, "energy", energy)

    @property
    def samples_per_symbol(self) -> int:
        return int(round(self.sample_rate / self.symbol_rate))

    def __len__(self) -> int:
        return self.samples.size


def eval_chaotic_basis(params: ChaoticBasisParams, t) -> np.ndarray | float:
    """Evaluate the chaotic basis pulse at time(s) ``t``.

    Piecewise: a growing-exponential oscillation for t < 0, a
    fixed-point-approach branch on [0, 1/f), and identically zero from 1/f
    on.  The function is continuous at both junctions; the acausal tail is
    bounded by the envelope (1 - 2^-1) * 2^(t*f) * (1 + beta/omega).
    """
    t = np.asarray(t, dtype=np.float64)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    beta, omega, f = params.beta, params.omega, params.f

    osc = np.cos(omega * t) - (beta / omega) * np.sin(omega * t)
    out = np.zeros_like(t)

    past = t < 0.0
    out[past] = (1.0 - math.exp(-beta / f)) * np.exp(beta * t[past]) * osc[past]

    mid = (t >= 0.0) & (t < 1.0 / f)
    out[mid] = 1.0 - np.exp(beta * (t[mid] - 1.0 / f)) * osc[mid]

    return float(out[0]) if scalar else out


def sample_chaotic_basis(
    params: ChaoticBasisParams, sample_rate: float, tail_tol: float = 2.0**-20
) -> PulseShape:
    """Sample the chaotic basis on the grid n/sample_rate.

    The acausal tail is truncated at the largest grid point -K/f whose
    2^-K envelope falls below ``tail_tol`` times the peak amplitude; the
    retained support then runs up to (but not including) 1/f, where the
    pulse is identically zero.
    """
    f = params.f
    sps = sample_rate / f
    if abs(sps - round(sps)) > 1e-9 or round(sps) < 4:
        raise ConfigError(
            f"sample rate {sample_rate} must be an integer multiple >= 4 "
            f"of the base frequency {f}"
        )
    sps = int(round(sps))
    if not (0.0 < tail_tol < 1.0):
        raise ConfigError(f"tail tolerance must be in (0, 1), got {tail_tol}")

    # Peak amplitude of the causal segment; the acausal part never exceeds it.
    probe = eval_chaotic_basis(params, np.linspace(0.0, 1.0 / f, 4097)[:-1])
    peak = float(np.max(np.abs(probe)))

    tail_symbols = max(1, math.ceil(-math.log2(tail_tol * peak)))
    n = np.arange(-tail_symbols * sps, sps)
    samples = eval_chaotic_basis(params, n / sample_rate)
    return PulseShape(
        samples=samples,
        sample_rate=float(sample_rate),
        t_start=-tail_symbols / f,
        symbol_rate=f,
    )


def eval_rrc(params: RrcParams, t) -> np.ndarray | float:
    """Evaluate the root-raised-cosine impulse response at time(s) ``t``.

    Uses the standard form normalized by 1/sqrt(Ts).  The removable
    singularities at t = 0 and |t| = Ts/(4*gamma) are evaluated by their
    analytic limits; a guard band of Ts*1e-8 around each routes to the
    limit value to keep the formula numerically stable.
    """
    t = np.asarray(t, dtype=np.float64)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    g, Ts = params.gamma, params.Ts
    guard = Ts * 1e-8

    x = t / Ts
    at_zero = np.abs(t) < guard
    at_edge = np.abs(np.abs(t) - Ts / (4.0 * g)) < guard
    regular = ~(at_zero | at_edge)

    out = np.empty_like(t)
    out[at_zero] = (1.0 - g + 4.0 * g / math.pi) / math.sqrt(Ts)
    out[at_edge] = (g / math.sqrt(2.0 * Ts)) * (
        (1.0 + 2.0 / math.pi) * math.sin(math.pi / (4.0 * g))
        + (1.0 - 2.0 / math.pi) * math.cos(math.pi / (4.0 * g))
    )

    xr = x[regular]
    num = np.sin(math.pi * xr * (1.0 - g)) + 4.0 * g * xr * np.cos(
        math.pi * xr * (1.0 + g)
    )
    den = math.pi * xr * (1.0 - (4.0 * g * xr) ** 2)
    out[regular] = num / den / math.sqrt(Ts)

    return float(out[0]) if scalar else out


def sample_rrc(params: RrcParams, sample_rate: float) -> PulseShape:
    """Sample the RRC over the symmetric truncation window [-span*Ts, +span*Ts]."""
    sps = sample_rate * params.Ts
    if abs(sps - round(sps)) > 1e-9 or round(sps) < 4:
        raise ConfigError(
            f"sample rate {sample_rate} must give an integer number >= 4 of "
            f"samples per symbol period {params.Ts}"
        )
    sps = int(round(sps))
    half = params.span * sps
    n = np.arange(-half, half + 1)
    samples = eval_rrc(params, n / sample_rate)
    return PulseShape(
        samples=samples,
        sample_rate=float(sample_rate),
        t_start=-params.span * params.Ts,
        symbol_rate=1.0 / params.Ts,
    )


def autocorrelation(pulse: PulseShape, lag: float) -> float:
    """Discrete autocorrelation R_p(lag) = sum p[n] p[n + lag*fs] / fs.

    ``lag`` must fall on the sample grid.  Products outside the truncated
    support are zero, so R_p(0) equals the pulse energy and R_p is even.
    """
    shift = lag * pulse.sample_rate
    m = int(round(shift))
    if abs(shift - m) > 1e-6:
        raise ConfigError(f"lag {lag} s is not aligned to the sample grid")
    m = abs(m)
    if m >= pulse.samples.size:
        return 0.0
    s = pulse.samples
    return float(np.dot(s[: s.size - m], s[m:]) / pulse.sample_rate)
