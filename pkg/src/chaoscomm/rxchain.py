"""Receive chain: coherent demodulation, matched filtering, decision sampling,
tap-gain computation, threshold decoding with past-ISI cancellation, and the
linear MMSE equalizer used by the conventional baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import MultipathSpec
from .errors import CalibrationError, ConfigError, DecodeError, NumericalError
from .signals import SampledSignal, convolve_full
from .txchain import CarrierParams, SymbolSequence
from .waveforms import PulseShape, autocorrelation

THRESHOLD_MODES = ("zero", "past_isi")


@dataclass(frozen=True)
class TapGainTable:
    """Per-path, per-lag correlation gains C[l][j], j = -W..+W.

    C[l][j] is the contribution of the symbol j places after the current one
    through path l: attenuation times the pulse autocorrelation at the path
    delay plus j symbol periods.  ``aggregate_power`` is the sum of the
    zero-lag column, the gain seen by the current symbol itself.
    """

    gains: np.ndarray  # shape (paths, 2*window + 1)
    window: int
    aggregate_power: float

    def gain(self, path: int, j: int) -> float:
        if abs(j) > self.window:
            return 0.0
        return float(self.gains[path, j + self.window])

    def combined(self, j: int) -> float:
        """Sum of C[l][j] over paths."""
        if abs(j) > self.window:
            return 0.0
        return float(self.gains[:, j + self.window].sum())

    def past_profile(self) -> np.ndarray:
        """Combined gains for lags -1..-W, indexed by how many symbols back."""
        return np.array([self.combined(-i) for i in range(1, self.window + 1)])


@dataclass(frozen=True)
class DecoderConfig:
    """Threshold mode, feedback window and decision-sampling offset."""

    threshold_mode: str = "past_isi"
    window: int = 20
    sample_offset: float = 0.0

    def __post_init__(self):
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ConfigError(f"threshold mode must be one of {THRESHOLD_MODES}")
        if int(self.window) != self.window or self.window < 1:
            raise ConfigError(f"window must be an integer >= 1, got {self.window}")
        if not (0.0 <= self.sample_offset):
            raise ConfigError("sample offset must be >= 0")


@dataclass(frozen=True)
class EqualizerConfig:
    """Symbol-spaced linear equalizer length and decision delay."""

    num_taps: int = 11
    decision_delay: int = 5

    def __post_init__(self):
        if self.num_taps < 1 or self.num_taps % 2 == 0:
            raise ConfigError(f"num_taps must be odd and >= 1, got {self.num_taps}")
        if not (0 <= self.decision_delay < self.num_taps):
            raise ConfigError(
                f"decision delay must lie in [0, {self.num_taps}), "
                f"got {self.decision_delay}"
            )


def demodulate_coherent(
    passband: SampledSignal, carrier: CarrierParams
) -> SampledSignal:
    """Multiply by the synchronized local carrier at absolute sample times.

    The product contains the baseband at half amplitude plus a component at
    twice the carrier frequency; downstream filtering must reject the image.
    """
    phase = 2.0 * math.pi * carrier.fc * passband.times() + carrier.theta
    return SampledSignal(
        passband.samples * np.cos(phase), passband.sample_rate, passband.t_start
    )


def matched_filter(signal: SampledSignal, pulse: PulseShape) -> SampledSignal:
    """Convolve with the time-reversed pulse, scaled by 1/fs.

    The output time base is tracked exactly: feeding the pulse itself in
    produces the pulse autocorrelation with its energy peak at t = 0.
    """
    if signal.sample_rate != pulse.sample_rate:
        raise ConfigError(
            f"pulse sample rate {pulse.sample_rate} != signal rate "
            f"{signal.sample_rate}"
        )
    samples = convolve_full(signal.samples, pulse.samples[::-1]) / pulse.sample_rate
    t_start = (
        signal.t_start - pulse.t_start - (pulse.samples.size - 1) / pulse.sample_rate
    )
    return SampledSignal(samples, signal.sample_rate, t_start)


def compute_tap_gains(
    spec: MultipathSpec,
    pulse: PulseShape,
    window: int,
    trunc_tol: float = 1e-6,
) -> TapGainTable:
    """Build the C[l][j] table from the channel taps and pulse autocorrelation.

    ``trunc_tol`` bounds how much gain may fall outside the window: the
    combined gains at the first lags beyond +-window must stay below
    trunc_tol times the largest in-window magnitude.
    """
    if int(window) != window or window < 1:
        raise ConfigError(f"window must be an integer >= 1, got {window}")
    Ts = 1.0 / pulse.symbol_rate
    gains = np.empty((len(spec.taps), 2 * window + 1))
    for l, (alpha, tau) in enumerate(spec.taps):
        for j in range(-window, window + 1):
            gains[l, j + window] = alpha * autocorrelation(pulse, tau + j * Ts)
    aggregate = float(gains[:, window].sum())
    if aggregate <= 0:
        raise ConfigError("aggregate power must be positive")

    peak = float(np.max(np.abs(gains)))
    for j in (window + 1, window + 2):
        spill = sum(
            alpha * autocorrelation(pulse, tau + s * j * Ts)
            for alpha, tau in spec.taps
            for s in (-1, 1)
        )
        if abs(spill) > trunc_tol * peak:
            raise ConfigError(
                f"window {window} truncates gains above tolerance {trunc_tol}"
            )
    return TapGainTable(gains=gains, window=int(window), aggregate_power=aggregate)


def _sample_at_offsets(
    y: SampledSignal, count: int, offset: float, symbol_rate: float
) -> np.ndarray:
    times = np.arange(count) / symbol_rate + offset
    idx = np.rint((times - y.t_start) * y.sample_rate).astype(np.int64)
    if idx[0] < 0 or idx[-1] >= y.samples.size:
        raise DecodeError(
            f"signal covers samples [0, {y.samples.size}), decision instants "
            f"need [{idx[0]}, {idx[-1]}]"
        )
    return y.samples[idx]


def sample_decisions(
    y: SampledSignal, symbol_count: int, config: DecoderConfig, symbol_rate: float
) -> np.ndarray:
    """Sample the filtered signal at t = n/f + offset, nearest grid point."""
    if symbol_count < 1:
        raise ConfigError("symbol count must be >= 1")
    return _sample_at_offsets(y, symbol_count, config.sample_offset, symbol_rate)


def calibrate_offset(
    y: SampledSignal,
    preamble: SymbolSequence,
    gains: TapGainTable,
    symbol_rate: float,
) -> float:
    """Find the grid offset in [0, 1/f) with the best mean decision margin.

    For each candidate offset the preamble decision statistics are sampled,
    the known-symbol interference predicted by the gain table is removed,
    and the mean of s_n * (y_n - I_n) is taken; the offset maximizing it is
    returned.  An all-equal objective means the signal carries no usable
    timing information.
    """
    sps = y.sample_rate / symbol_rate
    if abs(sps - round(sps)) > 1e-9:
        raise ConfigError("sample rate must be an integer multiple of symbol rate")
    sps = int(round(sps))
    s = preamble.values
    n_sym = s.size
    W = gains.window

    isi = np.zeros(n_sym)
    for n in range(n_sym):
        acc = 0.0
        for i in range(-W, W + 1):
            if i == 0 or not (0 <= n + i < n_sym):
                continue
            acc += s[n + i] * gains.combined(i)
        isi[n] = acc

    margins = np.empty(sps)
    for k in range(sps):
        yn = _sample_at_offsets(y, n_sym, k / y.sample_rate, symbol_rate)
        margins[k] = float(np.mean(s * (yn - isi)))

    if np.ptp(margins) <= 1e-12 * max(1.0, np.max(np.abs(margins))):
        raise CalibrationError("decision-margin objective is flat across offsets")
    return int(np.argmax(margins)) / y.sample_rate


def _feedback_decode(y_n: np.ndarray, past_gains: np.ndarray) -> np.ndarray:
    """Sequential sign decisions with decision-feedback threshold.

    past_gains[i-1] weights the decision made i symbols earlier; symbols
    before the start of the block contribute nothing.  sign(0) is +1.
    """
    g = [float(v) for v in past_gains]
    W = len(g)
    ys = [float(v) for v in y_n]
    out = []
    for n, yn in enumerate(ys):
        th = 0.0
        for i in range(1, min(W, n) + 1):
            th += g[i - 1] * out[n - i]
        out.append(1.0 if yn - th >= 0.0 else -1.0)
    return np.asarray(out)


def decode_threshold(
    y_n, gains: TapGainTable, config: DecoderConfig
) -> SymbolSequence:
    """Sign decisions against either a zero threshold or the past-ISI estimate.

    In past_isi mode the threshold for symbol n is the interference
    predicted from already-decoded symbols and the gain table's negative
    lags; future-symbol interference is left in (it cannot be known at
    decode time).
    """
    y_n = np.asarray(y_n, dtype=np.float64)
    if gains.window < config.window:
        raise ConfigError(
            f"gain table window {gains.window} < decoder window {config.window}"
        )
    if config.threshold_mode == "zero":
        return SymbolSequence(np.where(y_n >= 0.0, 1.0, -1.0))
    past = gains.past_profile()[: config.window]
    if not np.any(past):
        return SymbolSequence(np.where(y_n >= 0.0, 1.0, -1.0))
    return SymbolSequence(_feedback_decode(y_n, past))


def composite_symbol_response(
    spec: MultipathSpec, pulse: PulseShape
) -> tuple[np.ndarray, int]:
    """Symbol-rate response of pulse -> multipath -> matched filter.

    Returns (h, k_min) with h[i] the coefficient of the symbol k_min + i
    periods before the current decision in the sampled filter output.
    """
    Ts = 1.0 / pulse.symbol_rate
    support_syms = 1 + int(round(-pulse.t_start * pulse.symbol_rate))
    delay_syms = int(math.ceil(spec.max_delay / Ts))
    k_min = -support_syms - 1
    k_max = support_syms + delay_syms + 1
    h = np.array(
        [
            sum(
                alpha * autocorrelation(pulse, tau - k * Ts)
                for alpha, tau in spec.taps
            )
            for k in range(k_min, k_max + 1)
        ]
    )
    return h, k_min


def mmse_design(
    spec: MultipathSpec,
    noise_var: float,
    pulse: PulseShape,
    config: EqualizerConfig,
) -> np.ndarray:
    """Symbol-spaced linear MMSE weights for the known composite channel.

    Solves (H H^T + noise_var I) w = H e_d, where H is the convolution
    matrix of the composite symbol-rate response and e_d selects the
    decision-delay column.  noise_var is the variance of the noise at the
    decision statistic; zero gives the zero-forcing solution when the
    normal matrix is invertible.
    """
    if noise_var < 0 or not math.isfinite(noise_var):
        raise ConfigError(f"noise variance must be finite and >= 0, got {noise_var}")
    h, k_min = composite_symbol_response(spec, pulse)
    nw, d = config.num_taps, config.decision_delay

    ncols = h.size + nw - 1
    H = np.zeros((nw, ncols))
    for j in range(nw):
        H[j, j : j + h.size] = h
    sel = d - k_min  # column of the current symbol (lag 0)
    R = H @ H.T + noise_var * np.eye(nw)
    p = H[:, sel]

    try:
        w = np.linalg.solve(R, p)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"MMSE normal equations are singular: {exc}") from exc
    residual = np.linalg.norm(R @ w - p)
    if residual > 1e-9 * max(np.linalg.norm(p), 1e-300):
        raise NumericalError(
            f"MMSE solve residual {residual:.3e} exceeds tolerance"
        )
    return w


def equalize(y_n, weights, decision_delay: int) -> np.ndarray:
    """Apply symbol-rate FIR weights with the decision delay compensated.

    Output index n is sum_j w[j] * y[n + decision_delay - j], so a unit
    impulse at the decision delay is the identity.
    """
    y_n = np.asarray(y_n, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if not (0 <= decision_delay < weights.size):
        raise ConfigError("decision delay must lie within the weight span")
    full = np.convolve(y_n, weights)
    return full[decision_delay : decision_delay + y_n.size]


def equalized_residual_gains(
    spec: MultipathSpec,
    pulse: PulseShape,
    weights: np.ndarray,
    decision_delay: int,
    window: int,
) -> np.ndarray:
    """Past-lag gains of the post-equalizer residual response.

    Used to run decision feedback after linear equalization: entry i-1 is
    the residual coefficient of the symbol decided i periods earlier.
    """
    h, k_min = composite_symbol_response(spec, pulse)
    c = np.convolve(np.asarray(weights, dtype=np.float64), h)
    out = np.zeros(window)
    for i in range(1, window + 1):
        m = i + decision_delay - k_min
        if 0 <= m < c.size:
            out[i - 1] = c[m]
    return out
