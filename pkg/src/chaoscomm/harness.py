"""Monte Carlo experiment engine: full-chain trials, BER sweeps over SNR,
confidence intervals, and signal analyses (spectra, delay embedding)."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .channel import MultipathSpec, NoiseSpec, apply_channel
from .errors import ConfigError
from .rxchain import (
    DecoderConfig,
    EqualizerConfig,
    _feedback_decode,
    calibrate_offset,
    compute_tap_gains,
    decode_threshold,
    demodulate_coherent,
    equalize,
    equalized_residual_gains,
    matched_filter,
    mmse_design,
    sample_decisions,
)
from .signals import SampledSignal
from .txchain import CarrierParams, SymbolSequence, bits_to_symbols, modulate_dsbsc, shape_pulses
from .waveforms import (
    ChaoticBasisParams,
    RrcParams,
    autocorrelation,
    eval_chaotic_basis,
    eval_rrc,
    sample_chaotic_basis,
    sample_rrc,
)

SYSTEMS = ("chaos_zero", "chaos_past_isi", "chaos_past_isi_mmse", "bpsk", "bpsk_mmse")

_WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one system's BER experiment."""

    system: str
    f_hz: float = 600.0
    fs_hz: float = 9600.0
    fc_hz: float = 1800.0
    theta: float = 0.0
    rrc_gamma: float = 0.35
    rrc_span: int = 4
    tail_tol: float = 2.0**-20
    channel: MultipathSpec = MultipathSpec(((1.0, 0.0),), "passband")
    snr_grid: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0)
    bits_per_trial: int = 10_000
    max_bits: int = 10_000_000
    target_errors: int = 100
    master_seed: int = 20260810
    window: int = 20
    sample_offset: float = 0.0
    eq_num_taps: int = 11
    eq_decision_delay: int = 5

    def __post_init__(self):
        object.__setattr__(self, "snr_grid", tuple(float(s) for s in self.snr_grid))
        if self.system not in SYSTEMS:
            raise ConfigError(f"unknown system {self.system!r}, expected {SYSTEMS}")
        sps = self.fs_hz / self.f_hz
        if abs(sps - round(sps)) > 1e-9 or round(sps) < 4:
            raise ConfigError(
                f"sample rate {self.fs_hz} must be an integer multiple >= 4 of "
                f"the symbol rate {self.f_hz}"
            )
        cycles = self.fc_hz / self.f_hz
        if abs(cycles - round(cycles)) > 1e-9 or round(cycles) < 1:
            raise ConfigError(
                f"carrier {self.fc_hz} Hz must be an integer multiple of the "
                f"symbol rate {self.f_hz} Hz"
            )
        if self.fc_hz >= self.fs_hz / 2:
            raise ConfigError("carrier frequency must be below half the sample rate")
        if len(self.snr_grid) == 0:
            raise ConfigError("SNR grid is empty")
        if self.target_errors < 1:
            raise ConfigError("target_errors must be >= 1")
        if self.bits_per_trial <= 2 * self.window + 2:
            raise ConfigError(
                f"bits_per_trial {self.bits_per_trial} leaves nothing to count "
                f"after discarding 2*{self.window} edge symbols"
            )
        # EqualizerConfig validates its own fields.
        EqualizerConfig(self.eq_num_taps, self.eq_decision_delay)

    @property
    def samples_per_symbol(self) -> int:
        return int(round(self.fs_hz / self.f_hz))

    def ebn0_offset_db(self) -> float:
        """Add to snr_db to get the equivalent Eb/N0 in dB for this chain."""
        return 10.0 * math.log10(self.samples_per_symbol / 2.0)


@dataclass(frozen=True)
class BerPoint:
    """One Monte Carlo measurement at a single SNR."""

    snr_db: float
    bits_counted: int
    errors: int
    ber: float
    ci_low: float
    ci_high: float
    elapsed_seconds: float

    def __post_init__(self):
        if not (0 <= self.errors <= self.bits_counted):
            raise ConfigError("errors must lie in [0, bits_counted]")
        if not (0.0 <= self.ber <= 1.0):
            raise ConfigError("ber must lie in [0, 1]")
        if not (self.ci_low <= self.ber <= self.ci_high):
            raise ConfigError("confidence interval must bracket the estimate")


def wilson_interval(errors: int, total: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    The endpoints are pinned to exactly 0 (or 1) at the empty (or full)
    error counts so the interval always brackets the point estimate.
    """
    if total < 1:
        raise ConfigError("total must be >= 1")
    p = errors / total
    denom = 1.0 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total)) / denom
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == total else min(1.0, center + half)
    return lo, hi


def derive_trial_seed(master_seed: int, point_index: int, trial_index: int) -> int:
    """Counter-based split of the master seed; independent of scheduling."""
    ss = np.random.SeedSequence(
        entropy=(int(master_seed), int(point_index), int(trial_index))
    )
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def derive_point_seed(master_seed: int, point_index: int) -> int:
    ss = np.random.SeedSequence(entropy=(int(master_seed), int(point_index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@lru_cache(maxsize=64)
def _pulse_for(config: ExperimentConfig):
    if config.system.startswith("chaos"):
        return sample_chaotic_basis(
            ChaoticBasisParams(config.f_hz), config.fs_hz, config.tail_tol
        )
    return sample_rrc(
        RrcParams(config.rrc_gamma, 1.0 / config.f_hz, config.rrc_span), config.fs_hz
    )


@lru_cache(maxsize=64)
def _gains_for(config: ExperimentConfig):
    return compute_tap_gains(config.channel, _pulse_for(config), config.window)


def _carrier_for(config: ExperimentConfig) -> CarrierParams:
    return CarrierParams(config.fc_hz, config.theta)


@lru_cache(maxsize=64)
def _expected_rx_power(config: ExperimentConfig) -> float:
    """Mean power of the noiseless multipath output, from the correlation sums."""
    pulse = _pulse_for(config)
    taps = config.channel.taps
    passband = config.channel.domain == "passband"
    acc = 0.0
    for aa, ta in taps:
        for ab, tb in taps:
            term = aa * ab * autocorrelation(pulse, tb - ta)
            if passband:
                term *= math.cos(2.0 * math.pi * config.fc_hz * (tb - ta))
            acc += term
    power = config.f_hz * acc
    return power / 2.0 if passband else power


def decision_noise_variance(config: ExperimentConfig, snr_db: float) -> float:
    """Variance of the noise in the sampled decision statistic at this SNR."""
    if math.isinf(snr_db):
        return 0.0
    sigma2 = _expected_rx_power(config) / 10.0 ** (snr_db / 10.0)
    scale = 2.0 if config.channel.domain == "passband" else 1.0
    return scale * sigma2 * _pulse_for(config).energy / config.fs_hz


@lru_cache(maxsize=256)
def _weights_for(config: ExperimentConfig, snr_db: float) -> np.ndarray:
    return mmse_design(
        config.channel,
        decision_noise_variance(config, snr_db),
        _pulse_for(config),
        EqualizerConfig(config.eq_num_taps, config.eq_decision_delay),
    )


@lru_cache(maxsize=256)
def _residual_for(config: ExperimentConfig, snr_db: float) -> np.ndarray:
    return equalized_residual_gains(
        config.channel,
        _pulse_for(config),
        _weights_for(config, snr_db),
        config.eq_decision_delay,
        config.window,
    )


def receive_statistics(
    config: ExperimentConfig, symbols: SymbolSequence, snr_db: float, noise_seed: int
) -> np.ndarray:
    """Run the configured chain up to the sampled decision statistics y_n.

    In passband mode the coherent product halves the baseband, so a gain of
    two is applied after demodulation; the decision statistics then carry
    unit symbol gain and match the tap-gain decomposition directly.
    """
    pulse = _pulse_for(config)
    u = shape_pulses(symbols, pulse)
    passband = config.channel.domain == "passband"
    tx = modulate_dsbsc(u, _carrier_for(config)) if passband else u
    rx = apply_channel(tx, config.channel, NoiseSpec(snr_db, noise_seed))
    d = demodulate_coherent(rx, _carrier_for(config)).scaled(2.0) if passband else rx
    y = matched_filter(d, pulse)
    decoder = DecoderConfig("zero", config.window, config.sample_offset)
    return sample_decisions(y, len(symbols), decoder, config.f_hz)


def decide_symbols(
    config: ExperimentConfig, y_n: np.ndarray, snr_db: float
) -> np.ndarray:
    """Apply the configured system's detector to the decision statistics."""
    system = config.system
    if system in ("chaos_zero", "bpsk"):
        return np.where(y_n >= 0.0, 1.0, -1.0)
    if system == "chaos_past_isi":
        cfg = DecoderConfig("past_isi", config.window, config.sample_offset)
        return decode_threshold(y_n, _gains_for(config), cfg).values
    w = _weights_for(config, snr_db)
    z = equalize(y_n, w, config.eq_decision_delay)
    if system == "bpsk_mmse":
        return np.where(z >= 0.0, 1.0, -1.0)
    return _feedback_decode(z, _residual_for(config, snr_db))


def run_trial(
    config: ExperimentConfig, snr_db: float, trial_seed: int
) -> tuple[int, int]:
    """One end-to-end trial; returns (bits counted, errors).

    Bits are drawn from the trial seed, the chain runs at the given SNR,
    and errors are counted over the interior symbols (the first and last
    ``window`` symbols are discarded as transients).
    """
    ss = np.random.SeedSequence(int(trial_seed))
    bits_ss, noise_ss = ss.spawn(2)
    bits = np.random.default_rng(bits_ss).integers(0, 2, size=config.bits_per_trial)
    noise_seed = int(noise_ss.generate_state(1, dtype=np.uint64)[0])

    symbols = bits_to_symbols(bits)
    y_n = receive_statistics(config, symbols, snr_db, noise_seed)
    decoded = decide_symbols(config, y_n, snr_db)

    w = config.window
    sent = symbols.values[w:-w]
    got = decoded[w:-w]
    return sent.size, int(np.count_nonzero(sent != got))


def ber_sweep(config: ExperimentConfig, threads: int = 1) -> list[BerPoint]:
    """Accumulate trials per SNR until target_errors or max_bits is reached.

    Trial seeds are pre-assigned by (point index, trial index) and results
    are folded in trial order, so the outcome is identical for any thread
    count.
    """
    threads = max(1, int(threads))
    points = []
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for si, snr_db in enumerate(config.snr_grid):
            t0 = time.perf_counter()
            bits = errors = 0
            trial = 0
            done = False
            while not done:
                batch = [
                    derive_trial_seed(config.master_seed, si, trial + k)
                    for k in range(threads)
                ]
                if executor is not None:
                    outs = list(
                        executor.map(lambda s: run_trial(config, snr_db, s), batch)
                    )
                else:
                    outs = [run_trial(config, snr_db, batch[0])]
                for b, e in outs:
                    bits += b
                    errors += e
                    trial += 1
                    if errors >= config.target_errors or bits >= config.max_bits:
                        done = True
                        break
            lo, hi = wilson_interval(errors, bits)
            points.append(
                BerPoint(
                    snr_db=snr_db,
                    bits_counted=bits,
                    errors=errors,
                    ber=errors / bits,
                    ci_low=lo,
                    ci_high=hi,
                    elapsed_seconds=time.perf_counter() - t0,
                )
            )
    finally:
        if executor is not None:
            executor.shutdown()
    return points


def power_spectrum(
    signal: SampledSignal, segment_len: int
) -> tuple[np.ndarray, np.ndarray]:
    """Averaged periodogram over non-overlapping segments.

    Returns one-sided (frequencies, power density); the integrated density
    equals the mean power of the analyzed samples.
    """
    seg = int(segment_len)
    if seg < 2 or seg > signal.samples.size:
        raise ConfigError(
            f"segment length {segment_len} must lie in [2, {signal.samples.size}]"
        )
    fs = signal.sample_rate
    nseg = signal.samples.size // seg
    x = signal.samples[: nseg * seg].reshape(nseg, seg)
    spec = np.fft.rfft(x, axis=1)
    density = (np.abs(spec) ** 2).mean(axis=0) / (fs * seg)
    density[1:] *= 2.0
    if seg % 2 == 0:
        density[-1] /= 2.0
    freqs = np.fft.rfftfreq(seg, 1.0 / fs)
    return freqs, density


def delay_embedding(
    signal: SampledSignal, symbols: SymbolSequence, delay: int, symbol_rate: float
) -> np.ndarray:
    """Export (u(t), u(t + delay/fs), symbol at t) triples for phase plots.

    The symbol coordinate is the staircase value at each sample time,
    clamped to the transmitted range at the block edges.  Returns an array
    of shape (len(signal) - delay, 3).
    """
    d = int(delay)
    if d < 1 or d != delay:
        raise ConfigError(f"delay must be an integer >= 1, got {delay}")
    x = signal.samples
    if d >= x.size:
        raise ConfigError("delay exceeds the signal length")
    n = x.size - d
    t = signal.t_start + np.arange(n) / signal.sample_rate
    idx = np.clip(
        np.floor(t * symbol_rate).astype(np.int64), 0, len(symbols) - 1
    )
    return np.column_stack([x[:n], x[d:], symbols.values[idx]])


# ---------------------------------------------------------------------------
# Self-test suite (drives the `selftest` CLI command)
# ---------------------------------------------------------------------------


def _noise_free(system: str, channel: MultipathSpec, bits: int = 2000):
    cfg = ExperimentConfig(
        system=system, channel=channel, snr_grid=(math.inf,), bits_per_trial=bits
    )
    return run_trial(cfg, math.inf, derive_trial_seed(cfg.master_seed, 0, 0))


def run_selftest(inject: str | None = None) -> list[tuple[str, bool, str]]:
    """Run the analytic-limit, loopback and calibration checks.

    ``inject`` corrupts a named quantity so the reporting path itself can be
    exercised; production runs leave it None.
    """
    f, fs = 600.0, 9600.0
    params = ChaoticBasisParams(f)
    pulse = sample_chaotic_basis(params, fs)
    rrc = RrcParams(0.35, 1.0 / f, 4)
    results: list[tuple[str, bool, str]] = []

    def check(name: str, fn):
        try:
            detail = fn()
            results.append((name, True, detail or ""))
        except Exception as exc:  # noqa: BLE001 - report, do not abort the suite
            results.append((name, False, str(exc)))

    def basis_origin():
        v = eval_chaotic_basis(params, 0.0)
        assert abs(v - 0.5) < 1e-12, f"basis(0) = {v}"
        return f"basis(0) = {v:.12f}"

    def basis_support_end():
        v = eval_chaotic_basis(params, 1.0 / f)
        assert v == 0.0, f"basis(1/f) = {v}"
        return "basis(1/f) = 0"

    def basis_continuity():
        eps = 1e-9 / f
        peak = float(np.max(np.abs(pulse.samples)))
        for t0 in (0.0, 1.0 / f):
            a = eval_chaotic_basis(params, t0 - eps)
            b = eval_chaotic_basis(params, t0 + eps)
            assert abs(a - b) < 1e-6 * peak, f"jump {abs(a - b)} at t={t0}"
        return "junction jumps below 1e-6 of peak"

    def rrc_origin_limit():
        closed = eval_rrc(rrc, 0.0)
        dt = rrc.Ts * 1e-6
        numeric = 0.5 * (eval_rrc(rrc, dt) + eval_rrc(rrc, -dt))
        assert abs(closed - numeric) < 1e-6 * abs(closed)
        return f"value at origin = {closed:.6f}"

    def rrc_edge_limit():
        ts = rrc.Ts / (4.0 * rrc.gamma)
        closed = eval_rrc(rrc, ts)
        dt = rrc.Ts * 1e-6
        numeric = 0.5 * (eval_rrc(rrc, ts + dt) + eval_rrc(rrc, ts - dt))
        assert abs(closed - numeric) < 1e-6 * abs(closed)
        return f"value at band-edge singularity = {closed:.6f}"

    def autocorr_peak():
        energy = pulse.energy * (1.01 if inject == "pulse_energy" else 1.0)
        r0 = autocorrelation(pulse, 0.0)
        assert abs(r0 - energy) < 1e-12 * energy, f"R(0)={r0} vs energy={energy}"
        return f"R(0) = energy = {r0:.6g}"

    def autocorr_tail():
        Ts = 1.0 / f
        vals = [abs(autocorrelation(pulse, k * Ts)) for k in range(1, 12)]
        ratios = [vals[k + 1] / vals[k] for k in range(10)]
        assert max(ratios) <= 0.6, f"max ratio {max(ratios)}"
        return f"tail ratios <= {max(ratios):.3f}"

    def matched_peak():
        y = matched_filter(SampledSignal(pulse.samples, fs, pulse.t_start), pulse)
        k = int(np.argmax(y.samples))
        t_peak = y.t_start + k / fs
        assert abs(y.samples[k] - pulse.energy) < 1e-9 * pulse.energy
        assert abs(t_peak) < 1e-9
        return f"peak {y.samples[k]:.6g} at t = {t_peak:.2e}"

    single = MultipathSpec(((1.0, 0.0),), "passband")
    echo = MultipathSpec(((1.0, 0.0), (0.6, 1.0 / f)), "passband")

    def loopback_single():
        counted, errors = _noise_free("chaos_past_isi", single)
        assert errors == 0, f"{errors} errors in {counted} bits"
        return f"0 errors in {counted} bits"

    def loopback_echo():
        counted, errors = _noise_free("chaos_past_isi", echo)
        assert errors == 0, f"{errors} errors in {counted} bits"
        return f"0 errors in {counted} bits"

    def loopback_bpsk_mmse():
        counted, errors = _noise_free("bpsk_mmse", echo)
        assert errors == 0, f"{errors} errors in {counted} bits"
        return f"0 errors in {counted} bits"

    def offset_calibration():
        cfg = ExperimentConfig(system="chaos_past_isi", channel=single,
                               snr_grid=(math.inf,), bits_per_trial=400)
        rng = np.random.default_rng(7)
        symbols = bits_to_symbols(rng.integers(0, 2, size=400))
        pulse_c = _pulse_for(cfg)
        u = shape_pulses(symbols, pulse_c)
        tx = modulate_dsbsc(u, _carrier_for(cfg))
        rx = apply_channel(tx, single, NoiseSpec(math.inf, 0))
        d = demodulate_coherent(rx, _carrier_for(cfg)).scaled(2.0)
        y = matched_filter(d, pulse_c)
        gains = _gains_for(cfg)
        best = calibrate_offset(y, symbols, gains, f)
        sps = int(fs / f)
        margins = []
        for k in range(sps):
            cfg_k = DecoderConfig("zero", 20, k / fs)
            yk = sample_decisions(y, len(symbols), cfg_k, f)
            margins.append(float(np.mean(symbols.values * yk)))
        chosen = margins[int(round(best * fs))]
        assert chosen >= 0.99 * max(margins), f"margin {chosen} vs {max(margins)}"
        return f"offset {best * f:.3f} symbol periods, margin {chosen:.4g}"

    def snr_calibration():
        n = 1_000_000
        sig = SampledSignal(np.ones(n), fs)
        out = apply_channel(sig, single, NoiseSpec(10.0, 99))
        noise = out.samples - sig.samples
        measured = 10.0 * math.log10(sig.power() / float(np.mean(noise**2)))
        assert abs(measured - 10.0) < 0.2, f"measured {measured:.3f} dB"
        return f"measured {measured:.3f} dB for requested 10 dB"

    def decomposition():
        spec_b = MultipathSpec(((1.0, 0.0), (0.6, 1.0 / f)), "baseband")
        cfg = ExperimentConfig(system="chaos_past_isi", channel=spec_b,
                               snr_grid=(math.inf,), bits_per_trial=200)
        rng = np.random.default_rng(3)
        symbols = bits_to_symbols(rng.integers(0, 2, size=200))
        y_n = receive_statistics(cfg, symbols, math.inf, 0)
        gains = _gains_for(cfg)
        W = gains.window
        s = symbols.values
        worst = 0.0
        for n_i in range(W, len(s) - W):
            direct = sum(
                s[n_i + j] * gains.combined(j) for j in range(-W, W + 1)
            )
            worst = max(worst, abs(direct - y_n[n_i]))
        scale = gains.aggregate_power
        assert worst < 1e-6 * scale, f"max deviation {worst / scale:.2e} relative"
        return f"max deviation {worst / scale:.2e} relative"

    check("basis_value_at_origin", basis_origin)
    check("basis_support_end", basis_support_end)
    check("basis_continuity", basis_continuity)
    check("rrc_limit_at_origin", rrc_origin_limit)
    check("rrc_limit_at_band_edge", rrc_edge_limit)
    check("autocorrelation_peak_is_energy", autocorr_peak)
    check("autocorrelation_geometric_tail", autocorr_tail)
    check("matched_filter_peak", matched_peak)
    check("noise_free_loopback_single_path", loopback_single)
    check("noise_free_loopback_two_path", loopback_echo)
    check("noise_free_loopback_bpsk_mmse", loopback_bpsk_mmse)
    check("offset_calibration", offset_calibration)
    check("snr_calibration", snr_calibration)
    check("tap_gain_decomposition", decomposition)
    return results
