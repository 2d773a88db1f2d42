"""Chaotic pulse-shaping communication simulator.

Implements a passband transmit/receive chain built on a chaotic basis
pulse with its matched filter and past-ISI decision threshold, alongside
the conventional BPSK root-raised-cosine chain with an MMSE equalizer, and
a Monte Carlo harness for comparing their bit error rates over single-path
and multipath channels.
"""

__version__ = "0.1.0"

from .channel import MultipathSpec, NoiseSpec, add_awgn, apply_channel, apply_multipath
from .errors import CalibrationError, ConfigError, DecodeError, NumericalError
from .harness import (
    SYSTEMS,
    BerPoint,
    ExperimentConfig,
    ber_sweep,
    delay_embedding,
    power_spectrum,
    run_selftest,
    run_trial,
    wilson_interval,
)
from .rxchain import (
    DecoderConfig,
    EqualizerConfig,
    TapGainTable,
    calibrate_offset,
    compute_tap_gains,
    decode_threshold,
    demodulate_coherent,
    equalize,
    matched_filter,
    mmse_design,
    sample_decisions,
)
from .signals import SampledSignal
from .txchain import (
    CarrierParams,
    SymbolSequence,
    bits_to_symbols,
    modulate_dsbsc,
    shape_pulses,
)
from .waveforms import (
    ChaoticBasisParams,
    PulseShape,
    RrcParams,
    autocorrelation,
    eval_chaotic_basis,
    eval_rrc,
    sample_chaotic_basis,
    sample_rrc,
)

__all__ = [
    "__version__",
    "SYSTEMS",
    "BerPoint",
    "CalibrationError",
    "CarrierParams",
    "ChaoticBasisParams",
    "ConfigError",
    "DecodeError",
    "DecoderConfig",
    "EqualizerConfig",
    "ExperimentConfig",
    "MultipathSpec",
    "NoiseSpec",
    "NumericalError",
    "PulseShape",
    "RrcParams",
    "SampledSignal",
    "SymbolSequence",
    "TapGainTable",
    "add_awgn",
    "apply_channel",
    "apply_multipath",
    "autocorrelation",
    "ber_sweep",
    "bits_to_symbols",
    "calibrate_offset",
    "compute_tap_gains",
    "decode_threshold",
    "delay_embedding",
    "demodulate_coherent",
    "equalize",
    "eval_chaotic_basis",
    "eval_rrc",
    "matched_filter",
    "mmse_design",
    "modulate_dsbsc",
    "power_spectrum",
    "run_selftest",
    "run_trial",
    "sample_chaotic_basis",
    "sample_decisions",
    "sample_rrc",
    "shape_pulses",
    "wilson_interval",
]
