"""Batch command-line front end: `ber`, `waveform` and `selftest` subcommands.

Configuration is a flat key=value text file with dotted keys, overridable by
repeated --key=value flags.  Results go to CSV plus a JSON manifest that
echoes the full effective configuration, so a run can be reproduced from its
manifest alone.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .channel import MultipathSpec
from .errors import ConfigError
from .harness import (
    SYSTEMS,
    ExperimentConfig,
    ber_sweep,
    delay_embedding,
    derive_point_seed,
    power_spectrum,
    run_selftest,
    _pulse_for,
)
from .txchain import SymbolSequence, shape_pulses

_FIG3_SYMBOLS = (
    "1,-1,1,-1,1,1,1,-1,1,1,-1,1,1,-1,-1,"
    "1,-1,-1,-1,1,-1,1,1,-1,1,-1,-1,-1,-1,1"
)

DEFAULTS = {
    "chain.f_hz": "600",
    "chain.fs_hz": "9600",
    "chain.fc_hz": "1800",
    "chain.theta": "0",
    "chain.rrc_gamma": "0.35",
    "chain.rrc_span": "4",
    "chain.tail_tol": repr(2.0**-20),
    "channel.taps": "1@0",
    "channel.domain": "passband",
    "run.systems": "chaos_past_isi",
    "run.snr_grid_db": "0,2,4,6,8,10,12,14",
    "run.bits_per_trial": "10000",
    "run.max_bits": "10000000",
    "run.target_errors": "100",
    "run.master_seed": "20260810",
    "decoder.window": "20",
    "decoder.offset_s": "0",
    "eq.num_taps": "11",
    "eq.decision_delay": "5",
    "waveform.symbols": _FIG3_SYMBOLS,
    "waveform.spectrum_segment": "2048",
    "waveform.embed_delay": "1",
}

# Comparison presets: a grid whose upper half still produces countable errors
# under the receiver-input SNR definition (the equivalent Eb/N0 span is
# snr_db + 10*log10(sps/2), i.e. 0..12 dB here).
PRESETS = {
    "fig7": {
        "channel.taps": "1@0",
        "run.systems": "chaos_zero,chaos_past_isi,bpsk",
        "run.snr_grid_db": "-9,-7,-5,-3,-1,1,3",
        "run.max_bits": "6000000",
    },
    "fig8": {
        "channel.taps": "1@0,0.6@1Ts",
        "run.systems": "chaos_zero,chaos_past_isi,chaos_past_isi_mmse,bpsk,bpsk_mmse",
        "run.snr_grid_db": "-9,-7,-5,-3,-1,1,3",
        "run.max_bits": "6000000",
    },
}

_CSV_HEADER = "system,snr_db,bits,errors,ber,ci_low,ci_high,seed"


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse flat key=value lines; '#' starts a comment."""
    out = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{ln}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_taps(text: str, f_hz: float, fs_hz: float) -> tuple:
    taps = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "@" not in part:
            raise ConfigError(f"channel.taps entry {part!r} must look like alpha@delay")
        alpha_s, delay_s = part.split("@", 1)
        alpha = float(alpha_s)
        delay_s = delay_s.strip()
        if delay_s.lower().endswith("ts"):
            tau = float(delay_s[:-2] or "1") / f_hz
        else:
            tau = float(delay_s)
        taps.append((alpha, tau))
    if not taps:
        raise ConfigError("channel.taps is empty")
    return tuple(taps)


def _parse_float(cfg: dict, key: str) -> float:
    try:
        v = cfg[key]
        return math.inf if v.lower() in ("inf", "+inf") else float(v)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _parse_int(cfg: dict, key: str) -> int:
    try:
        return int(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def effective_config(args, extra_overrides: dict) -> dict:
    """Merge defaults, preset, config file and command-line overrides."""
    cfg = dict(DEFAULTS)
    if args.preset:
        cfg.update(PRESETS[args.preset])
    if args.config:
        if not os.path.exists(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        with open(args.config, encoding="utf-8") as fh:
            cfg.update(parse_config_text(fh.read(), args.config))
    for key, value in extra_overrides.items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown configuration key: {key}")
        cfg[key] = value
    if args.seed is not None:
        cfg["run.master_seed"] = str(args.seed)
    if getattr(args, "snr", None):
        cfg["run.snr_grid_db"] = args.snr
    if getattr(args, "paths", None):
        cfg["channel.taps"] = "1@0" if args.paths == "single" else "1@0,0.6@1Ts"
    if getattr(args, "system", None):
        cfg["run.systems"] = args.system
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown configuration key: {sorted(unknown)[0]}")
    return cfg


def build_experiment(cfg: dict, system: str) -> ExperimentConfig:
    f_hz = _parse_float(cfg, "chain.f_hz")
    fs_hz = _parse_float(cfg, "chain.fs_hz")
    domain = cfg["channel.domain"]
    taps = _parse_taps(cfg["channel.taps"], f_hz, fs_hz)
    snr_grid = tuple(
        math.inf if s.strip().lower() in ("inf", "+inf") else float(s)
        for s in cfg["run.snr_grid_db"].split(",")
        if s.strip()
    )
    return ExperimentConfig(
        system=system,
        f_hz=f_hz,
        fs_hz=fs_hz,
        fc_hz=_parse_float(cfg, "chain.fc_hz"),
        theta=_parse_float(cfg, "chain.theta"),
        rrc_gamma=_parse_float(cfg, "chain.rrc_gamma"),
        rrc_span=_parse_int(cfg, "chain.rrc_span"),
        tail_tol=_parse_float(cfg, "chain.tail_tol"),
        channel=MultipathSpec(taps, domain),
        snr_grid=snr_grid,
        bits_per_trial=_parse_int(cfg, "run.bits_per_trial"),
        max_bits=_parse_int(cfg, "run.max_bits"),
        target_errors=_parse_int(cfg, "run.target_errors"),
        master_seed=_parse_int(cfg, "run.master_seed"),
        window=_parse_int(cfg, "decoder.window"),
        sample_offset=_parse_float(cfg, "decoder.offset_s"),
        eq_num_taps=_parse_int(cfg, "eq.num_taps"),
        eq_decision_delay=_parse_int(cfg, "eq.decision_delay"),
    )


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_safe(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def cmd_ber(args, overrides: dict) -> int:
    cfg = effective_config(args, overrides)
    systems = [s.strip() for s in cfg["run.systems"].split(",") if s.strip()]
    for s in systems:
        if s not in SYSTEMS:
            raise ConfigError(f"run.systems: unknown system {s!r}")
    experiments = [build_experiment(cfg, s) for s in systems]

    os.makedirs(args.out, exist_ok=True)
    rows = [_CSV_HEADER]
    manifest_points = []
    for exp in experiments:
        points = ber_sweep(exp, threads=args.threads)
        for si, pt in enumerate(points):
            seed = derive_point_seed(exp.master_seed, si)
            rows.append(
                ",".join(
                    [
                        exp.system,
                        _fmt(pt.snr_db),
                        str(pt.bits_counted),
                        str(pt.errors),
                        _fmt(pt.ber),
                        _fmt(pt.ci_low),
                        _fmt(pt.ci_high),
                        str(seed),
                    ]
                )
            )
            manifest_points.append(
                {
                    "system": exp.system,
                    "snr_db": _json_safe(pt.snr_db),
                    "ebn0_db": _json_safe(pt.snr_db + exp.ebn0_offset_db()),
                    "bits": pt.bits_counted,
                    "errors": pt.errors,
                    "ber": pt.ber,
                    "ci_low": pt.ci_low,
                    "ci_high": pt.ci_high,
                    "seed": seed,
                    "elapsed_seconds": pt.elapsed_seconds,
                }
            )

    _atomic_write(os.path.join(args.out, "ber.csv"), "\n".join(rows) + "\n")
    manifest = {
        "tool": {"name": "chaoscomm", "version": __version__},
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "master_seed": int(cfg["run.master_seed"]),
        "threads": args.threads,
        "config": cfg,
        "points": manifest_points,
    }
    _atomic_write(
        os.path.join(args.out, "manifest.json"), json.dumps(manifest, indent=2) + "\n"
    )
    print(f"wrote {os.path.join(args.out, 'ber.csv')} ({len(rows) - 1} rows)")
    return 0


def _write_csv(path: str, header: str, columns) -> None:
    lines = [header]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _best_effort_plot(path: str, plotter) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7, 4))
        plotter(ax)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    except Exception as exc:  # noqa: BLE001 - plots are best-effort only
        print(f"plot skipped ({path}): {exc}", file=sys.stderr)


def cmd_waveform(args, overrides: dict) -> int:
    cfg = effective_config(args, overrides)
    system = cfg["run.systems"].split(",")[0].strip()
    if system not in SYSTEMS:
        raise ConfigError(f"run.systems: unknown system {system!r}")
    exp = build_experiment(cfg, system)

    symbol_text = cfg["waveform.symbols"].strip()
    if not symbol_text:
        raise ConfigError("waveform.symbols is empty")
    values = np.array([float(v) for v in symbol_text.split(",") if v.strip()])
    if values.size == 0:
        raise ConfigError("waveform.symbols is empty")
    symbols = SymbolSequence(values)

    pulse = _pulse_for(exp)
    shaped = shape_pulses(symbols, pulse)
    seg = min(_parse_int(cfg, "waveform.spectrum_segment"), len(shaped))
    freqs, density = power_spectrum(shaped, seg)
    embed = delay_embedding(
        shaped, symbols, _parse_int(cfg, "waveform.embed_delay"), exp.f_hz
    )

    os.makedirs(args.out, exist_ok=True)
    t_pulse = pulse.t_start + np.arange(len(pulse)) / pulse.sample_rate
    _write_csv(
        os.path.join(args.out, "waveform.csv"), "t,amplitude", (t_pulse, pulse.samples)
    )
    _write_csv(
        os.path.join(args.out, "spectrum.csv"), "freq_hz,density", (freqs, density)
    )
    _write_csv(
        os.path.join(args.out, "embedding.csv"),
        "x,y,s",
        (embed[:, 0], embed[:, 1], embed[:, 2]),
    )

    _best_effort_plot(
        os.path.join(args.out, "waveform.svg"),
        lambda ax: (ax.plot(t_pulse, pulse.samples), ax.set_xlabel("t [s]")),
    )
    _best_effort_plot(
        os.path.join(args.out, "spectrum.svg"),
        lambda ax: (ax.semilogy(freqs, np.maximum(density, 1e-18)),
                    ax.set_xlabel("frequency [Hz]")),
    )
    _best_effort_plot(
        os.path.join(args.out, "embedding.svg"),
        lambda ax: ax.scatter(embed[:, 0], embed[:, 1], c=embed[:, 2], s=2),
    )
    print(f"wrote waveform artifacts to {args.out}")
    return 0


def cmd_selftest(args) -> int:
    results = run_selftest(inject=args.inject_fault)
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        suffix = f" ({detail})" if detail else ""
        print(f"{status} {name}{suffix}")
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 2


_OVERRIDE_RE = re.compile(r"^--([a-z][a-z0-9_.]*)=(.*)$")


def _split_overrides(argv):
    """Pull repeated --dotted.key=value flags out of the raw argument list."""
    rest, overrides = [], {}
    for arg in argv:
        m = _OVERRIDE_RE.match(arg)
        if m and "." in m.group(1):
            overrides[m.group(1)] = m.group(2)
        else:
            rest.append(arg)
    return rest, overrides


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    argv, overrides = _split_overrides(argv)

    parser = argparse.ArgumentParser(
        prog="chaoscomm",
        description="Chaotic pulse-shaping communication simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--preset", choices=sorted(PRESETS))

    p_ber = sub.add_parser("ber", help="run BER sweeps, write CSV + manifest")
    add_common(p_ber)
    p_ber.add_argument("--snr", help="comma list of SNR dB values, or 'inf'")
    p_ber.add_argument("--paths", choices=("single", "two"))
    p_ber.add_argument("--system", help="comma list of systems to run")

    p_wave = sub.add_parser("waveform", help="export waveform/spectrum/embedding")
    add_common(p_wave)

    p_self = sub.add_parser("selftest", help="run built-in invariant checks")
    p_self.add_argument("--inject-fault", help="corrupt a named quantity (testing)")

    try:
        args = parser.parse_args(argv)
        if args.command == "ber":
            return cmd_ber(args, overrides)
        if args.command == "waveform":
            return cmd_waveform(args, overrides)
        return cmd_selftest(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - map any runtime failure to exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())
