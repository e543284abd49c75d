"""Command-line front end.

Subcommands::

    twinbeam simulate       closed-form noise spectrum -> CSV (+ optional SVG)
    twinbeam fit-power      linear + square-root-law fit of a power curve
    twinbeam infer-squeeze  two-step quantum/classical decomposition per bin
    twinbeam sweep          single-beam noise at one frequency vs pump

Configuration comes from an optional JSON document (``--config`` or the
``TWINBEAM_CONFIG`` environment variable) overridden by command-line flags;
flags win.  Every command validates its full configuration before writing
any output.  Exit codes: 0 success, 1 validation/parse error, 2 numerical
non-convergence, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import _svg
from .detection import TwoStepReading, infer_squeezing, normalize_to_snl
from .errors import TwinBeamError, UnphysicalInferenceWarning
from .fitting import PowerDataset, bootstrap_power_fit, fit_linear, fit_power_curve
from .opo import (
    CavityParams,
    DetectionChain,
    NoiseSpectrum,
    single_beam_spectrum,
    to_db,
    twin_difference_spectrum,
)
from .synth import TraceGenConfig, synth_noise_trace

CONFIG_ENV_VAR = "TWINBEAM_CONFIG"
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NONCONVERGED = 2
EXIT_IO = 3

SPECTRUM_HEADER = "freq_hz,linear,db"
POWER_HEADER = "p_pump_mw,p_out_mw"


class _CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; remap to the validation code
    def error(self, message):
        raise _CliError(message, EXIT_VALIDATION)


# defaults reproduce the reference device: 5% output coupler, 0.1% HR facet,
# 0.3% extra loss (escape efficiency 0.926), 90% total detection, 17.5 MHz
# linewidth, spectra over 1-50 MHz
_CAVITY_KEYS = ("t_out", "t_hr", "loss_extra", "linewidth_hz")
_COMMON_DEFAULTS = {
    "t_out": 0.05,
    "t_hr": 0.001,
    "loss_extra": 0.003,
    "linewidth_hz": 17.5e6,
}
_DEFAULTS = {
    "simulate": {
        **_COMMON_DEFAULTS,
        "model": "twin-diff",
        "eta_pd": 0.90,
        "eta_prop": 1.0,
        "s": 4.706,
        "f_min_hz": 1e6,
        "f_max_hz": 50e6,
        "n_bins": 200,
        "jitter_db": 0.0,
        "rbw_hz": 100e3,
        "vbw_hz": 100.0,
        "seed": 0,
        "out": None,
        "svg": None,
    },
    "fit-power": {
        "init_pth_mw": None,
        "init_eps": None,
        "window_factor": 13.0,
        "weighting": "uniform",
        "bootstrap": False,
        "bootstrap_replicates": 500,
        "seed": 0,
        "json": None,
    },
    "infer-squeeze": {
        "band_lo_hz": None,
        "band_hi_hz": None,
        "out": None,
    },
    "sweep": {
        **_COMMON_DEFAULTS,
        "omega_hz": 35e6,
        "s_min": 1.0,
        "s_max": 16.0,
        "n_s": 31,
        "s_values": None,
        "out": None,
        "svg": None,
    },
}


def _load_config(path: str | None) -> dict:
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    if not os.path.exists(path):
        raise _CliError(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except json.JSONDecodeError as exc:
        raise _CliError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise _CliError(f"config file {path} must hold a JSON object")
    return config


def _merge(command: str, args: argparse.Namespace) -> dict:
    merged = dict(_DEFAULTS[command])
    config = _load_config(getattr(args, "config", None))
    for key, value in config.items():
        key = key.replace("-", "_")
        if key not in merged:
            raise _CliError(f"unknown config key for {command}: {key!r}")
        merged[key] = value
    for key in merged:
        flag_value = getattr(args, key, None)
        if flag_value is not None and flag_value is not False:
            merged[key] = flag_value
    return merged


def _write_file(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _spectrum_csv(spec: NoiseSpectrum) -> str:
    rows = [SPECTRUM_HEADER]
    for f, v, db in zip(spec.freqs_hz, spec.values, spec.values_db):
        rows.append(f"{f:.10g},{v:.12g},{db:.4f}")
    return "\n".join(rows) + "\n"


def _read_spectrum_csv(path: str) -> NoiseSpectrum:
    if not os.path.exists(path):
        raise _CliError(f"input file not found: {path}")
    freqs, values = [], []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("freq_hz,"):
        raise _CliError(f"{path}:1: expected spectrum header '{SPECTRUM_HEADER}'")
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        try:
            freqs.append(float(fields[0]))
            values.append(float(fields[1]))
        except (IndexError, ValueError):
            raise _CliError(f"{path}:{number}: malformed spectrum row {line!r}")
    if not freqs:
        raise _CliError(f"{path}: no data rows")
    try:
        return NoiseSpectrum(np.asarray(freqs), np.asarray(values))
    except TwinBeamError as exc:
        raise _CliError(f"{path}: {exc}")


def _read_power_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    if not os.path.exists(path):
        raise _CliError(f"input file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != POWER_HEADER:
        raise _CliError(f"{path}:1: expected power header '{POWER_HEADER}'")
    pump, out = [], []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise _CliError(f"{path}:{number}: expected two columns, got {line!r}")
        try:
            pump.append(float(fields[0]))
            out.append(float(fields[1]))
        except ValueError:
            raise _CliError(f"{path}:{number}: malformed power row {line!r}")
    if len(pump) < 4:
        raise _CliError(f"{path}: need at least 4 data rows, found {len(pump)}")
    return np.asarray(pump), np.asarray(out)


def _cavity(cfg: dict) -> CavityParams:
    return CavityParams(
        t_out=float(cfg["t_out"]),
        t_hr=float(cfg["t_hr"]),
        loss_extra=float(cfg["loss_extra"]),
        linewidth_hz=float(cfg["linewidth_hz"]),
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _merge("simulate", args)
    if cfg["out"] is None:
        raise _CliError("simulate requires an output path (--out)")
    if cfg["model"] not in ("twin-diff", "single-beam"):
        raise _CliError(f"unknown model {cfg['model']!r}")
    cavity = _cavity(cfg)
    det = DetectionChain(eta_pd=float(cfg["eta_pd"]), eta_prop=float(cfg["eta_prop"]))
    trace_cfg = TraceGenConfig(
        seed=int(cfg["seed"]),
        jitter_db=float(cfg["jitter_db"]),
        rbw_hz=float(cfg["rbw_hz"]),
        vbw_hz=float(cfg["vbw_hz"]),
        n_bins=int(cfg["n_bins"]),
        f_min_hz=float(cfg["f_min_hz"]),
        f_max_hz=float(cfg["f_max_hz"]),
    )
    freqs = trace_cfg.freqs_hz
    if cfg["model"] == "twin-diff":
        model = twin_difference_spectrum(
            freqs, cavity, det, rbw_hz=trace_cfg.rbw_hz, vbw_hz=trace_cfg.vbw_hz
        )
    else:
        model = single_beam_spectrum(
            freqs, cavity, float(cfg["s"]),
            rbw_hz=trace_cfg.rbw_hz, vbw_hz=trace_cfg.vbw_hz,
        )
    if trace_cfg.jitter_db > 0:
        # analyzer-style trace: RBW smoothing plus dB jitter, re-normalized
        spec = normalize_to_snl(*synth_noise_trace(model, None, trace_cfg))
    else:
        spec = model
    csv_text = _spectrum_csv(spec)
    svg_text = None
    if cfg["svg"]:
        svg_text = _svg.line_plot(
            spec.freqs_hz / 1e6,
            spec.values_db,
            title=f"{cfg['model']} noise spectrum",
            x_label="frequency (MHz)",
            y_label="noise relative to shot-noise limit (dB)",
            ref_y=0.0,
        )
    _write_file(cfg["out"], csv_text)
    if svg_text is not None:
        _write_file(cfg["svg"], svg_text)
    idx = int(np.argmin(spec.values))
    print(
        f"wrote {len(spec)} bins to {cfg['out']} "
        f"(minimum {to_db(spec.values[idx]):.4f} dB at {spec.freqs_hz[idx]:.6g} Hz)"
    )
    return EXIT_OK


def _fit_report_json(cfg, linear, nonlinear, window, boot_sigmas) -> str:
    report = {
        "method": "power_curve",
        "params": nonlinear.params,
        "sigmas": nonlinear.sigmas,
        "residual_norm": nonlinear.residual_norm,
        "converged": nonlinear.converged,
        "window": window,
        "seed": int(cfg["seed"]),
        "iterations": nonlinear.iterations,
        "linear": {
            "params": linear.params,
            "sigmas": linear.sigmas,
            "residual_norm": linear.residual_norm,
        },
    }
    if boot_sigmas is not None:
        report["bootstrap_sigmas"] = boot_sigmas
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _cmd_fit_power(args: argparse.Namespace) -> int:
    cfg = _merge("fit-power", args)
    pump, out = _read_power_csv(args.data)
    try:
        data = PowerDataset(pump, out)
    except TwinBeamError as exc:
        raise _CliError(f"{args.data}: {exc}")
    linear = fit_linear(data)
    p_th0 = cfg["init_pth_mw"]
    if p_th0 is None:
        x0 = linear.params["x_intercept"]
        p_th0 = x0 if np.isfinite(x0) and x0 > 0 else float(np.median(pump)) / 4.0
    eps0 = cfg["init_eps"]
    if eps0 is None:
        slope = linear.params["slope"]
        eps0 = slope if slope > 0 else 1.0
    window_factor = cfg["window_factor"]
    if window_factor is not None and window_factor <= 0:
        window_factor = None
    try:
        result = fit_power_curve(
            data,
            (float(p_th0), float(eps0)),
            window_factor=window_factor,
            weighting=cfg["weighting"],
        )
    except TwinBeamError as exc:
        raise _CliError(str(exc))
    n_used = (
        int(np.sum(pump <= window_factor * p_th0)) if window_factor else len(data)
    )
    window = {
        "factor": window_factor,
        "threshold_guess_mw": float(p_th0),
        "n_used": n_used,
        "n_total": len(data),
    }
    boot_sigmas = None
    if cfg["bootstrap"]:
        boot_sigmas = bootstrap_power_fit(
            data,
            (float(p_th0), float(eps0)),
            n_replicates=int(cfg["bootstrap_replicates"]),
            seed=int(cfg["seed"]),
            window_factor=window_factor,
            weighting=cfg["weighting"],
        )
    print(
        "linear fit:      slope = {slope:.6g} +- {s_slope:.3g}, "
        "x-intercept = {x0:.6g} +- {s_x0:.3g} mW".format(
            slope=linear.params["slope"],
            s_slope=linear.sigmas["slope"],
            x0=linear.params["x_intercept"],
            s_x0=linear.sigmas["x_intercept"],
        )
    )
    print(
        "power-curve fit: P_th = {pth:.6g} +- {s_pth:.3g} mW, "
        "epsilon = {eps:.6g} +- {s_eps:.3g}".format(
            pth=result.params["p_threshold_mw"],
            s_pth=result.sigmas["p_threshold_mw"],
            eps=result.params["epsilon"],
            s_eps=result.sigmas["epsilon"],
        )
    )
    print(
        f"window: {n_used}/{len(data)} points, "
        f"residual norm = {result.residual_norm:.6g}, "
        f"converged = {'yes' if result.converged else 'NO'} "
        f"({result.iterations} iterations)"
    )
    if boot_sigmas is not None:
        print(
            "bootstrap sigma: P_th {0:.3g} mW, epsilon {1:.3g} "
            "({2:.0f} converged replicates)".format(
                boot_sigmas["p_threshold_mw"],
                boot_sigmas["epsilon"],
                boot_sigmas["n_converged"],
            )
        )
    if cfg["json"]:
        _write_file(
            cfg["json"], _fit_report_json(cfg, linear, result, window, boot_sigmas)
        )
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


def _cmd_infer_squeeze(args: argparse.Namespace) -> int:
    cfg = _merge("infer-squeeze", args)
    step1 = _read_spectrum_csv(args.step1)
    step2 = _read_spectrum_csv(args.step2)
    try:
        if not step1.same_grid(step2):
            raise _CliError("step I and step II spectra are on different grids")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UnphysicalInferenceWarning)
            s_s = infer_squeezing(TwoStepReading(step1.values, step2.values))
    except TwinBeamError as exc:
        raise _CliError(str(exc))
    v_ex = step1.values - s_s
    flagged = s_s <= 0
    lo = cfg["band_lo_hz"] if cfg["band_lo_hz"] is not None else step1.freqs_hz[0]
    hi = cfg["band_hi_hz"] if cfg["band_hi_hz"] is not None else step1.freqs_hz[-1]
    if not lo < hi:
        raise _CliError("summary band must satisfy lo < hi")
    band = (step1.freqs_hz >= lo) & (step1.freqs_hz <= hi)
    if not band.any():
        raise _CliError("summary band contains no bins")
    if cfg["out"]:
        rows = ["freq_hz,s_s,v_ex,flagged"]
        for f, s_val, v_val, flag in zip(step1.freqs_hz, s_s, v_ex, flagged):
            rows.append(f"{f:.10g},{s_val:.12g},{v_val:.12g},{int(flag)}")
        _write_file(cfg["out"], "\n".join(rows) + "\n")
    print(
        f"band [{lo:.6g}, {hi:.6g}] Hz: mean S_s = {float(np.mean(s_s[band])):.6f}, "
        f"mean V_ex = {float(np.mean(v_ex[band])):.6f}, "
        f"flagged bins = {int(flagged.sum())}/{len(step1)}"
    )
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _merge("sweep", args)
    if cfg["out"] is None:
        raise _CliError("sweep requires an output path (--out)")
    cavity = _cavity(cfg)
    omega = float(cfg["omega_hz"])
    if not omega > 0:
        raise _CliError("omega_hz must be positive")
    if cfg["s_values"] is not None:
        try:
            s_list = [float(tok) for tok in str(cfg["s_values"]).split(",") if tok.strip()]
        except ValueError:
            raise _CliError(f"cannot parse s_values {cfg['s_values']!r}")
    else:
        n_s = int(cfg["n_s"])
        if n_s < 2:
            raise _CliError("n_s must be >= 2")
        s_list = list(np.linspace(float(cfg["s_min"]), float(cfg["s_max"]), n_s))
    if not s_list or min(s_list) < 1.0:
        raise _CliError("all threshold factors must be >= 1")
    s_arr = np.asarray(sorted(s_list))
    values = np.array(
        [single_beam_spectrum([omega], cavity, s).values[0] for s in s_arr]
    )
    rows = ["s,linear,db"]
    for s, v in zip(s_arr, values):
        rows.append(f"{s:.10g},{v:.12g},{to_db(v):.4f}")
    csv_text = "\n".join(rows) + "\n"
    svg_text = None
    if cfg["svg"]:
        svg_text = _svg.line_plot(
            s_arr,
            to_db(values),
            title=f"single-beam noise at {omega / 1e6:.4g} MHz vs pump",
            x_label="threshold factor s",
            y_label="noise relative to shot-noise limit (dB)",
            ref_y=0.0,
        )
    _write_file(cfg["out"], csv_text)
    if svg_text is not None:
        _write_file(cfg["svg"], svg_text)
    print(f"wrote {s_arr.size} rows to {cfg['out']}")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="twinbeam",
        description="Twin-beam OPO noise spectra: simulate, fit, infer, sweep.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (flags win)")
        p.add_argument("--seed", type=int, help="seed for stochastic steps")

    sim = sub.add_parser("simulate", description="Emit a closed-form noise spectrum.")
    add_common(sim)
    sim.add_argument("--model", choices=["twin-diff", "single-beam"])
    for name in _CAVITY_KEYS + ("eta_pd", "eta_prop", "s", "f_min_hz", "f_max_hz",
                                "jitter_db", "rbw_hz", "vbw_hz"):
        sim.add_argument(f"--{name.replace('_', '-')}", type=float, dest=name)
    sim.add_argument("--n-bins", type=int, dest="n_bins")
    sim.add_argument("--out", help="output CSV path")
    sim.add_argument("--svg", help="optional SVG plot path")
    sim.set_defaults(handler=_cmd_simulate)

    fit = sub.add_parser("fit-power", description="Fit a pump/output power curve.")
    add_common(fit)
    fit.add_argument("data", help="CSV file with header p_pump_mw,p_out_mw")
    fit.add_argument("--init-pth-mw", type=float, dest="init_pth_mw")
    fit.add_argument("--init-eps", type=float, dest="init_eps")
    fit.add_argument("--window-factor", type=float, dest="window_factor",
                     help="fit only P_p <= factor * P_th guess; <= 0 disables")
    fit.add_argument("--weighting", choices=["uniform", "inverse-y"])
    fit.add_argument("--bootstrap", action="store_true", default=None)
    fit.add_argument("--bootstrap-replicates", type=int, dest="bootstrap_replicates")
    fit.add_argument("--json", help="write the full-precision fit report here")
    fit.set_defaults(handler=_cmd_fit_power)

    inf = sub.add_parser(
        "infer-squeeze",
        description="Two-step loss-based quantum/classical noise decomposition.",
    )
    add_common(inf)
    inf.add_argument("step1", help="normalized spectrum CSV, single beam")
    inf.add_argument("step2", help="normalized spectrum CSV, 50/50 mixed beams")
    inf.add_argument("--band-lo-hz", type=float, dest="band_lo_hz")
    inf.add_argument("--band-hi-hz", type=float, dest="band_hi_hz")
    inf.add_argument("--out", help="per-bin output CSV path")
    inf.set_defaults(handler=_cmd_infer_squeeze)

    swp = sub.add_parser(
        "sweep", description="Single-beam noise at one frequency across pump powers."
    )
    add_common(swp)
    for name in _CAVITY_KEYS + ("omega_hz", "s_min", "s_max"):
        swp.add_argument(f"--{name.replace('_', '-')}", type=float, dest=name)
    swp.add_argument("--n-s", type=int, dest="n_s")
    swp.add_argument("--s-values", dest="s_values", help="comma-separated list, overrides the range")
    swp.add_argument("--out", help="output CSV path")
    swp.add_argument("--svg", help="optional SVG plot path")
    swp.set_defaults(handler=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except TwinBeamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
