"""Command line front end emitting spectra, holograms, simulated counts and fits.

Plot-data emission only: every command writes CSV/JSON/PGM files for
external tooling.  All outputs are deterministic given the full flag set
and carry their producing parameters in a header or JSON sidecar.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile
from pathlib import Path

import numpy as np

from .estimate import (
    DEFAULT_GAMMA_BOUNDS,
    METHOD_LEAST_SQUARES,
    METHOD_M_SUM,
    batch_csv,
    estimate_gamma_fit,
    estimate_gamma_msum,
    rapidity_and_velocity,
)
from .hologram import export_hologram, generate_hologram, hologram_filename
from .relativity import GAMMA_MAX, frame_from_gamma
from .simulate import (
    SUBTRACT_MODES,
    NoiseModel,
    count_spectrum_sidecar,
    count_spectrum_to_csv,
    counts_conditional,
    read_count_spectrum,
    sidecar_path,
    simulate_counts,
)
from .spectrum import (
    OamWindow,
    conditional_slice,
    joint_spectrum,
    joint_spectrum_to_csv,
    joint_spectrum_to_json_dict,
    measurement_sum,
    mode_count_closed,
    mode_count_empirical,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Invalid flag or config value; maps to exit code 2."""


def _parse_float(text):
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"expected a number, got {text!r}") from None


def _parse_int(text):
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"expected an integer, got {text!r}") from None


def _parse_bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _parse_gamma_list(text):
    tokens = [tok for tok in re.split(r"[,\s]+", str(text).strip()) if tok]
    return [_parse_float(tok) for tok in tokens]


def _parse_str(text):
    return str(text)


# Per-command option tables: dest -> (converter, default).  CLI flags and
# config-file keys share these converters; flags override the config file.
_COMMON = {
    "out": (_parse_str, "."),
    "config": (_parse_str, None),
}

OPTION_TABLES = {
    "spectrum": {
        **_COMMON,
        "gamma": (_parse_float, None),
        "half_width": (_parse_int, 20),
        "n_modes": (_parse_int, 1),
        "format": (_parse_str, "csv"),
    },
    "sweep": {
        **_COMMON,
        "gamma": (_parse_gamma_list, None),
    },
    "hologram": {
        **_COMMON,
        "l": (_parse_int, None),
        "gamma": (_parse_float, None),
        "width": (_parse_int, 512),
        "height": (_parse_int, 512),
        "extent": (_parse_float, 1.0),
        "format": (_parse_str, "pgm"),
    },
    "simulate": {
        **_COMMON,
        "gamma": (_parse_float, None),
        "half_width": (_parse_int, 20),
        "half_width_a": (_parse_int, None),
        "pair_rate": (_parse_float, 1.0e4),
        "accidental_rate": (_parse_float, 5.0),
        "integration": (_parse_float, 1.0),
        "seed": (_parse_int, 0),
    },
    "estimate": {
        **_COMMON,
        "counts": (_parse_str, None),
        "l_a": (_parse_int, 0),
        "method": (_parse_str, "both"),
        "subtract": (_parse_str, "none"),
        "gamma_min": (_parse_float, DEFAULT_GAMMA_BOUNDS[0]),
        "gamma_max": (_parse_float, DEFAULT_GAMMA_BOUNDS[1]),
    },
    "experiment": {
        **_COMMON,
        "gamma": (_parse_gamma_list, [1.0, 2.0, 5.0, 10.0, 20.0]),
        "seed": (_parse_int, 42),
        "runs": (_parse_int, 1),
        "half_width": (_parse_int, 40),
        "pair_rate": (_parse_float, 1.0e4),
        "accidental_rate": (_parse_float, 5.0),
        "integration": (_parse_float, 1.0),
        "subtract": (_parse_str, "both"),
        "noiseless": (_parse_bool, False),
        "gamma_min": (_parse_float, DEFAULT_GAMMA_BOUNDS[0]),
        "gamma_max": (_parse_float, DEFAULT_GAMMA_BOUNDS[1]),
    },
}

REQUIRED = {
    "spectrum": ("gamma",),
    "sweep": ("gamma",),
    "hologram": ("l", "gamma"),
    "simulate": ("gamma",),
    "estimate": ("counts",),
    "experiment": (),
}


def _load_config(path, allowed):
    cfg = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in allowed or key == "config":
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        cfg[key] = value
    return cfg


def _resolve_options(command, args):
    """Merge CLI flags over config-file values over defaults."""
    table = OPTION_TABLES[command]
    raw = {key: getattr(args, key) for key in table}
    cfg = _load_config(raw["config"], set(table)) if raw["config"] else {}
    opts = {}
    for key, (convert, default) in table.items():
        if raw[key] is not None:
            opts[key] = convert(raw[key])
        elif key in cfg:
            opts[key] = convert(cfg[key])
        else:
            opts[key] = default
    for key in REQUIRED[command]:
        if opts[key] is None:
            raise UsageError(f"--{key.replace('_', '-')} is required")
    return opts


def _check_gamma_flag(value, flag="--gamma"):
    if not np.isfinite(value) or value < 1.0:
        raise UsageError(f"{flag} must be >= 1, got {value:g}")
    if value > GAMMA_MAX:
        raise UsageError(f"{flag} must be <= {GAMMA_MAX:g}, got {value:g}")
    return float(value)


def _check_choice(value, choices, flag):
    if value not in choices:
        raise UsageError(f"{flag} must be one of {', '.join(choices)}; got {value!r}")
    return value


def _check_int_min(value, flag, minimum):
    if value < minimum:
        raise UsageError(f"{flag} must be >= {minimum}, got {value}")
    return int(value)


def _write_atomic(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data if isinstance(data, bytes) else data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _emit(path: Path, data) -> None:
    _write_atomic(path, data)
    print(f"wrote {path}")


def cmd_spectrum(opts) -> int:
    gamma = _check_gamma_flag(opts["gamma"])
    half_width = _check_int_min(opts["half_width"], "--half-width", 0)
    n_modes = _check_int_min(opts["n_modes"], "--n-modes", 1)
    fmt = _check_choice(opts["format"], ("csv", "json"), "--format")
    window = OamWindow.symmetric(half_width)
    spec = joint_spectrum(gamma, window, window, n_modes)
    cond = conditional_slice(0, window, gamma)
    out = Path(opts["out"])
    tag = f"g{gamma:g}"
    if fmt == "csv":
        _emit(out / f"spectrum_{tag}.csv", joint_spectrum_to_csv(spec))
        _emit(
            out / f"spectrum_{tag}.meta.json",
            _json_text(
                {
                    "gamma": gamma,
                    "n_modes": n_modes,
                    "window": {"a": [window.l_min, window.l_max], "b": [window.l_min, window.l_max]},
                }
            ),
        )
        cond_lines = ["l_b,value"] + [
            f"{lb},{value:.17g}" for lb, value in zip(window.indices(), cond.values)
        ]
        _emit(out / f"conditional_{tag}_la0.csv", "\n".join(cond_lines) + "\n")
        _emit(
            out / f"conditional_{tag}_la0.meta.json",
            _json_text({"gamma": gamma, "l_a": 0, "window": [window.l_min, window.l_max]}),
        )
    else:
        _emit(out / f"spectrum_{tag}.json", _json_text(joint_spectrum_to_json_dict(spec)))
        _emit(
            out / f"conditional_{tag}_la0.json",
            _json_text(
                {
                    "gamma": gamma,
                    "l_a": 0,
                    "window": [window.l_min, window.l_max],
                    "values": [float(v) for v in cond.values],
                }
            ),
        )
    return EXIT_OK


def cmd_sweep(opts) -> int:
    gammas = opts["gamma"]
    if not gammas:
        raise UsageError("--gamma must list at least one value")
    gammas = [_check_gamma_flag(g) for g in gammas]
    lines = ["gamma,omega_closed,m,eta,beta"]
    for gamma in gammas:
        frame = frame_from_gamma(gamma)
        lines.append(
            f"{gamma:.17g},{mode_count_closed(gamma):.17g},{measurement_sum(gamma):.17g},"
            f"{frame.rapidity:.17g},{frame.beta:.17g}"
        )
    out = Path(opts["out"])
    _emit(out / "sweep.csv", "\n".join(lines) + "\n")
    _emit(out / "sweep.meta.json", _json_text({"gamma": gammas}))
    return EXIT_OK


def cmd_hologram(opts) -> int:
    gamma = _check_gamma_flag(opts["gamma"])
    width = _check_int_min(opts["width"], "--width", 2)
    height = _check_int_min(opts["height"], "--height", 2)
    if not opts["extent"] > 0:
        raise UsageError(f"--extent must be positive, got {opts['extent']:g}")
    fmt = _check_choice(opts["format"], ("pgm", "csv"), "--format")
    field = generate_hologram(opts["l"], gamma, width=width, height=height, extent=opts["extent"])
    ext = "pgm" if fmt == "pgm" else "csv"
    data = export_hologram(field, "pgm8" if fmt == "pgm" else "csv")
    _emit(Path(opts["out"]) / hologram_filename(field, ext), data)
    return EXIT_OK


def _noise_model(opts) -> NoiseModel:
    try:
        return NoiseModel(
            pair_rate=opts["pair_rate"],
            accidental_rate=opts["accidental_rate"],
            integration=opts["integration"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(opts) -> int:
    gamma = _check_gamma_flag(opts["gamma"])
    half_width = _check_int_min(opts["half_width"], "--half-width", 0)
    half_width_a = opts["half_width_a"]
    if half_width_a is None:
        half_width_a = half_width
    half_width_a = _check_int_min(half_width_a, "--half-width-a", 0)
    model = _noise_model(opts)
    counts = simulate_counts(
        gamma,
        (OamWindow.symmetric(half_width_a), OamWindow.symmetric(half_width)),
        model,
        opts["seed"],
    )
    out = Path(opts["out"])
    name = f"counts_g{gamma:g}_seed{opts['seed']}"
    csv_file = out / f"{name}.csv"
    _emit(csv_file, count_spectrum_to_csv(counts))
    _emit(sidecar_path(csv_file), _json_text(count_spectrum_sidecar(counts)))
    return EXIT_OK


def _run_estimators(cond, method, bounds):
    results = []
    if method in ("m_sum", "both"):
        results.append(estimate_gamma_msum(cond))
    if method in ("least_squares", "both"):
        results.append(estimate_gamma_fit(cond, bounds))
    return results


def cmd_estimate(opts) -> int:
    method = _check_choice(opts["method"], ("m_sum", "least_squares", "both"), "--method")
    subtract = _check_choice(opts["subtract"], ("none",) + SUBTRACT_MODES, "--subtract")
    if not (opts["gamma_min"] >= 1.0 and opts["gamma_max"] > opts["gamma_min"]):
        raise UsageError(
            f"--gamma-min/--gamma-max must satisfy 1 <= min < max, "
            f"got ({opts['gamma_min']:g}, {opts['gamma_max']:g})"
        )
    counts_file = Path(opts["counts"])
    if not counts_file.exists():
        raise UsageError(f"--counts file {counts_file} does not exist")
    counts = read_count_spectrum(counts_file)
    if opts["l_a"] not in counts.window_a:
        raise UsageError(
            f"--l-a {opts['l_a']} lies outside the simulated window "
            f"[{counts.window_a.l_min}, {counts.window_a.l_max}]"
        )
    cond = counts_conditional(counts, opts["l_a"], None if subtract == "none" else subtract)
    out = Path(opts["out"])
    for result in _run_estimators(cond, method, (opts["gamma_min"], opts["gamma_max"])):
        _emit(out / f"fit_{result.method}.json", _json_text(result.to_dict()))
    return EXIT_OK


def cmd_experiment(opts) -> int:
    gammas = opts["gamma"]
    if not gammas:
        raise UsageError("--gamma must list at least one value")
    gammas = [_check_gamma_flag(g) for g in gammas]
    half_width = _check_int_min(opts["half_width"], "--half-width", 0)
    runs = _check_int_min(opts["runs"], "--runs", 1)
    subtract = _check_choice(opts["subtract"], ("none",) + SUBTRACT_MODES, "--subtract")
    if not (opts["gamma_min"] >= 1.0 and opts["gamma_max"] > opts["gamma_min"]):
        raise UsageError(
            f"--gamma-min/--gamma-max must satisfy 1 <= min < max, "
            f"got ({opts['gamma_min']:g}, {opts['gamma_max']:g})"
        )
    model = None if opts["noiseless"] else _noise_model(opts)
    bounds = (opts["gamma_min"], opts["gamma_max"])
    window_b = OamWindow.symmetric(half_width)
    window_a = OamWindow(0, 0)

    batch = []
    summary_rows = []
    for gamma in gammas:
        per_method = {METHOD_M_SUM: [], METHOD_LEAST_SQUARES: []}
        omegas = []
        for run in range(runs):
            seed = opts["seed"] + run
            if model is None:
                cond = conditional_slice(0, window_b, gamma)
            else:
                counts = simulate_counts(gamma, (window_a, window_b), model, seed)
                cond = counts_conditional(counts, 0, None if subtract == "none" else subtract)
            omegas.append(mode_count_empirical(cond))
            for result in _run_estimators(cond, "both", bounds):
                per_method[result.method].append(result)
                batch.append((seed, gamma, result))
        gamma_fit = float(np.mean([r.gamma_meas for r in per_method[METHOD_LEAST_SQUARES]]))
        eta, beta = rapidity_and_velocity(gamma_fit)
        summary_rows.append(
            {
                "gamma_encoded": gamma,
                "omega_empirical": float(np.mean(omegas)),
                "gamma_meas_m_sum": float(np.mean([r.gamma_meas for r in per_method[METHOD_M_SUM]])),
                "gamma_meas_least_squares": gamma_fit,
                "eta": eta,
                "beta": beta,
            }
        )

    summary = {
        "parameters": {
            "gamma": gammas,
            "seed": opts["seed"],
            "runs": runs,
            "half_width": half_width,
            "noiseless": opts["noiseless"],
            "subtract": subtract,
            "pair_rate": opts["pair_rate"],
            "accidental_rate": opts["accidental_rate"],
            "integration": opts["integration"],
            "gamma_bounds": list(bounds),
        },
        "results": summary_rows,
    }
    out = Path(opts["out"])
    _emit(out / "experiment_batch.csv", batch_csv(batch))
    _emit(out / "experiment_summary.json", _json_text(summary))
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "hologram": cmd_hologram,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "experiment": cmd_experiment,
}

_FLAG_HELP = {
    "gamma": "Lorentz factor (comma-separated list for sweep/experiment)",
    "half_width": "OAM detection half-width for l_b",
    "half_width_a": "OAM detection half-width for l_a (defaults to --half-width)",
    "n_modes": "source mode count used for joint-probability normalisation",
    "format": "output format",
    "out": "output directory",
    "config": "key = value file mirroring the flags; flags take precedence",
    "l": "OAM index of the projection hologram",
    "width": "hologram width in pixels",
    "height": "hologram height in pixels",
    "extent": "half-width of the sampled plane in normalised units",
    "pair_rate": "expected true coincidences at the spectrum peak",
    "accidental_rate": "expected accidental coincidences per cell",
    "integration": "exposure multiplier",
    "seed": "base random seed",
    "counts": "counts CSV produced by the simulate command",
    "l_a": "Alice projection index of the analysed slice",
    "method": "estimator: m_sum, least_squares or both",
    "subtract": "background subtraction: none, accidental, minimum or both",
    "gamma_min": "lower fit bound",
    "gamma_max": "upper fit bound",
    "runs": "seeded repetitions per encoded gamma",
    "noiseless": "skip the count simulation and use exact conditional spectra",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oamboost",
        description="Joint OAM spectra of boosted detector pairs: compute, simulate, recover gamma.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, table in OPTION_TABLES.items():
        sub = subparsers.add_parser(command)
        for key in table:
            flag = "--" + key.replace("_", "-")
            if key == "noiseless":
                sub.add_argument(flag, dest=key, action="store_const", const="true", help=_FLAG_HELP[key])
            else:
                sub.add_argument(flag, dest=key, default=None, help=_FLAG_HELP.get(key))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _resolve_options(args.command, args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
