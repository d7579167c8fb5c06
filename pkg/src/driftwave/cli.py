"""Command-line surface: estimate | denoise | bench | tvscale | select | bounds.

Every subcommand is a pure function of its input files, flags and --seed;
repeated invocations emit byte-identical output.  Exit codes: 0 success,
2 input error (unreadable or malformed data), 3 configuration error.
The environment variable DRIFTWAVE_LOG sets the log level, nothing else.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .bench import NoiseSpec, SignalSpec, bound_profile, generate_signal, make_method, run_online_eval
from .denoise import DenoiseConfig, denoise_signal, estimate_latest
from .errors import (
    DomainError,
    DriftwaveError,
    EmptyPanel,
    LengthMismatch,
    NonFiniteValue,
    ParseError,
    RaggedPanel,
    TooShort,
)
from .selection import ingest_panel, select
from .tvstudy import TVStudySpec, run_tv_study

log = logging.getLogger("driftwave")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3

_INPUT_ERRORS = (
    ParseError,
    NonFiniteValue,
    RaggedPanel,
    EmptyPanel,
    TooShort,
    LengthMismatch,
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
)


class _ConfigError(Exception):
    pass


def _read_series(path: str) -> np.ndarray:
    """One observation per line, or "t,value" rows; oldest first; '-' = stdin."""
    text = sys.stdin.read() if path == "-" else open(path).read()
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cell = line.split(",")[-1]
        if lineno == 1:
            try:
                float(cell)
            except ValueError:
                continue  # header row
        try:
            values.append(float(cell))
        except ValueError:
            raise ParseError(lineno, f"bad value {cell!r}") from None
        if not np.isfinite(values[-1]):
            raise NonFiniteValue(lineno, f"value {cell!r} is not finite")
    if not values:
        raise ParseError(1, "no observations found")
    return np.array(values)


def _parse_sigma(text: str):
    if text.lower() == "mad":
        return "mad"
    try:
        return float(text)
    except ValueError:
        raise _ConfigError(f"--sigma must be a number or 'mad', got {text!r}") from None


def _denoise_config(args) -> DenoiseConfig:
    try:
        return DenoiseConfig(
            family=args.family,
            sigma=_parse_sigma(args.sigma),
            delta=args.delta,
            lambda_override=args.lambda_override,
            boundary=args.boundary,
        )
    except (ValueError, KeyError) as exc:
        raise _ConfigError(str(exc)) from exc


def _load_spec(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(spec, dict):
        raise _ConfigError(f"{path}: spec must be a JSON object")
    return spec


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_to_text(header: list[str], rows: list[tuple], fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [
            ",".join(repr(float(c)) if isinstance(c, float) else str(c) for c in row)
            for row in rows
        ]
        return "\n".join(lines) + "\n"
    records = [
        {k: (float(c) if isinstance(c, float) else c) for k, c in zip(header, row)}
        for row in rows
    ]
    return json.dumps(records, indent=2) + "\n"


def _require_seed(args):
    if args.seed is None:
        raise _ConfigError("--seed is required for stochastic subcommands")


def _signal_from_spec(spec: dict) -> SignalSpec:
    try:
        return SignalSpec(**spec)
    except (TypeError, ValueError) as exc:
        raise _ConfigError(f"bad signal spec: {exc}") from exc


def _noise_from_spec(spec: dict) -> NoiseSpec:
    try:
        return NoiseSpec(kind=spec.get("kind", "uniform"), levels=tuple(spec["levels"]))
    except (TypeError, ValueError, KeyError) as exc:
        raise _ConfigError(f"bad noise spec: {exc}") from exc


def cmd_estimate(args) -> int:
    cfg = _denoise_config(args)
    y = _read_series(args.series)
    est = estimate_latest(y, cfg)
    payload = {
        "value": est.value,
        "lambda_used": est.lambda_used,
        "sigma_used": est.sigma_used,
        "n_used": est.n_used,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_denoise(args) -> int:
    cfg = _denoise_config(args)
    y = _read_series(args.series)
    values = denoise_signal(y, cfg)
    t_start = len(y) - len(values) + 1
    if args.format == "json":
        payload = {"t": list(range(t_start, len(y) + 1)), "values": [float(v) for v in values]}
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        rows = [(t_start + i, float(v)) for i, v in enumerate(values)]
        _emit(_rows_to_text(["t", "value"], rows, "csv"), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    _require_seed(args)
    spec = _load_spec(args.spec)
    signal = _signal_from_spec(spec.get("signal", {}))
    noise = _noise_from_spec(spec.get("noise", {}))
    trials = args.trials if args.trials is not None else int(spec.get("trials", 5))
    try:
        methods = [make_method(m) for m in spec.get("methods", [])]
        report = run_online_eval(
            signal,
            noise,
            methods,
            trials=trials,
            base_seed=args.seed,
            delta=float(spec.get("delta", 0.1)),
            threads=args.threads,
        )
    except (ValueError, KeyError) as exc:
        raise _ConfigError(str(exc)) from exc
    if args.format == "json":
        _emit(_rows_to_text(["method", "noise_level", "mean_mse", "std_mse"], report.rows(), "json"), args.out)
    else:
        _emit(report.to_csv(), args.out)
    return EXIT_OK


def cmd_tvscale(args) -> int:
    _require_seed(args)
    raw = _load_spec(args.spec)
    try:
        spec = TVStudySpec(
            tv_radius=float(raw["tv_radius"]),
            sigma=float(raw["sigma"]),
            n_grid=tuple(int(n) for n in raw["n_grid"]),
            trials=int(raw.get("trials", 10)),
            estimator=raw.get("estimator", {"kind": "wavelet", "family": "haar"}),
            delta=float(raw.get("delta", 0.1)),
        )
        fit = run_tv_study(spec, base_seed=args.seed, threads=args.threads)
    except (ValueError, KeyError) as exc:
        raise _ConfigError(str(exc)) from exc
    if args.format == "json":
        rows = [
            (n, float(fit.mean_sq[i]), float(fit.std_sq[i]), float(fit.mean_abs[i]),
             float(fit.std_abs[i]), fit.exponent_sq, fit.exponent_abs)
            for i, n in enumerate(fit.n_grid)
        ]
        header = ["n", "mean_r_sq", "std_r_sq", "mean_r_abs", "std_r_abs", "exponent_sq", "exponent_abs"]
        _emit(_rows_to_text(header, rows, "json"), args.out)
    else:
        _emit(fit.to_csv(), args.out)
    return EXIT_OK


def cmd_select(args) -> int:
    cfg = _denoise_config(args)
    if args.panel == "-":
        panel = ingest_panel(sys.stdin)
    else:
        with open(args.panel) as fh:
            panel = ingest_panel(fh)
    result = select(panel, cfg, clamp=args.clamp)
    _emit(result.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    spec = _load_spec(args.spec)
    signal = _signal_from_spec(spec.get("signal", {}))
    noise = _noise_from_spec(spec.get("noise", {}))
    if signal.stochastic:
        _require_seed(args)
    theta = generate_signal(signal, args.seed if args.seed is not None else 0)
    families = tuple(spec.get("families", ("haar", "db8")))
    try:
        profile = bound_profile(
            theta, noise, families,
            delta=float(spec.get("delta", 0.1)),
            boundary=spec.get("boundary", "reflect"),
        )
    except (ValueError, KeyError) as exc:
        raise _ConfigError(str(exc)) from exc
    if args.format == "json":
        rows = [(fam, lv, profile.value(fam, lv)) for fam in profile.families for lv in profile.levels]
        _emit(_rows_to_text(["family", "noise_level", "avg_bound"], rows, "json"), args.out)
    else:
        _emit(profile.to_csv(), args.out)
    return EXIT_OK


def _add_denoise_flags(p: argparse.ArgumentParser):
    p.add_argument("--family", default="haar", help="wavelet family: haar, db2..db8")
    p.add_argument("--sigma", default="mad", help="noise scale, or 'mad' to estimate")
    p.add_argument("--delta", type=float, default=0.1, help="failure probability in (0,1)")
    p.add_argument("--lambda", dest="lambda_override", type=float, default=None,
                   help="explicit soft threshold, bypassing the default")
    p.add_argument("--boundary", default="reflect", choices=["reflect", "periodic"])


def _add_io_flags(p: argparse.ArgumentParser, formats=("csv", "json"), default="csv"):
    p.add_argument("--format", choices=list(formats), default=default)
    p.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftwave", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate the latest value of a noisy series")
    p.add_argument("series", help="observation file, oldest first ('-' for stdin)")
    _add_denoise_flags(p)
    _add_io_flags(p, formats=("json",), default="json")
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("denoise", help="denoise the most recent dyadic window")
    p.add_argument("series", help="observation file, oldest first ('-' for stdin)")
    _add_denoise_flags(p)
    _add_io_flags(p)
    p.set_defaults(fn=cmd_denoise)

    p = sub.add_parser("bench", help="run the synthetic online-evaluation benchmark")
    p.add_argument("spec", help="JSON benchmark spec (see README)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None, help="override the spec's trial count")
    p.add_argument("--threads", type=int, default=1)
    _add_io_flags(p)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("tvscale", help="risk-scaling study over bounded-variation truths")
    p.add_argument("spec", help="JSON study spec (see README)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    _add_io_flags(p)
    p.set_defaults(fn=cmd_tvscale)

    p = sub.add_parser("select", help="pick the model with the smallest denoised latest loss")
    p.add_argument("panel", help="loss panel CSV: header 't,<id1>,<id2>,...' ('-' for stdin)")
    _add_denoise_flags(p)
    p.add_argument("--clamp", action="store_true", help="clamp estimates to each series' observed range")
    _add_io_flags(p, formats=("json",), default="json")
    p.set_defaults(fn=cmd_select)

    p = sub.add_parser("bounds", help="average sparsity bound per family and noise level")
    p.add_argument("spec", help="JSON bounds spec (see README)")
    p.add_argument("--seed", type=int, default=None)
    _add_io_flags(p)
    p.set_defaults(fn=cmd_bounds)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("DRIFTWAVE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _ConfigError as exc:
        log.error("%s", exc)
        print(f"driftwave: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError,) as exc:
        print(f"driftwave: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _INPUT_ERRORS as exc:
        print(f"driftwave: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DriftwaveError as exc:
        print(f"driftwave: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
