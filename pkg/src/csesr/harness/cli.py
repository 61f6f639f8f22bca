"""Command-line entry point.

Exit codes: 0 on success, 1 when the command line or configuration is
invalid, 2 when a run fails (including a failed oracle self-check).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

from .config import PRESETS, ConfigError, load_document, scenario_from_dict, sweep_from_dict
from .export import FORMATS, ExportError, render
from .runner import run_scenario, run_sweep, synthetic_spectrum
from .selfcheck import oracle_check

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="YAML config file")
    src.add_argument("--preset", choices=PRESETS, help="bundled preset")


def _add_common(p):
    p.add_argument("--seed", type=int, help="override the base seed")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=FORMATS, default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csesr", description="Compressed-sensing ESR simulations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="emit one synthetic spectrum")
    _add_source(p)
    _add_common(p)
    p.add_argument("--sample", type=int, default=0, help="sample index within the scenario")

    for name, text in (("run", "run one scenario"), ("sweep", "run one parameter sweep")):
        p = sub.add_parser(name, help=text)
        _add_source(p)
        _add_common(p)
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--samples", type=int, help="override n_samples")

    p = sub.add_parser("oracle", help="check the solver against the exhaustive oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--tolerance", type=float, default=1e-6)
    return parser


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "samples", None) is not None:
        out["n_samples"] = args.samples
    return out


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise ExportError(f"cannot write results to {out}: {exc}") from exc


def _spectrum_text(spec, res, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "grid": spec.grid.tolist(),
            "clean_counts": spec.clean_counts.tolist(),
            "noisy_counts": spec.noisy_counts.tolist(),
            "reference_power": spec.reference_power,
            "noise_sigma": spec.noise_sigma,
            "snr": spec.snr,
            "centers": res.centers.tolist(),
            "widths": res.widths.tolist(),
            "amplitudes": res.amplitudes.tolist(),
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("frequency", "clean_counts", "noisy_counts"))
    for row in zip(spec.grid, spec.clean_counts, spec.noisy_counts):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def _load(args, data: dict, sweep: bool):
    data = {**data, **_overrides(args)}
    return sweep_from_dict(data) if sweep else scenario_from_dict(data)


def _main(args) -> int:
    if args.command == "oracle":
        check = oracle_check(args.instances, args.seed, args.tolerance)
        status = "pass" if check.passed else "FAIL"
        print(f"oracle: {status} ({check.n_instances} instances, max objective gap {check.max_gap:.3e})")
        for i, f_solver, f_oracle in check.failures:
            print(f"  instance {i}: reconstruct {f_solver!r} oracle {f_oracle!r}")
        return EXIT_OK if check.passed else EXIT_RUNTIME

    data = load_document(args.config, args.preset)
    if args.command == "simulate":
        config = _load(args, data, sweep=False)
        spec, res = synthetic_spectrum(config, args.sample)
        _emit(_spectrum_text(spec, res, args.format), args.out)
        return EXIT_OK

    if args.command == "run":
        config = _load(args, data, sweep=False)
        result = run_scenario(config, args.workers)
        _emit(render(result.rows(), args.format, config.to_dict()), args.out)
        return EXIT_OK

    spec = _load(args, data, sweep=True)
    result = run_sweep(spec, args.workers)
    _emit(render(result.rows, args.format, spec.to_dict(), result.errors), args.out)
    return EXIT_RUNTIME if result.errors else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; here they count as invalid input
        return EXIT_CONFIG if exc.code == 2 else int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _main(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
