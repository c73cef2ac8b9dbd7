"""Command-line entry points.

    ifed run <benchmark> [--scheme ...] [--mfac X] [--n N] [--elem ...] [--out dir]
    ifed sweep <benchmark> --mfac-list 1,2,4 [...]
    ifed verify
    ifed convergence force-projection

Benchmarks: channel-flow, elastic-band, compressed-block, cooks-membrane.
Defaults come from the packaged INI config for each benchmark; command-line
flags override. Exit code 0 only when everything requested passed.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from importlib import resources
from pathlib import Path

from .elements import ElementKind
from .kernels import KERNELS

BENCHMARKS = ("channel-flow", "elastic-band", "compressed-block", "cooks-membrane")


def load_benchmark_config(benchmark: str, path: str | None = None) -> dict:
    """Read the packaged INI defaults (or an explicit file) into a flat dict."""
    parser = configparser.ConfigParser()
    if path is not None:
        with open(path) as fh:
            parser.read_file(fh)
    else:
        name = benchmark.replace("-", "_") + ".ini"
        text = resources.files("ifed2d.configs").joinpath(name).read_text()
        parser.read_string(text)
    flat: dict = {}
    for section in parser.sections():
        for key, value in parser[section].items():
            flat[key] = value
    return flat


def _coerce(flat: dict) -> dict:
    out = {}
    for k, v in flat.items():
        if k in ("scheme", "elem", "kernel", "benchmark"):
            out[k] = v
            continue
        try:
            out[k] = int(v)
        except ValueError:
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
    return out


def _run_one(benchmark: str, settings: dict, include_timings: bool):
    from . import benchmarks as bench

    scheme = settings.pop("scheme", "nodal")
    kernel = KERNELS[settings.pop("kernel", "bspline3")]
    elem = ElementKind(settings.pop("elem", "p1"))
    mfac = float(settings.pop("mfac", 1.0))
    settings.pop("benchmark", None)
    if benchmark == "channel-flow":
        n = int(settings.pop("n", 64))
        settings.pop("m", None)
        return bench.run_channel_flow(scheme, mfac, n, kernel=kernel, **settings)
    if benchmark == "elastic-band":
        n = int(settings.pop("n", 64))
        settings.pop("m", None)
        return bench.run_elastic_band(scheme, mfac, n, kernel=kernel, **settings)
    if benchmark == "compressed-block":
        m = int(settings.pop("m", 8))
        settings.pop("n", None)
        return bench.run_compressed_block(scheme, elem, mfac, m, kernel=kernel,
                                          **settings)
    if benchmark == "cooks-membrane":
        m = int(settings.pop("m", 8))
        settings.pop("n", None)
        return bench.run_cooks_membrane(scheme, elem, mfac, m, kernel=kernel,
                                        **settings)
    raise SystemExit(f"unknown benchmark {benchmark!r}")


def _add_run_flags(p):
    p.add_argument("benchmark", choices=BENCHMARKS)
    p.add_argument("--scheme", choices=("nodal", "elemental"))
    p.add_argument("--mfac", type=float)
    p.add_argument("--n", type=int, help="Cartesian cells per direction")
    p.add_argument("--m", type=int, help="elements per edge (solid benchmarks)")
    p.add_argument("--elem", choices=[k.value for k in ElementKind])
    p.add_argument("--kernel", choices=sorted(KERNELS))
    p.add_argument("--t-final", type=float, dest="t_final")
    p.add_argument("--config", help="INI file overriding the packaged defaults")
    p.add_argument("--out", default=".", help="output directory for CSV")
    p.add_argument("--timings", action="store_true",
                   help="append (non-reproducible) timing columns")


def _collect_settings(args) -> dict:
    flat = load_benchmark_config(args.benchmark, args.config)
    settings = _coerce(flat)
    for key in ("scheme", "mfac", "n", "m", "elem", "kernel", "t_final"):
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    return settings


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ifed",
                                     description="2D IFED benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one benchmark configuration")
    _add_run_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run a benchmark over several mesh factors")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--mfac-list", required=True,
                         help="comma-separated mesh factors")
    p_sweep.add_argument("--schemes", default=None,
                         help="comma-separated schemes (default: the one scheme)")
    p_sweep.add_argument("--control", action="store_true",
                         help="include the no-structure control run (channel flow)")

    sub.add_parser("verify", help="run the theorem property suite")

    p_conv = sub.add_parser("convergence", help="refinement studies")
    p_conv.add_argument("study", choices=("force-projection",))

    args = parser.parse_args(argv)

    if args.command == "verify":
        from .verify import run_theorem_suite
        checks = run_theorem_suite()
        for c in checks:
            print(c.line())
        ok = all(c.passed for c in checks)
        print(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
        return 0 if ok else 1

    if args.command == "convergence":
        from .verify import force_projection_convergence
        errors, order = force_projection_convergence()
        for lvl, err in zip((8, 16, 32), errors):
            print(f"n={lvl:3d}  interior max error {err:.6e}")
        print(f"observed order {order:.3f} (require >= 0.9)")
        return 0 if order >= 0.9 else 1

    from .reporting import emit_csv

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.command == "run":
        settings = _collect_settings(args)
        row = _run_one(args.benchmark, settings, args.timings)
        path = out_dir / f"{args.benchmark}.csv"
        emit_csv([row], path, include_timings=args.timings)
        print(f"wrote {path}")
        _summarize(row)
        return 0

    if args.command == "sweep":
        mfacs = [float(v) for v in args.mfac_list.split(",")]
        schemes = (args.schemes.split(",") if args.schemes
                   else [getattr(args, "scheme", None) or "nodal"])
        rows = []
        if args.control and args.benchmark == "channel-flow":
            from .benchmarks import run_channel_control
            settings = _collect_settings(args)
            rows.append(run_channel_control(int(settings.get("n", 64))))
            print("control run done")
        for scheme in schemes:
            for mfac in mfacs:
                settings = _collect_settings(args)
                settings["scheme"] = scheme
                settings["mfac"] = mfac
                rows.append(_run_one(args.benchmark, settings, args.timings))
                print(f"{args.benchmark} scheme={scheme} mfac={mfac} done")
        path = out_dir / f"{args.benchmark}_sweep.csv"
        emit_csv(rows, path, include_timings=args.timings)
        print(f"wrote {path}")
        return 0

    return 2


def _summarize(row):
    if row.qoi is not None:
        print(f"qoi displacement: {row.qoi:.6f}")
    if row.error_l2 is not None:
        print(f"errors: L1={row.error_l1:.4e} L2={row.error_l2:.4e} "
              f"Linf={row.error_linf:.4e}")


if __name__ == "__main__":
    sys.exit(main())
