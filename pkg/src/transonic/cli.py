"""Command line entry point: ``transonic [mode] [--config PATH] [--preset NAME] ...``."""
from __future__ import annotations

import argparse
import os
import sys

MODES = ("background", "irrotational", "rotational", "axisym", "sweep", "verify")


def build_parser():
    from .config import describe_defaults

    p = argparse.ArgumentParser(
        prog="transonic",
        description="Transonic spiral flow solvers (annulus and concentric cylinder).",
        epilog="configuration keys and defaults:\n" + describe_defaults()
        + "\n\nenvironment: TA_<SECTION>_<KEY>=value overrides a key, e.g. TA_DATA_EPSILON=2e-3"
        + "\nexit codes: 0 ok, 1 probe failed, 2 config, 3 regime, 4 nonconvergence, 5 geometry",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("mode", nargs="?", choices=MODES,
                   help="solver to run (default: the config's run.mode)")
    p.add_argument("--config", metavar="PATH", help="INI or JSON configuration file")
    p.add_argument("--preset", metavar="NAME", help="shipped preset (see --list-presets)")
    p.add_argument("--out", metavar="DIR", default=None, help="output directory (default: out/<mode>)")
    p.add_argument("--threads", metavar="K", type=int, default=None,
                   help="thread limit for the BLAS/FFT backends")
    p.add_argument("--list-presets", action="store_true", help="print preset names and exit")
    return p


def _limit_threads(k):
    # must run before numpy is imported to take effect
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(k)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be positive", file=sys.stderr)
            return 2
        _limit_threads(args.threads)

    from .config import list_presets, load_config
    from .errors import TransonicError, exit_code_for

    if args.list_presets:
        print("\n".join(list_presets()))
        return 0
    try:
        cfg = load_config(args.config, args.preset)
        if args.mode is not None:
            cfg = cfg.replace(mode=args.mode)
        out = args.out or os.path.join("out", cfg.mode)
        from .runner import run
        report = run(cfg, out)
    except (TransonicError, ValueError) as exc:
        code = exit_code_for(exc)
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return code
    for name, ok in sorted(report["probes"].items()):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"report: {os.path.join(out, 'report.json')}")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
