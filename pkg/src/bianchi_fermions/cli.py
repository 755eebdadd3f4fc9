"""Command line entry point ``simulate``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .config import config_digest, load_config
from .errors import BianchiError, ConfigError, DomainError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Integrate all grid modes of a run configuration and write "
        "stress.csv, spectrum_<tindex>.csv and manifest.json.",
    )
    p.add_argument("config", help="path to the run configuration file")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides run.out_dir)")
    p.add_argument("--threads", type=int, metavar="N", help="worker processes, 0 = all cores")
    p.add_argument("--formulation", choices=("suv", "complex", "dirac"))
    p.add_argument("--check", action="store_true", help="validate the configuration only")
    return p


def main(argv=None) -> int:
    from .sweep import run_sweep, write_outputs

    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.threads is not None:
            if args.threads < 0:
                raise ConfigError("threads must be >= 0", "--threads")
            cfg = cfg.replace(threads=args.threads)
        if args.formulation:
            cfg = cfg.replace(formulation=args.formulation)
        if args.out:
            cfg = cfg.replace(out_dir=args.out)
        # tabulated data is only read here, so its errors count as config errors
        cfg.background.build()
    except OSError as exc:
        print(f"error: cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.check:
        print(f"config OK, digest {config_digest(cfg)}")
        return EXIT_OK

    try:
        result = run_sweep(cfg)
    except BianchiError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        paths = write_outputs(result, cfg.out_dir)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(
        f"wrote {len(paths)} files to {cfg.out_dir} "
        f"(max constraint residual {result.max_residual:.3e}, "
        f"{result.timing['total']:.1f} s)"
    )
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
