"""Command-line entry point: run experiments from config files, plot results.

Exit codes: 0 success, 2 configuration or usage errors, 3 resource-cap
errors, 4 numerical failures.  The only environment coupling is
FINITEQM_THREADS, which caps the BLAS thread pools; it must be applied
before the numeric libraries load, hence the lazy imports below.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, FiniteQMError, NodeCapError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_NUMERICAL = 4


def _apply_thread_limit():
    threads = os.environ.get("FINITEQM_THREADS")
    if not threads:
        return
    if not threads.isdigit() or int(threads) < 1:
        raise ConfigError("FINITEQM_THREADS must be a positive integer, got %r" % threads)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, threads)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finiteqm",
        description="Finite-dimensional quantum experiments: CCR obstruction, box spectra, "
                    "sliced propagators, Gaussian-norm scaling.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment described by a config file")
    run_p.add_argument("config", help="path to a key = value config file")
    run_p.add_argument("--seed", type=int, default=None,
                       help="unsigned 64-bit seed (overrides the config file)")
    run_p.add_argument("--out", default=None, help="output directory (overrides the config file)")
    run_p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="result file format (overrides the config file)")

    plot_p = sub.add_parser("plot", help="render a persisted result file to SVG")
    plot_p.add_argument("result", help="path to a result file produced by 'run'")
    plot_p.add_argument("--kind", required=True, choices=("convergence", "scan", "residuals"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _apply_thread_limit()
        if args.command == "run":
            from . import experiments
            config = experiments.parse_config(args.config, output_dir=args.out,
                                              seed=args.seed, fmt=args.format)
            manifest = experiments.run(config)
            for name, digest in manifest.outputs:
                print("wrote %s  sha256=%s" % (config.output_dir / name, digest))
            print("manifest: %s" % manifest.path)
        else:
            from . import plots
            out = plots.plot(args.result, args.kind)
            print("wrote %s" % out)
    except ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except NodeCapError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CAP
    except NumericalError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL
    except FiniteQMError as exc:
        # remaining domain errors are misconfigurations from the CLI's view
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
