"""Command-line entry points.

Subcommands::

    invimg generate <config.json>       write a simulated paired dataset
    invimg run <config.json>            reconstruct, score, and report
    invimg adjoint-check <config.json>  dot-test the configured physics
    invimg version                      print the package version

All paths inside a config are resolved relative to the config file's
directory.  Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

import argparse
import json
import os
import sys

from . import __version__
from .errors import ConfigError, ValidationError

_ADJOINT_THRESHOLD = 1e-8


def _load_config(path):
    try:
        with open(path) as f:
            return json.load(f), os.path.dirname(os.path.abspath(path))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}")


def _cmd_generate(args):
    config, base = _load_config(args.config)
    from .dataset import generate
    manifest = generate(config, base)
    print(f"generated {manifest['count']} samples under "
          f"{os.path.join(base, config.get('output_dir', 'out'))}")
    return 0


def _cmd_run(args):
    config, base = _load_config(args.config)
    from .experiment import run
    summary = run(config, base)
    print(f"wrote {summary['csv']}")
    mean = summary["rows"][-1]
    parts = [f"{k}={mean[k]}" for k in summary["header"]
             if k not in ("sample_id", "method", "error") and mean.get(k)]
    print("means: " + ", ".join(parts))
    return 0


def _cmd_adjoint_check(args):
    config, base = _load_config(args.config)
    from .experiment import adjoint_check
    err = adjoint_check(config, base)
    print(f"max adjoint dot-test error over 20 trials: {err:.3e}")
    if err > _ADJOINT_THRESHOLD:
        print(f"FAIL: exceeds {_ADJOINT_THRESHOLD:.0e}", file=sys.stderr)
        return 2
    return 0


def _cmd_version(_args):
    print(__version__)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="invimg",
        description="Matrix-free imaging inverse problems: simulate, reconstruct, evaluate.")
    sub = parser.add_subparsers(dest="command")
    for name, fn in (("generate", _cmd_generate), ("run", _cmd_run),
                     ("adjoint-check", _cmd_adjoint_check), ("version", _cmd_version)):
        p = sub.add_parser(name)
        if name != "version":
            p.add_argument("config", help="path to a JSON experiment config")
        p.set_defaults(fn=fn)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors; we use 1
        return 0 if exc.code in (0, None) else 1
    if not getattr(args, "fn", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.fn(args)
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
