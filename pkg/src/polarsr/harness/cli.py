"""Command-line entry point: ``polarsr {construct,run,oracle,info}``."""

from __future__ import annotations

import argparse
import sys

from ..exceptions import ConfigurationError, OracleSizeError, ParameterError, PolarSRError
from .cache import ConstructionCache
from .config import build_source, load_config
from .experiment import build_constructions, run_experiment
from .report import PARTITIONS, info_report, oracle_report

EXIT_OK, EXIT_USAGE, EXIT_BOUND, EXIT_RUNTIME = 0, 1, 2, 3

DEFAULT_BUILDERS = {
    "rd": ("bss_rd", {"D": 0.11}),
    "sr": ("bss_sr", {"D1": 0.25, "D2": 0.11}),
    "wz": ("dsbs_wz", {"D": 0.11, "p": 0.25}),
    "srwz": ("srwz_degenerate", {"D1": 0.25, "D2": 0.11}),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _params(items) -> dict:
    out = {}
    for it in items or ():
        key, sep, val = it.partition("=")
        if not sep:
            raise ConfigurationError(f"parameter {it!r} is not key=value")
        try:
            out[key] = float(val)
        except ValueError:
            raise ConfigurationError(f"parameter {key} needs a number, got {val!r}") from None
    return out


def _source_from_args(args):
    if args.pmf:
        src = {"pmf": args.pmf}
    else:
        builder, defaults = DEFAULT_BUILDERS[args.scheme]
        src = {"builder": builder, "params": {**defaults, **_params(args.param)}}
    return build_source(args.scheme, src)


def cmd_construct(args) -> int:
    cfg = load_config(args.config)
    cache = ConstructionCache(cfg.cache_dir)
    cons = build_constructions(cfg, cache)
    for m, layers in cons.items():
        for k, c in enumerate(layers):
            p = c.partition
            print(f"m={m} layer={k + 1} |H|={len(p.H)} |L|={len(p.L)} |I|={len(p.I)} "
                  f"rate={p.rate:.6f} overlaps={p.overlaps} digest={p.digest:016x}")
    where = cfg.cache_dir if cfg.cache_dir is not None else "memory only"
    print(f"cache: {where} (hits {cache.hits}, new {cache.misses})")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    table = run_experiment(cfg)
    if cfg.output is None:
        sys.stdout.write(table.to_csv())
    else:
        print(f"wrote {len(table.records)} rows to {cfg.output}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    source = _source_from_args(args)
    rep = oracle_report(source, args.n, args.partition, args.delta)
    print(rep.format())
    return EXIT_OK if rep.holds else EXIT_BOUND


def cmd_info(args) -> int:
    if args.config:
        source = load_config(args.config).make_source()
    else:
        if not args.scheme:
            raise ConfigurationError("info needs a scheme or --config")
        source = _source_from_args(args)
    print("\n".join(info_report(source)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polarsr", description="Polar-coded lossy compression experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="build and cache index partitions for a config")
    c.add_argument("config")
    c.set_defaults(func=cmd_construct)

    r = sub.add_parser("run", help="run the trials of a config and write CSV + JSON sidecar")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)

    schemes = sorted(DEFAULT_BUILDERS)
    o = sub.add_parser("oracle", help="exact laws versus bounds at n <= 8")
    o.add_argument("scheme", choices=schemes)
    o.add_argument("n", type=int)
    o.add_argument("--param", action="append", metavar="KEY=VALUE", help="builder parameter")
    o.add_argument("--pmf", help="joint distribution file instead of the default builder")
    o.add_argument("--partition", choices=PARTITIONS, default="exact")
    o.add_argument("--delta", type=float, default=None)
    o.set_defaults(func=cmd_oracle)

    i = sub.add_parser("info", help="rates, distortions and operating points of a joint")
    i.add_argument("scheme", nargs="?", choices=schemes)
    i.add_argument("--param", action="append", metavar="KEY=VALUE")
    i.add_argument("--pmf")
    i.add_argument("--config")
    i.set_defaults(func=cmd_info)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ParameterError, OracleSizeError) as e:
        print(f"polarsr: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PolarSRError as e:
        print(f"polarsr: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"polarsr: runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
