"""Command line entry point: ``infodyn run|validate|list-kinds``.

Exit codes: 0 success, 2 config violation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__, streams
from .config import U64_MAX, ConfigError, load_config
from .errors import NumericalFailure, ZeroMarginal
from .experiments import KINDS

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("threads must be >= 0")
    return v


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _report(violations: list[str], stream) -> None:
    for v in violations:
        print(f"violation: {v}", file=stream)


def cmd_validate(args) -> int:
    try:
        load_config(args.config, args.seed)
    except ConfigError as exc:
        _report(exc.violations, sys.stdout)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"violation: config: cannot read ({exc.strerror})")
        return EXIT_CONFIG
    print("ok: no violations")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, args.seed)
    except ConfigError as exc:
        _report(exc.violations, sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"violation: config: cannot read ({exc.strerror})", file=sys.stderr)
        return EXIT_CONFIG
    threads = streams.resolve_threads(cfg.threads if args.threads is None else args.threads)
    out = Path(args.out or cfg.out_dir or ".")
    kind = KINDS[cfg.kind]
    start = time.perf_counter()
    try:
        table, headline = kind.run(cfg.built, streams.make_stream(cfg.seed), threads)
    except (NumericalFailure, ZeroMarginal) as exc:
        print(f"numerical failure in {cfg.kind}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    wall = time.perf_counter() - start
    table.metadata.update(
        {"kind": cfg.kind, "seed": str(cfg.seed), "config_hash": cfg.config_hash, "version": __version__}
    )
    summary = {
        "schema_version": cfg.schema_version,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "config_hash": cfg.config_hash,
        "version": __version__,
        "threads": threads,
        "wall_time_s": wall,
        "rows": len(table.rows),
        "headline": _jsonable(headline),
    }
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write(out / f"{cfg.kind}.csv", table.dumps())
    _atomic_write(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out / f'{cfg.kind}.csv'} ({len(table.rows)} rows) in {wall:.2f} s")
    return EXIT_OK


def cmd_list_kinds(args) -> int:
    width = max(map(len, KINDS))
    for name, kind in KINDS.items():
        print(f"{name:<{width}}  {kind.description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="infodyn", description="Seeded information-dynamics experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="validate a config, run it and write results")
    run.add_argument("config")
    run.add_argument("--seed", type=_u64, help="override the config seed")
    run.add_argument("--out", help="output directory (default: output.dir or .)")
    run.add_argument("--threads", type=_nonneg, help="worker threads, 0 = all cores; never changes results")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="list every violation in a config without running it")
    val.add_argument("config")
    val.add_argument("--seed", type=_u64)
    val.set_defaults(func=cmd_validate)

    lk = sub.add_parser("list-kinds", help="list experiment kinds")
    lk.set_defaults(func=cmd_list_kinds)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
