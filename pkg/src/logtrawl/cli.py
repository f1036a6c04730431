"""``logtrawl`` command line: scan logs against rules, benchmark the scan
engines, or generate synthetic logs.

Exit status of ``scan``: 0 no matches, 1 matches found, 2 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import BENCH_ENGINES, DEFAULT_RUNS, measure_many, random_patterns, write_csv
from .engine import ENGINES, LogScanner
from .loggen import GenSpec, generate_log, write_log
from .rules import DEFAULT_PREFIX_LEN, RuleParseError, parse_rules
from .scan import default_workers

log = logging.getLogger("logtrawl")

EXIT_CLEAN, EXIT_MATCHES, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _prefix_len(value: str) -> int | None:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError("prefix length must be >= 0")
    return n or None


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _int_list(value: str) -> list[int]:
    try:
        out = [int(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("expected comma-separated positive integers")
    return out


def _engine_list(value: str) -> list[str]:
    out = [v.strip() for v in value.split(",") if v.strip()]
    bad = [e for e in out if e not in BENCH_ENGINES]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"engines must be from {', '.join(BENCH_ENGINES)}")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logtrawl", description="Scan logs against rules, benchmark engines, generate synthetic logs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="scan log files for rule matches")
    scan.add_argument("-r", "--rules", required=True, type=Path, help="rule file")
    scan.add_argument("inputs", nargs="+", type=Path, help="log files")
    scan.add_argument("--engine", choices=ENGINES, default="pfac_compact")
    scan.add_argument("--prefix-len", type=_prefix_len, default=DEFAULT_PREFIX_LEN,
                      help="stage-1 prefix length, 0 for none (default %(default)s)")
    scan.add_argument("--workers", type=_positive, default=None,
                      help="scan threads (default: $LOGTRAWL_WORKERS or CPU count)")
    scan.add_argument("--chunk-size", type=_positive, default=1 << 20,
                      help="chunk bytes for ac_chunked")
    scan.add_argument("--window", type=_positive, default=256 << 20,
                      help="bytes read per window (default %(default)s)")
    scan.add_argument("--format", choices=("jsonl", "summary"), default="jsonl")
    scan.add_argument("-o", "--output", type=Path, help="write to file instead of stdout")

    bench = sub.add_parser("bench", help="throughput benchmark over pattern counts")
    bench.add_argument("--engine", type=_engine_list, default=["pfac_compact"],
                       help="comma-separated engines, timed interleaved")
    bench.add_argument("--patterns", type=_int_list, default=[10, 100, 1000])
    bench.add_argument("--pattern-len", type=_positive, default=16)
    bench.add_argument("--log", type=Path, help="log file (default: generated)")
    bench.add_argument("--size", type=_positive, default=5 * 10**6,
                       help="generated log size when --log is absent")
    bench.add_argument("--seed", type=int, default=5489)
    bench.add_argument("--runs", type=_positive, default=DEFAULT_RUNS)
    bench.add_argument("--prefix-len", type=_prefix_len, default=DEFAULT_PREFIX_LEN)
    bench.add_argument("--workers", type=_positive, default=None)
    bench.add_argument("-o", "--output", type=Path, help="CSV path (default stdout)")

    gen = sub.add_parser("gen", help="generate a synthetic MT19937 log")
    gen.add_argument("--size", type=_positive, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--line-len", type=int, default=80)
    gen.add_argument("-o", "--output", type=Path, required=True)
    return parser


def _open_out(path: Path | None):
    if path is None:
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def run_scan(args) -> int:
    try:
        rules = parse_rules(args.rules.read_bytes())
    except OSError as exc:
        raise UsageError(f"cannot read rules: {exc}") from None
    except RuleParseError as exc:
        raise UsageError(f"{args.rules}: {exc}") from None
    if not len(rules):
        raise UsageError(f"{args.rules}: no rules")
    for path in args.inputs:
        if not path.is_file():
            raise UsageError(f"cannot read {path}")
    workers = args.workers or default_workers()
    scanner = LogScanner(rules, args.engine, prefix_len=args.prefix_len, workers=workers,
                         chunk_size=args.chunk_size)
    found = 0
    out = _open_out(args.output)
    try:
        for path in args.inputs:
            report = scanner.scan_file(path, window=args.window)
            found += report.total_matches
            name = str(path)
            if args.format == "jsonl":
                for a in report.alerts:
                    out.write(json.dumps({
                        "file": name, "offset": a.offset, "line": a.line,
                        "rule_id": a.rule_id, "rule": a.rule_name,
                    }) + "\n")
            out.write(json.dumps({
                "file": name,
                "total_matches": report.total_matches,
                "stage1_hits": report.stage1_hits,
                "stage1_rejected": report.stage1_rejected,
                "bytes_scanned": report.bytes_scanned,
            }) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_MATCHES if found else EXIT_CLEAN


def run_bench(args) -> int:
    if args.log is not None:
        try:
            data = args.log.read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read log: {exc}") from None
    else:
        data, digest = generate_log(GenSpec(args.size, args.seed))
        log.info("generated %d bytes, sha256 %s", len(data), digest)
    workers = args.workers or default_workers()
    reports = []
    for k in args.patterns:
        rules = random_patterns(k, args.pattern_len, args.seed + k)
        reports.extend(measure_many([(e, rules) for e in args.engine], data, args.runs,
                                    workers=workers, prefix_len=args.prefix_len))
    out = _open_out(args.output)
    try:
        write_csv(reports, out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_CLEAN


def run_gen(args) -> int:
    try:
        spec = GenSpec(args.size, args.seed, args.line_len)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    digest = write_log(spec, args.output)
    print(f"sha256  {digest} {args.output} {spec.size}")
    return EXIT_CLEAN


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_CLEAN
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    handler = {"scan": run_scan, "bench": run_bench, "gen": run_gen}[args.command]
    try:
        return handler(args)
    except (UsageError, OSError) as exc:
        print(f"logtrawl: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
