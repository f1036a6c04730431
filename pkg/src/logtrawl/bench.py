"""Throughput measurement: repeated timed runs, mean time, bits per second.

Throughput is ``8 * N / mean_seconds`` with ``N`` the log size in bytes.
Only the scan (plus stage-2 verification for the pfac engines) is timed;
automaton construction happens before the clock starts and is reported
separately as ``build_seconds``.
"""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .engine import LogScanner
from .loggen import WordStream, printable_stream
from .rules import DEFAULT_PREFIX_LEN, RuleSet
from .scan import as_bytes_array

BENCH_ENGINES = ("kmp", "pfac_dense", "pfac_compact", "ac_chunked")
CSV_FIELDS = ("engine", "backend", "patterns", "bytes", "runs", "mean_seconds", "throughput_bps")
DEFAULT_RUNS = 100


def throughput_bps(nbytes: int, seconds: float) -> float:
    return 8.0 * nbytes / seconds


@dataclass(frozen=True)
class ThroughputReport:
    engine: str
    backend: str
    pattern_count: int
    bytes: int
    runs: int
    run_seconds: tuple[float, ...]
    mean_seconds: float
    throughput_bps: float
    build_seconds: float = 0.0

    @classmethod
    def from_runs(cls, engine: str, backend: str, pattern_count: int, nbytes: int,
                  run_seconds, build_seconds: float = 0.0) -> ThroughputReport:
        run_seconds = tuple(float(t) for t in run_seconds)
        if not run_seconds:
            raise ValueError("need at least one run")
        mean = statistics.fmean(run_seconds)
        return cls(engine, backend, pattern_count, nbytes, len(run_seconds), run_seconds,
                   mean, throughput_bps(nbytes, mean), build_seconds)

    def csv_row(self) -> dict:
        return {
            "engine": self.engine,
            "backend": self.backend,
            "patterns": self.pattern_count,
            "bytes": self.bytes,
            "runs": self.runs,
            "mean_seconds": self.mean_seconds,
            "throughput_bps": self.throughput_bps,
        }


def random_patterns(count: int, length: int, seed: int = 0) -> RuleSet:
    """``count`` distinct printable patterns of ``length`` bytes from MT19937."""
    words = WordStream(seed)
    seen: dict[bytes, None] = {}
    while len(seen) < count:
        chunk = printable_stream(words, length * (count - len(seen)))
        for row in chunk.reshape(-1, length):
            seen.setdefault(row.tobytes())
            if len(seen) == count:
                break
    return RuleSet.from_patterns(list(seen))


def measure(engine: str, text, rules: RuleSet, runs: int = DEFAULT_RUNS, *,
            workers: int = 1, prefix_len: int | None = DEFAULT_PREFIX_LEN,
            chunk_size: int = 1 << 20, warmup: bool = True,
            timer=time.perf_counter) -> ThroughputReport:
    """Time ``runs`` scans of ``text`` after one untimed warm-up."""
    return measure_many([(engine, rules)], text, runs, workers=workers, prefix_len=prefix_len,
                        chunk_size=chunk_size, warmup=warmup, timer=timer)[0]


def measure_many(configs, text, runs: int = DEFAULT_RUNS, *, workers: int = 1,
                 prefix_len: int | None = DEFAULT_PREFIX_LEN, chunk_size: int = 1 << 20,
                 warmup: bool = True, timer=time.perf_counter) -> list[ThroughputReport]:
    """Measure several ``(engine, rules)`` configurations on the same text.

    All scanners are built up front; the timed runs then go round-robin over
    the configurations so slow drift in machine load hits each one equally.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    data = as_bytes_array(text)
    scanners, builds = [], []
    for engine, rules in configs:
        if engine not in BENCH_ENGINES:
            raise ValueError(f"unknown engine {engine!r}")
        t0 = timer()
        scanners.append(LogScanner(rules, engine, prefix_len=prefix_len, workers=workers,
                                   chunk_size=chunk_size))
        builds.append(timer() - t0)
    return time_prepared(scanners, data, runs, warmup=warmup, timer=timer, build_seconds=builds)


def time_prepared(scanners, data: np.ndarray, runs: int, *, warmup: bool = True,
                  timer=time.perf_counter, build_seconds=None) -> list[ThroughputReport]:
    """Timing loop over already-built scanners; only ``scanner.find(data)`` is timed."""
    finds = [s.find for s in scanners]
    if warmup:
        for find in finds:
            find(data)
    durations = [[] for _ in finds]
    for _ in range(runs):
        for find, sink in zip(finds, durations):
            start = timer()
            find(data)
            sink.append(timer() - start)
    builds = build_seconds or [0.0] * len(scanners)
    return [
        ThroughputReport.from_runs(s.engine, s.backend, len(s.rules), len(data), d, b)
        for s, d, b in zip(scanners, durations, builds)
    ]


def scaling_sweep(engine: str, text, pattern_counts, runs: int = DEFAULT_RUNS, *,
                  pattern_len: int = 16, seed: int = 0, **kwargs) -> list[ThroughputReport]:
    """One report per pattern count, each with freshly drawn random patterns."""
    configs = [(engine, random_patterns(k, pattern_len, seed + k)) for k in pattern_counts]
    return measure_many(configs, text, runs, **kwargs)


def compare_backends(text, rules: RuleSet, runs: int = DEFAULT_RUNS, **kwargs):
    """Paired dense/compact pfac reports on identical input, plus the
    compact/dense throughput ratio."""
    dense, compact = measure_many([("pfac_dense", rules), ("pfac_compact", rules)],
                                  text, runs, **kwargs)
    return dense, compact, compact.throughput_bps / dense.throughput_bps


def write_csv(reports, fh=None) -> str:
    """Write reports as CSV to ``fh`` (if given) and return the text."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        row = r.csv_row()
        row["mean_seconds"] = repr(row["mean_seconds"])
        row["throughput_bps"] = repr(row["throughput_bps"])
        w.writerow(row)
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def read_csv(text: str) -> list[dict]:
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append({
            "engine": row["engine"],
            "backend": row["backend"],
            "patterns": int(row["patterns"]),
            "bytes": int(row["bytes"]),
            "runs": int(row["runs"]),
            "mean_seconds": float(row["mean_seconds"]),
            "throughput_bps": float(row["throughput_bps"]),
        })
    return rows
