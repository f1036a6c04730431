"""Scanning kernels: failureless per-position scan, chunked AC, naive oracle.

Every scan partitions its work into contiguous ranges handed to a pool of
``workers`` threads; the compiled loops release the GIL.  Per-range buffers
are merged and sorted once at the end, so results never depend on the
worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .automata import COMPACT, FAILURELESS, FULL_AC, Automaton
from .rules import PrefixSet, RuleSet

_NO_TABLE = np.full((1, 256), -1, np.int32)
_NO_BITMAP = np.zeros((1, 4), np.uint64)
_NO_RANK = np.zeros((1, 4), np.int32)
_NO_SUCC = np.zeros(1, np.int32)


class Hit(NamedTuple):
    """Stage-1 prefix occurrence."""

    offset: int
    pattern_id: int
    matched_len: int


@dataclass(frozen=True)
class ScanConfig:
    workers: int = 1
    chunk_size: int = 1 << 20
    overlap: int | None = None  # None: max_len - 1 of the automaton's patterns

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.overlap is not None and self.overlap < 0:
            raise ValueError("overlap must be >= 0")


def default_workers() -> int:
    env = os.environ.get("LOGTRAWL_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def as_bytes_array(text) -> np.ndarray:
    if isinstance(text, np.ndarray):
        if text.dtype != np.uint8 or text.ndim != 1:
            raise TypeError("text array must be 1-D uint8")
        return text
    return np.frombuffer(text, dtype=np.uint8)


def _backend_args(a: Automaton):
    if a.backend == COMPACT:
        return True, _NO_TABLE, a.bitmap, a.rank, a.succ
    return False, a.table, _NO_BITMAP, _NO_RANK, _NO_SUCC


def _split(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    bounds = np.linspace(0, total, parts + 1).astype(np.int64)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _run_ranges(fn, ranges, workers: int):
    if workers == 1 or len(ranges) == 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def _with_capacity(call, guess: int, dtypes):
    """Run ``call(*buffers)`` and grow the buffers until everything fits."""
    cap = max(guess, 16)
    while True:
        bufs = [np.empty(cap, dt) for dt in dtypes]
        need = call(*bufs)
        if need <= cap:
            return [b[:need] for b in bufs]
        cap = need


def pfac_scan_arrays(text, a: Automaton, cfg: ScanConfig = ScanConfig()):
    """:func:`pfac_scan` returning ``(offsets, pattern_ids, matched_lens)``
    int64/int32/int32 arrays sorted by (offset, pattern_id)."""
    if a.kind != FAILURELESS:
        raise ValueError("pfac_scan needs a failureless automaton")
    data = as_bytes_array(text)
    n = len(data)
    empty = np.empty(0, np.int64), np.empty(0, np.int32), np.empty(0, np.int32)
    if n == 0 or a.state_count == 1:
        return empty
    compact, table, bitmap, rank, succ = _backend_args(a)
    root_row, root_out, pair, has_out = a.root_row, a.root_output, a.pair_table, a.has_output

    def one(lo, hi):
        return _with_capacity(
            lambda pos, st: _kernels.pfac_kernel(
                data, lo, hi, compact, table, bitmap, rank, succ,
                root_row, root_out, pair, has_out, pos, st,
            ),
            (hi - lo) // 64,
            (np.int64, np.int32),
        )

    parts = _run_ranges(one, _split(n, cfg.workers), cfg.workers)
    pos = np.concatenate([p for p, _ in parts])
    states = np.concatenate([s for _, s in parts])
    if len(pos) == 0:
        return empty
    lo = a.out_ptr[states]
    counts = a.out_ptr[states + 1] - lo
    total = int(counts.sum())
    group_start = np.repeat(np.cumsum(counts) - counts, counts)
    idx = np.repeat(lo, counts) + (np.arange(total) - group_start)
    offsets = np.repeat(pos, counts)
    ids = a.out_ids[idx]
    lens = a.out_lens[idx]
    order = np.lexsort((ids, offsets))
    return offsets[order], ids[order], lens[order]


def pfac_scan(text, a: Automaton, cfg: ScanConfig = ScanConfig()) -> list[Hit]:
    """Start one failureless walk at every byte of ``text``.

    A walk emits a :class:`Hit` for each output state it passes and stops at
    the first missing edge or the end of the text.
    """
    offsets, ids, lens = pfac_scan_arrays(text, a, cfg)
    return [Hit(o, i, n) for o, i, n in zip(offsets.tolist(), ids.tolist(), lens.tolist())]


def ac_scan_arrays(text, a: Automaton, cfg: ScanConfig = ScanConfig()):
    if a.kind != FULL_AC:
        raise ValueError("chunked_ac_scan needs a full_ac automaton")
    data = as_bytes_array(text)
    n = len(data)
    if n == 0 or a.state_count == 1:
        return np.empty(0, np.int64), np.empty(0, np.int32)
    if cfg.overlap is None:
        overlap = max(int(a.depth.max()) - 1, 0)
    else:
        overlap = cfg.overlap
    chunk = cfg.chunk_size
    n_chunks = -(-n // chunk)
    compact, table, bitmap, rank, succ = _backend_args(a)

    def one(k_lo, k_hi):
        return _with_capacity(
            lambda pos, pid: _kernels.ac_kernel(
                data, k_lo, k_hi, chunk, overlap, compact, table, bitmap, rank, succ,
                a.fail, a.out_ptr, a.out_ids, a.out_lens, pos, pid,
            ),
            min(n, (k_hi - k_lo) * chunk) // 64,
            (np.int64, np.int32),
        )

    parts = _run_ranges(one, _split(n_chunks, cfg.workers), cfg.workers)
    pos = np.concatenate([p for p, _ in parts])
    ids = np.concatenate([i for _, i in parts])
    order = np.lexsort((ids, pos))
    return pos[order], ids[order]


def chunked_ac_scan(text, a: Automaton, cfg: ScanConfig = ScanConfig()) -> list[tuple[int, int]]:
    """Aho-Corasick over fixed-size chunks, each read ``overlap`` bytes past
    its end.  A match is reported by the chunk where it starts.

    With ``cfg.overlap`` unset the overlap is the longest pattern minus one,
    which is lossless; smaller overlaps can drop matches that straddle a
    chunk boundary.
    """
    pos, ids = ac_scan_arrays(text, a, cfg)
    return list(zip(pos.tolist(), ids.tolist()))


def ac_scan(text, a: Automaton) -> list[tuple[int, int]]:
    """Unchunked single-pass AC scan."""
    n = len(as_bytes_array(text))
    return chunked_ac_scan(text, a, ScanConfig(chunk_size=max(n, 1), overlap=0))


def naive_scan(text, patterns) -> list[tuple[int, int]]:
    """All (offset, pattern_id) occurrences by direct comparison.

    ``patterns`` is a :class:`RuleSet`, a :class:`PrefixSet` (each entry's
    prefix reported under all its ids) or a sequence of byte strings.
    """
    data = bytes(as_bytes_array(text))
    if isinstance(patterns, RuleSet):
        keyed = [(p.data, (p.id,)) for p in patterns]
    elif isinstance(patterns, PrefixSet):
        keyed = [(e.prefix, e.pattern_ids) for e in patterns.entries]
    else:
        keyed = [(bytes(p), (i,)) for i, p in enumerate(patterns)]
    out = []
    for needle, ids in keyed:
        i = data.find(needle)
        while i != -1:
            out.extend((i, pid) for pid in ids)
            i = data.find(needle, i + 1)
    out.sort()
    return out
