"""Knuth-Morris-Pratt baseline.

``kmp_multi`` runs one full KMP pass per pattern, so its cost grows linearly
with the number of patterns.  That is the point of keeping it around.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .rules import Pattern, RuleSet
from .scan import as_bytes_array


@dataclass(frozen=True, eq=False)
class FailureTable:
    """``table[i]`` is the length of the longest proper border of ``pattern[:i + 1]``."""

    pattern_id: int
    table: np.ndarray

    def tolist(self) -> list[int]:
        return self.table.tolist()


@dataclass
class SearchStats:
    comparisons: int = 0
    matches: int = 0


def build_failure_table(p: Pattern) -> FailureTable:
    data = p.data
    if not data:
        raise ValueError("pattern must be non-empty")
    table = [0] * len(data)
    k = 0
    for i in range(1, len(data)):
        while k and data[i] != data[k]:
            k = table[k - 1]
        if data[i] == data[k]:
            k += 1
        table[i] = k
    arr = np.array(table, dtype=np.int32)
    arr.setflags(write=False)
    return FailureTable(p.id, arr)


def kmp_search(text, p: Pattern, ft: FailureTable | None = None,
               stats: SearchStats | None = None) -> list[int]:
    """Ascending start offsets of every (possibly overlapping) occurrence."""
    if ft is None:
        ft = build_failure_table(p)
    data = as_bytes_array(text)
    pat = np.frombuffer(p.data, dtype=np.uint8)
    cap = max(16, len(data) // max(len(pat), 1) // 64)
    while True:
        res = np.empty(cap, np.int64)
        count, cmp = _kernels.kmp_kernel(data, pat, ft.table, res)
        if count <= cap:
            break
        cap = count
    if stats is not None:
        stats.comparisons += int(cmp)
        stats.matches += int(count)
    return res[:count].tolist()


@dataclass
class KmpMatcher:
    """Failure tables built once, reused across texts."""

    rules: RuleSet
    tables: list[FailureTable] = field(init=False)

    def __post_init__(self) -> None:
        self.tables = [build_failure_table(p) for p in self.rules]

    def search(self, text, stats: SearchStats | None = None) -> list[tuple[int, int]]:
        out = []
        for p, ft in zip(self.rules, self.tables):
            out.extend((o, p.id) for o in kmp_search(text, p, ft, stats))
        out.sort()
        return out


def kmp_multi(text, rules: RuleSet, stats: SearchStats | None = None) -> list[tuple[int, int]]:
    """Search each pattern in turn; (offset, pattern_id) pairs, sorted."""
    return KmpMatcher(rules).search(text, stats)
