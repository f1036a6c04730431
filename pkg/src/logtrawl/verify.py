"""Second-stage verification of prefix hits, line mapping and scan reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rules import PrefixSet, RuleSet
from .scan import Hit, as_bytes_array


class ConsistencyError(RuntimeError):
    """A stage-1 hit that cannot have come from a correct scan."""


@dataclass(frozen=True)
class Alert:
    offset: int
    line: int
    rule_id: int
    rule_name: str
    pattern_len: int
    verified: bool = True


@dataclass(frozen=True)
class ScanReport:
    alerts: tuple[Alert, ...]
    total_matches: int
    stage1_hits: int
    stage1_rejected: int
    bytes_scanned: int


class LineIndex:
    """Newline offsets of a buffer, for offset -> 1-based line lookups.

    A line includes its terminating LF.
    """

    def __init__(self, text, first_line: int = 1) -> None:
        self.newlines = np.flatnonzero(as_bytes_array(text) == 0x0A)
        self.size = len(as_bytes_array(text))
        self.first_line = first_line

    def line_of(self, offsets):
        idx = np.searchsorted(self.newlines, offsets, side="left") + self.first_line
        return int(idx) if np.ndim(idx) == 0 else idx

    def span(self, line: int) -> tuple[int, int]:
        """Half-open byte range of ``line``."""
        k = line - self.first_line
        start = 0 if k == 0 else int(self.newlines[k - 1]) + 1
        end = int(self.newlines[k]) + 1 if k < len(self.newlines) else self.size
        return start, end


def verify_arrays(data: np.ndarray, offsets: np.ndarray, ids: np.ndarray,
                  lens: np.ndarray, rules: RuleSet) -> np.ndarray:
    """Boolean mask of stage-1 hits whose full pattern is present.

    Hits are grouped by pattern so each suffix comparison is one vectorized
    gather.
    """
    n = len(data)
    keep = np.zeros(len(offsets), np.bool_)
    if len(offsets) == 0:
        return keep
    if offsets.min() < 0 or (offsets + lens).max() > n:
        raise ConsistencyError("stage-1 hit lies outside the scanned text")
    order = np.argsort(ids, kind="stable")
    sorted_ids = ids[order]
    bounds = np.flatnonzero(np.diff(sorted_ids)) + 1
    for group in np.split(order, bounds):
        pat = rules[int(ids[group[0]])].data
        start = lens[group]
        if np.any(start != start[0]):
            raise ConsistencyError("inconsistent matched_len for one pattern")
        done = int(start[0])
        if done >= len(pat):
            keep[group] = True
            continue
        offs = offsets[group]
        fits = offs + len(pat) <= n
        cand = group[fits]
        if len(cand):
            suffix = np.frombuffer(pat[done:], np.uint8)
            window = data[offsets[cand][:, None] + np.arange(done, len(pat))]
            keep[cand] = np.all(window == suffix, axis=1)
    return keep


def verify_hits(text, hits: list[Hit], prefixes: PrefixSet, rules: RuleSet,
                lines: LineIndex | None = None) -> list[Alert]:
    """Confirm each hit against its full pattern.

    Patterns no longer than the prefix length are confirmed by the hit
    itself; longer ones compare the bytes beyond the prefix.  Alerts come
    back sorted by (offset, rule_id).
    """
    data = as_bytes_array(text)
    for h in hits:
        expect = len(rules[h.pattern_id]) if prefixes.prefix_len is None else min(
            len(rules[h.pattern_id]), prefixes.prefix_len)
        if h.matched_len != expect:
            raise ConsistencyError(f"hit {h} does not match prefix length {expect}")
    offsets = np.array([h.offset for h in hits], np.int64)
    ids = np.array([h.pattern_id for h in hits], np.int32)
    lens = np.array([h.matched_len for h in hits], np.int32)
    keep = verify_arrays(data, offsets, ids, lens, rules)
    return make_alerts(offsets[keep], ids[keep], rules, lines or LineIndex(data))


def make_alerts(offsets, ids, rules: RuleSet, lines: LineIndex, base: int = 0) -> list[Alert]:
    order = np.lexsort((ids, offsets))
    offsets, ids = np.asarray(offsets)[order], np.asarray(ids)[order]
    line_nos = lines.line_of(offsets)
    alerts = []
    for off, pid, ln in zip(offsets.tolist(), ids.tolist(), np.atleast_1d(line_nos).tolist()):
        p = rules[pid]
        alerts.append(Alert(off + base, ln, pid, p.name, len(p)))
    return alerts


def assemble_report(alerts: list[Alert], stage1_hits: int, bytes_scanned: int) -> ScanReport:
    if stage1_hits < len(alerts):
        raise ValueError("more alerts than stage-1 hits")
    keys = [(a.offset, a.rule_id) for a in alerts]
    if keys != sorted(keys):
        raise ValueError("alerts must be sorted by (offset, rule_id)")
    if len(set(keys)) != len(keys):
        raise ConsistencyError("duplicate (offset, rule) alert")
    return ScanReport(
        alerts=tuple(alerts),
        total_matches=len(alerts),
        stage1_hits=stage1_hits,
        stage1_rejected=stage1_hits - len(alerts),
        bytes_scanned=bytes_scanned,
    )
