"""End-to-end scanning: rules in, :class:`ScanReport` out."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .automata import COMPACT, DENSE, build_ac_automaton, build_failureless_trie
from .kmp import KmpMatcher
from .rules import DEFAULT_PREFIX_LEN, RuleSet, truncate_prefixes
from .scan import ScanConfig, ac_scan_arrays, as_bytes_array, pfac_scan_arrays
from .verify import LineIndex, ScanReport, assemble_report, make_alerts, verify_arrays

ENGINES = ("pfac_compact", "pfac_dense", "ac_chunked", "kmp")
DEFAULT_WINDOW = 256 << 20


class LogScanner:
    """Prebuilt matcher for one rule set.

    ``engine`` is one of :data:`ENGINES`.  The pfac engines run the
    two-stage prefix search (``prefix_len=None`` disables truncation); the
    other two report full matches directly, so their stage-1 count equals
    the match count.
    """

    def __init__(self, rules: RuleSet, engine: str = "pfac_compact",
                 prefix_len: int | None = DEFAULT_PREFIX_LEN, workers: int = 1,
                 chunk_size: int = 1 << 20, ac_backend: str = DENSE) -> None:
        if engine not in ENGINES:
            raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
        self.rules = rules
        self.engine = engine
        self.prefix_len = prefix_len
        self.config = ScanConfig(workers=workers, chunk_size=chunk_size)
        self.prefixes = None
        self.automaton = None
        self.kmp = None
        if engine.startswith("pfac"):
            self.prefixes = truncate_prefixes(rules, prefix_len)
            backend = COMPACT if engine == "pfac_compact" else DENSE
            self.automaton = build_failureless_trie(self.prefixes, backend)
            # warm derived lookup tables outside any timed region
            self.automaton.pair_table, self.automaton.root_output, self.automaton.has_output
        elif engine == "ac_chunked":
            self.automaton = build_ac_automaton(rules, ac_backend)
        else:
            self.kmp = KmpMatcher(rules)

    @property
    def backend(self) -> str:
        return "none" if self.automaton is None else self.automaton.backend

    def find(self, text) -> tuple[np.ndarray, np.ndarray, int]:
        """Confirmed ``(offsets, rule_ids, stage1_hits)`` for an in-memory buffer,
        sorted by (offset, rule_id)."""
        offs, ids, stage1 = self._find(as_bytes_array(text))
        return offs, ids, len(stage1)

    def _find(self, data: np.ndarray):
        if self.engine.startswith("pfac"):
            offs, ids, lens = pfac_scan_arrays(data, self.automaton, self.config)
            keep = verify_arrays(data, offs, ids, lens, self.rules)
            return offs[keep], ids[keep], offs
        if self.engine == "ac_chunked":
            offs, ids = ac_scan_arrays(data, self.automaton, self.config)
            return offs, ids, offs
        pairs = self.kmp.search(data)
        offs = np.array([o for o, _ in pairs], np.int64)
        ids = np.array([i for _, i in pairs], np.int32)
        return offs, ids, offs

    def scan(self, text) -> ScanReport:
        data = as_bytes_array(text)
        offs, ids, hits = self.find(data)
        alerts = make_alerts(offs, ids, self.rules, LineIndex(data))
        return assemble_report(alerts, hits, len(data))

    def scan_file(self, path: str | Path, window: int = DEFAULT_WINDOW) -> ScanReport:
        """Scan a file in windows of ``window`` bytes.

        Each window is read with ``max_len - 1`` bytes of lookahead and keeps
        only matches (and stage-1 hits) starting inside it, so the result is
        the same as scanning the whole file at once.
        """
        if window < 1:
            raise ValueError("window must be >= 1")
        lookahead = max(self.rules.max_len - 1, 0)
        alerts = []
        hits = 0
        total = 0
        line_base = 1
        with open(path, "rb") as fh:
            while True:
                fh.seek(total)
                buf = fh.read(window + lookahead)
                if not buf:
                    break
                data = np.frombuffer(buf, np.uint8)
                owned = min(window, len(data))
                offs, ids, stage1 = self._find(data)
                inside = offs < owned
                hits += int(np.count_nonzero(stage1 < owned))
                lines = LineIndex(data[:owned], first_line=line_base)
                alerts.extend(make_alerts(offs[inside], ids[inside], self.rules, lines, base=total))
                line_base += len(lines.newlines)
                total += owned
                if len(buf) <= owned:
                    break
        return assemble_report(alerts, hits, total)
