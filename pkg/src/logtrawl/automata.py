"""Failureless tries and Aho-Corasick automata over the 256-value byte alphabet.

Two storage backends define the same transition function:

``dense``
    A ``Q x 256`` int32 successor table, ``-1`` meaning no edge.
``compact``
    Per state a 256-bit presence bitmap (four uint64 words), a per-word rank
    directory, and one packed successor array.  The successor of ``(s, b)``
    is ``succ[rank[s, b // 64] + popcount(bitmap[s, b // 64] & mask_below(b))]``.
    This keeps a trie with thousands of states inside a few hundred KiB.

States are numbered breadth first from the root (0), children in ascending
byte order, so the numbering depends only on the set of keys.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .rules import PrefixSet, RuleSet

FAILURELESS = "failureless"
FULL_AC = "full_ac"
DENSE = "dense"
COMPACT = "compact"
BACKENDS = (DENSE, COMPACT)

TERMINATE = -1
DEFAULT_MAX_STATES = 1 << 22


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Automaton:
    kind: str
    backend: str
    depth: np.ndarray  # int32[Q]
    # outputs in CSR form: state s owns out_ids/out_lens[out_ptr[s]:out_ptr[s + 1]]
    out_ptr: np.ndarray
    out_ids: np.ndarray
    out_lens: np.ndarray
    fail: np.ndarray | None = None
    table: np.ndarray | None = None
    bitmap: np.ndarray | None = None
    rank: np.ndarray | None = None
    succ: np.ndarray | None = None
    _edge_count: int = field(default=0, repr=False)

    @property
    def state_count(self) -> int:
        return len(self.depth)

    @property
    def root(self) -> int:
        return 0

    @cached_property
    def has_output(self) -> np.ndarray:
        return _frozen(self.out_ptr[1:] > self.out_ptr[:-1])

    @property
    def outputs(self) -> dict[int, list[tuple[int, int]]]:
        """state -> [(pattern_id, matched_len), ...] for states with output."""
        res = {}
        for s in np.flatnonzero(self.has_output):
            lo, hi = self.out_ptr[s], self.out_ptr[s + 1]
            res[int(s)] = [
                (int(i), int(n)) for i, n in zip(self.out_ids[lo:hi], self.out_lens[lo:hi])
            ]
        return res

    def goto(self, s: int, b: int) -> int:
        """Raw trie edge, ``TERMINATE`` when absent."""
        if self.backend == DENSE:
            return int(self.table[s, b])
        word = int(self.bitmap[s, b >> 6])
        bit = 1 << (b & 63)
        if not word & bit:
            return TERMINATE
        return int(self.succ[int(self.rank[s, b >> 6]) + (word & (bit - 1)).bit_count()])

    def step_many(self, states: np.ndarray, data: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`goto` over paired state/byte arrays."""
        states = np.asarray(states, dtype=np.int64)
        data = np.asarray(data, dtype=np.int64)
        if self.backend == DENSE:
            return self.table[states, data]
        word_idx = data >> 6
        words = self.bitmap[states, word_idx]
        bits = np.left_shift(np.uint64(1), (data & 63).astype(np.uint64))
        present = (words & bits) != 0
        below = np.bitwise_count(words & (bits - np.uint64(1))).astype(np.int64)
        idx = self.rank[states, word_idx].astype(np.int64) + below
        return np.where(present, self.succ[idx], TERMINATE).astype(np.int32)

    def next_state(self, s: int, b: int) -> int:
        return next_state(self, s, b)

    @cached_property
    def root_row(self) -> np.ndarray:
        return _frozen(self.step_many(np.zeros(256, np.int64), np.arange(256)).astype(np.int32))

    @cached_property
    def pair_table(self) -> np.ndarray:
        """Trie state after the two bytes ``b0, b1`` from the root, indexed by
        ``b0 | b1 << 8``; ``TERMINATE`` if the walk dies on either byte."""
        b0 = np.tile(np.arange(256), 256)
        b1 = np.repeat(np.arange(256), 256)
        s1 = self.root_row[b0]
        out = np.full(65536, TERMINATE, np.int32)
        live = s1 >= 0
        out[live] = self.step_many(s1[live], b1[live])
        return _frozen(out)

    @cached_property
    def root_output(self) -> np.ndarray:
        """True for bytes whose single-byte walk ends in an output state."""
        r = self.root_row
        res = np.zeros(256, np.bool_)
        res[r >= 0] = self.has_output[r[r >= 0]]
        return _frozen(res)

    def memory_bytes(self) -> int:
        """Bytes of transition storage (outputs excluded)."""
        if self.backend == DENSE:
            return self.table.nbytes
        return self.bitmap.nbytes + self.rank.nbytes + self.succ.nbytes

    def edges(self) -> list[tuple[int, int, int]]:
        out = []
        for s in range(self.state_count):
            for b in range(256):
                t = self.goto(s, b)
                if t != TERMINATE:
                    out.append((s, b, t))
        return out

    def dump(self) -> str:
        """Debug listing: one line per state with its edges and outputs."""
        by_src: dict[int, list[str]] = {}
        for s, b, t in self.edges():
            shown = chr(b) if 0x21 <= b <= 0x7E else f"\\x{b:02x}"
            by_src.setdefault(s, []).append(f"{s} --{shown}--> {t}")
        outs = self.outputs
        lines = [f"# {self.kind} {self.backend} states={self.state_count}"]
        for s in range(self.state_count):
            parts = by_src.get(s, [])
            line = f"state {s} depth {int(self.depth[s])}"
            if self.fail is not None:
                line += f" fail {int(self.fail[s])}"
            if s in outs:
                line += " out " + ",".join(f"{i}:{n}" for i, n in outs[s])
            lines.append("  ".join([line, *parts]))
        return "\n".join(lines) + "\n"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def next_state(a: Automaton, s: int, b: int) -> int:
    """One transition.

    Failureless automata return the child or ``TERMINATE``.  Full AC
    automata resolve failure links and always return a state.
    """
    if a.kind == FAILURELESS:
        return a.goto(s, b)
    while True:
        t = a.goto(s, b)
        if t != TERMINATE:
            return t
        if s == 0:
            return 0
        s = int(a.fail[s])


def _build_trie(keys, max_states: int):
    """Insert ``(key_bytes, [(pattern_id, matched_len), ...])`` pairs.

    Returns BFS-numbered children dicts, depths and per-state own outputs.
    """
    kids: list[dict[int, int]] = [{}]
    own: dict[int, list[tuple[int, int]]] = {}
    for key, outs in keys:
        s = 0
        for b in key:
            nxt = kids[s].get(b)
            if nxt is None:
                if len(kids) >= max_states:
                    raise CapacityError(f"automaton exceeds {max_states} states")
                nxt = len(kids)
                kids[s][b] = nxt
                kids.append({})
            s = nxt
        own.setdefault(s, []).extend(outs)

    order = [0]
    new_id = {0: 0}
    depth = [0]
    q = deque([0])
    while q:
        s = q.popleft()
        for b in sorted(kids[s]):
            c = kids[s][b]
            new_id[c] = len(order)
            order.append(c)
            depth.append(depth[new_id[s]] + 1)
            q.append(c)
    children = [{b: new_id[c] for b, c in kids[old].items()} for old in order]
    outputs = {new_id[s]: sorted(v) for s, v in own.items()}
    return children, np.array(depth, np.int32), outputs


def _csr(outputs: dict[int, list[tuple[int, int]]], q: int):
    counts = np.zeros(q, np.int64)
    for s, v in outputs.items():
        counts[s] = len(v)
    ptr = np.zeros(q + 1, np.int64)
    np.cumsum(counts, out=ptr[1:])
    ids = np.empty(ptr[-1], np.int32)
    lens = np.empty(ptr[-1], np.int32)
    for s, v in outputs.items():
        lo = ptr[s]
        for k, (i, n) in enumerate(v):
            ids[lo + k] = i
            lens[lo + k] = n
    return _frozen(ptr), _frozen(ids), _frozen(lens)


def _edge_arrays(children):
    src, byt, dst = [], [], []
    for s, c in enumerate(children):
        for b in sorted(c):
            src.append(s)
            byt.append(b)
            dst.append(c[b])
    return (np.array(src, np.int64), np.array(byt, np.int64), np.array(dst, np.int32))


def _assemble(kind, backend, children, depth, outputs, fail) -> Automaton:
    q = len(children)
    src, byt, dst = _edge_arrays(children)
    ptr, ids, lens = _csr(outputs, q)
    table = np.full((q, 256), TERMINATE, np.int32)
    table[src, byt] = dst
    dense = Automaton(
        kind, DENSE, _frozen(depth), ptr, ids, lens,
        fail=None if fail is None else _frozen(fail),
        table=_frozen(table), _edge_count=len(dst),
    )
    return dense if backend == DENSE else to_compact(dense)


def _check_backend(backend: str) -> None:
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")


def build_failureless_trie(
    prefixes: PrefixSet, backend: str = DENSE, max_states: int = DEFAULT_MAX_STATES
) -> Automaton:
    """Trie over the prefix entries, no failure links.

    The state reached by an entry's prefix outputs every pattern id of that
    entry with ``matched_len = len(prefix)``.
    """
    _check_backend(backend)
    keys = [(e.prefix, [(i, len(e.prefix)) for i in e.pattern_ids]) for e in prefixes.entries]
    children, depth, outputs = _build_trie(keys, max_states)
    return _assemble(FAILURELESS, backend, children, depth, outputs, None)


def build_ac_automaton(
    rules: RuleSet, backend: str = DENSE, max_states: int = DEFAULT_MAX_STATES
) -> Automaton:
    """Full Aho-Corasick machine over the untruncated patterns.

    Failure links are computed breadth first; each state's output list is
    merged with that of its failure target so a scan only reads the current
    state's outputs.
    """
    _check_backend(backend)
    keys = [(p.data, [(p.id, len(p))]) for p in rules]
    children, depth, outputs = _build_trie(keys, max_states)
    q = len(children)
    fail = np.zeros(q, np.int32)
    # BFS numbering means every failure target is final before it is read
    for s in range(q):
        for b, c in children[s].items():
            if s == 0:
                fail[c] = 0
                continue
            f = int(fail[s])
            while f and b not in children[f]:
                f = int(fail[f])
            t = children[f].get(b, 0)
            fail[c] = 0 if t == c else t
    for s in range(1, q):
        inherited = outputs.get(int(fail[s]))
        if inherited:
            outputs[s] = sorted(outputs.get(s, []) + inherited)
    return _assemble(FULL_AC, backend, children, depth, outputs, fail)


def to_compact(a: Automaton) -> Automaton:
    """Re-encode a dense automaton as bitmap + rank + packed successors."""
    if a.backend != DENSE:
        raise ValueError("to_compact expects a dense automaton")
    q = a.state_count
    src, byt = np.nonzero(a.table != TERMINATE)  # row-major: by state then byte
    dst = a.table[src, byt].astype(np.int32)
    bitmap = np.zeros((q, 4), np.uint64)
    np.bitwise_or.at(
        bitmap, (src, byt >> 6), np.left_shift(np.uint64(1), (byt & 63).astype(np.uint64))
    )
    per_word = np.zeros((q, 4), np.int64)
    np.add.at(per_word, (src, byt >> 6), 1)
    rank = (np.cumsum(per_word.ravel()) - per_word.ravel()).reshape(q, 4).astype(np.int32)
    # one pad slot keeps rank lookups for absent edges in bounds
    succ = np.append(dst, np.int32(0)).astype(np.int32)
    return Automaton(
        a.kind, COMPACT, a.depth, a.out_ptr, a.out_ids, a.out_lens,
        fail=a.fail, bitmap=_frozen(bitmap), rank=_frozen(rank), succ=_frozen(succ),
        _edge_count=len(dst),
    )
