import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logtrawl.automata import (
    COMPACT,
    DENSE,
    FAILURELESS,
    FULL_AC,
    TERMINATE,
    CapacityError,
    build_ac_automaton,
    build_failureless_trie,
    next_state,
    to_compact,
)
from logtrawl.rules import RuleSet, truncate_prefixes
from logtrawl.scan import ac_scan, naive_scan


def trie(pats, backend=DENSE, L=8):
    return build_failureless_trie(truncate_prefixes(RuleSet.from_patterns(pats), L), backend)


def walk(a, key):
    s = 0
    for b in key:
        s = a.goto(s, b)
        if s == TERMINATE:
            return s
    return s


@pytest.mark.parametrize("backend", [DENSE, COMPACT])
def test_his_she_trie(backend):
    a = trie([b"HIS", b"SHE"], backend)
    # root + H, HI, HIS + S, SH, SHE
    assert a.state_count == 7 == 1 + 3 + 3
    assert a.kind == FAILURELESS and a.backend == backend and a.fail is None
    # BFS, ascending byte: H=1 S=2 HI=3 SH=4 HIS=5 SHE=6
    assert [walk(a, k) for k in (b"H", b"S", b"HI", b"SH", b"HIS", b"SHE")] == [1, 2, 3, 4, 5, 6]
    assert a.outputs == {5: [(0, 3)], 6: [(1, 3)]}
    assert next_state(a, 0, ord("H")) == 1
    assert next_state(a, 0, ord("Z")) == TERMINATE


def test_prefix_of_pattern_trie():
    a = trie([b"AB", b"ABC"])
    assert a.state_count == 4
    assert a.outputs == {2: [(0, 2)], 3: [(1, 3)]}
    assert list(a.depth) == [0, 1, 2, 3]


def test_empty_prefix_set():
    for backend in (DENSE, COMPACT):
        a = trie([], backend)
        assert a.state_count == 1 and a.outputs == {}
    c = trie([], COMPACT)
    assert c.bitmap.shape == (1, 4) and not c.bitmap.any()


def test_truncation_shares_states():
    a = trie([b"ABCDEFGHX", b"ABCDEFGHY"], L=8)
    assert a.state_count == 9
    assert a.outputs == {8: [(0, 8), (1, 8)]}


def test_capacity_error():
    with pytest.raises(CapacityError):
        build_failureless_trie(truncate_prefixes(RuleSet.from_patterns([b"abcdef"]), 8),
                               max_states=4)
    with pytest.raises(CapacityError):
        build_ac_automaton(RuleSet.from_patterns([b"abcdef"]), max_states=6)
    build_ac_automaton(RuleSet.from_patterns([b"abcdef"]), max_states=7)


def test_unknown_backend():
    with pytest.raises(ValueError):
        trie([b"a"], "texture")


@pytest.mark.parametrize("backend", [DENSE, COMPACT])
def test_ac_shis_walkthrough(backend):
    a = build_ac_automaton(RuleSet.from_patterns([b"HIS", b"SHE"]), backend)
    assert a.kind == FULL_AC
    s = 0
    visited = []
    for ch in b"SHIS":
        s = next_state(a, s, ch)
        visited.append(s)
    # S, SH, then failure SH -> H and goto HI, then HIS
    assert visited == [walk(a, b"S"), walk(a, b"SH"), walk(a, b"HI"), walk(a, b"HIS")]
    assert next_state(a, walk(a, b"SH"), ord("I")) == walk(a, b"HI")
    assert a.fail[walk(a, b"SH")] == walk(a, b"H")
    assert ac_scan(b"SHIS", a) == [(1, 0)]


def test_ac_output_merging():
    rs = RuleSet.from_patterns([b"AB", b"BAB"])
    a = build_ac_automaton(rs)
    ba, bab, a1, ab = walk(a, b"BA"), walk(a, b"BAB"), walk(a, b"A"), walk(a, b"AB")
    assert a.fail[ba] == a1
    assert a.fail[bab] == ab
    assert sorted(a.outputs[bab]) == [(0, 2), (1, 3)]
    for text in (b"BAB", b"ABABAB", b"BBABAAB"):
        assert ac_scan(text, a) == naive_scan(text, rs)


def test_ac_empty_rules():
    a = build_ac_automaton(RuleSet())
    assert a.state_count == 1
    assert next_state(a, 0, 65) == 0
    assert ac_scan(b"anything", a) == []


def test_compact_smaller_than_dense_by_layout():
    d = trie([b"HIS", b"SHE"])
    c = to_compact(d)
    q, edges = 7, 6
    dense_bytes = q * 256 * 4
    # bitmaps (4 x uint64) + rank directory (4 x int32) + successors (+1 pad), per layout
    compact_bytes = q * 4 * 8 + q * 4 * 4 + (edges + 1) * 4
    assert d.memory_bytes() == dense_bytes == 7168
    assert c.memory_bytes() == compact_bytes == 364
    assert c.memory_bytes() < d.memory_bytes()


def test_to_compact_requires_dense():
    with pytest.raises(ValueError):
        to_compact(trie([b"x"], COMPACT))


def exhaustive_equal(d, c):
    q = d.state_count
    states = np.repeat(np.arange(q), 256)
    data = np.tile(np.arange(256), q)
    np.testing.assert_array_equal(d.step_many(states, data), c.step_many(states, data))


def test_backend_equivalence_large():
    rng = np.random.default_rng(3)
    pats = {rng.integers(0, 256, rng.integers(1, 40)).astype(np.uint8).tobytes() for _ in range(400)}
    rs = RuleSet.from_patterns(sorted(pats))
    d = build_ac_automaton(rs)
    assert d.state_count <= 10**4
    c = to_compact(d)
    exhaustive_equal(d, c)
    # scalar path agrees with the vectorized one on a sample
    for s in range(0, d.state_count, 97):
        for b in range(0, 256, 5):
            assert c.goto(s, b) == d.goto(s, b)
            assert next_state(c, s, b) == next_state(d, s, b)


def test_dump_lists_edges_and_outputs():
    text = trie([b"HIS", b"SHE"]).dump()
    assert "0 --H--> 1" in text
    assert "out 0:3" in text
    assert len(text.splitlines()) == 8


small_pats = st.lists(st.binary(min_size=1, max_size=12), min_size=0, max_size=12, unique=True)


@settings(max_examples=60, deadline=None)
@given(small_pats, st.sampled_from([2, 4, 8, None]))
def test_failureless_properties(pats, L):
    rs = RuleSet.from_patterns(pats)
    ps = truncate_prefixes(rs, L)
    d = build_failureless_trie(ps, DENSE)
    c = build_failureless_trie(ps, COMPACT)
    exhaustive_equal(d, c)
    assert d.state_count <= 1 + sum(len(e.prefix) for e in ps.entries)
    assert d.state_count <= 1 + sum(len(p) if L is None else min(len(p), L) for p in pats)
    # self-find
    for p in rs:
        key = p.data if L is None else p.data[:L]
        s = walk(d, key)
        assert p.id in [i for i, _ in d.outputs[s]]
    # each non-root state has exactly one incoming edge
    targets = [t for _, _, t in d.edges()]
    assert sorted(targets) == list(range(1, d.state_count))
    for s, _, t in d.edges():
        assert 0 <= t < d.state_count and d.depth[t] == d.depth[s] + 1
    # determinism of numbering
    again = build_failureless_trie(ps, DENSE)
    np.testing.assert_array_equal(again.table, d.table)


@settings(max_examples=60, deadline=None)
@given(small_pats)
def test_ac_properties(pats):
    rs = RuleSet.from_patterns(pats)
    a = build_ac_automaton(rs)
    assert a.state_count <= 1 + sum(len(p) for p in pats)
    assert a.fail[0] == 0
    for s in range(1, a.state_count):
        assert a.depth[a.fail[s]] < a.depth[s]
    c = to_compact(a)
    exhaustive_equal(a, c)
    np.testing.assert_array_equal(c.fail, a.fail)
