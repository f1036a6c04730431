"""Compiled scan loops.

All kernels are ``nogil`` so a thread pool gets real parallelism, and they
write into caller-provided buffers: each returns the number of results it
*wanted* to write, and the caller retries with a larger buffer when that
exceeds the capacity.
"""

import numpy as np
from numba import njit, types
from numba.extending import intrinsic

# start positions handled per lockstep batch; bounds scratch memory
BATCH = 1 << 16


@intrinsic
def _ctpop(typingctx, x):
    sig = types.uint64(types.uint64)

    def codegen(context, builder, signature, args):
        return builder.ctpop(args[0])

    return sig, codegen


@njit(inline="always")
def _popcount64(x):
    return np.int64(_ctpop(x))


@njit(inline="always")
def _step(compact, table, bitmap, rank, succ, s, b):
    if not compact:
        return table[s, b]
    w = b >> 6
    word = bitmap[s, w]
    bit = np.uint64(1) << np.uint64(b & 63)
    idx = np.int64(rank[s, w]) + _popcount64(word & (bit - np.uint64(1)))
    t = succ[idx]
    return t if (word & bit) != np.uint64(0) else np.int32(-1)


@njit(nogil=True, cache=True)
def pfac_kernel(text, lo, hi, compact, table, bitmap, rank, succ, root_row, root_out,
                pair, has_out, hit_pos, hit_state):
    """Failureless walks for every start position in [lo, hi).

    Live walkers advance one byte per round and dead ones are dropped,
    so each round costs only as much as the walkers still matching.
    Emits (start, state) for every output state reached.
    """
    n = text.shape[0]
    cap = hit_pos.shape[0]
    cnt = 0
    act = np.empty(BATCH, np.int64)
    st = np.empty(BATCH, np.int32)
    for blo in range(lo, hi, BATCH):
        bhi = min(blo + BATCH, hi)
        # depth 1: single-byte prefixes
        for i in range(blo, bhi):
            if root_out[text[i]]:
                if cnt < cap:
                    hit_pos[cnt] = i
                    hit_state[cnt] = root_row[text[i]]
                cnt += 1
        # depth 2 in one lookup
        c = 0
        for i in range(blo, min(bhi, n - 1)):
            s = pair[np.int64(text[i]) | (np.int64(text[i + 1]) << 8)]
            act[c] = i
            st[c] = s
            c += s >= 0
        depth = 2
        while c > 0:
            for k in range(c):
                if has_out[st[k]]:
                    if cnt < cap:
                        hit_pos[cnt] = act[k]
                        hit_state[cnt] = st[k]
                    cnt += 1
            c2 = 0
            for k in range(c):
                p = act[k] + depth
                if p >= n:
                    continue
                s = _step(compact, table, bitmap, rank, succ, st[k], np.int64(text[p]))
                act[c2] = act[k]
                st[c2] = s
                c2 += s >= 0
            c = c2
            depth += 1
    return cnt


@njit(nogil=True, cache=True)
def ac_kernel(text, k_lo, k_hi, chunk, overlap, compact, table, bitmap, rank, succ,
              fail, out_ptr, out_ids, out_lens, res_pos, res_pid):
    """Sequential AC walk over chunks k_lo..k_hi-1.

    Chunk k owns starts in [k*chunk, (k+1)*chunk) and reads ``overlap``
    bytes past its end; only matches starting inside the owned range
    are emitted.
    """
    n = text.shape[0]
    cap = res_pos.shape[0]
    cnt = 0
    for k in range(k_lo, k_hi):
        own_lo = k * chunk
        own_hi = min(own_lo + chunk, n)
        end = min(own_hi + overlap, n)
        s = np.int32(0)
        for j in range(own_lo, end):
            b = np.int64(text[j])
            while True:
                t = _step(compact, table, bitmap, rank, succ, s, b)
                if t >= 0:
                    s = t
                    break
                if s == 0:
                    break
                s = fail[s]
            for o in range(out_ptr[s], out_ptr[s + 1]):
                start = j - out_lens[o] + 1
                if start < own_hi:
                    if cnt < cap:
                        res_pos[cnt] = start
                        res_pid[cnt] = out_ids[o]
                    cnt += 1
    return cnt


@njit(nogil=True, cache=True)
def kmp_kernel(text, pat, table, res):
    """KMP over ``text``; returns (match_count, comparisons).

    Match starts are written to ``res`` while capacity lasts.
    """
    n = text.shape[0]
    m = pat.shape[0]
    cap = res.shape[0]
    cnt = 0
    cmp = 0
    q = 0
    for i in range(n):
        c = text[i]
        while True:
            cmp += 1
            if pat[q] == c:
                q += 1
                break
            if q == 0:
                break
            q = table[q - 1]
        if q == m:
            if cnt < cap:
                res[cnt] = i - m + 1
            cnt += 1
            q = table[m - 1]
    return cnt, cmp
