"""Synthetic log corpora from MT19937.

Byte stream definition (bit-exact across implementations):

* MT19937, 32-bit, seeded with the standard ``init_genrand`` multiplier.
* Each output word contributes its low byte ``v``; if ``v < 190`` the
  emitted byte is ``32 + v % 95``, otherwise the word is discarded.
* Every ``line_len``-th byte of the file (positions ``line_len - 1``,
  ``2 * line_len - 1``, ...) is LF and consumes no PRNG output.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PRINTABLE_LO = 32
PRINTABLE_COUNT = 95
_ACCEPT_BELOW = 2 * PRINTABLE_COUNT
_BLOCK = 1 << 23


class MT19937:
    """Reference scalar Mersenne Twister (32-bit)."""

    N, M = 624, 397

    def __init__(self, seed: int = 5489) -> None:
        self.mt = [0] * self.N
        self.mt[0] = seed & 0xFFFFFFFF
        for i in range(1, self.N):
            prev = self.mt[i - 1]
            self.mt[i] = (1812433253 * (prev ^ (prev >> 30)) + i) & 0xFFFFFFFF
        self.index = self.N

    def _twist(self) -> None:
        mt = self.mt
        for i in range(self.N):
            y = (mt[i] & 0x80000000) | (mt[(i + 1) % self.N] & 0x7FFFFFFF)
            v = mt[(i + self.M) % self.N] ^ (y >> 1)
            if y & 1:
                v ^= 0x9908B0DF
            mt[i] = v
        self.index = 0

    def next_u32(self) -> int:
        if self.index >= self.N:
            self._twist()
        y = self.mt[self.index]
        self.index += 1
        y ^= y >> 11
        y ^= (y << 7) & 0x9D2C5680
        y ^= (y << 15) & 0xEFC60000
        y ^= y >> 18
        return y


class WordStream:
    """Bulk MT19937 output via numpy's legacy generator.

    ``RandomState(int)`` applies ``init_genrand`` and full-range uint32 draws
    return raw tempered words, so this matches :class:`MT19937` word for word.
    """

    def __init__(self, seed: int) -> None:
        if not 0 <= seed <= 0xFFFFFFFF:
            raise ValueError("seed must be a 32-bit unsigned integer")
        self._rs = np.random.RandomState(seed)

    def take(self, count: int) -> np.ndarray:
        return self._rs.randint(0, 1 << 32, size=count, dtype=np.uint32)


@dataclass(frozen=True)
class GenSpec:
    size: int = 100 * 10**6
    seed: int = 5489
    line_len: int = 80

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("size must be >= 1")
        if self.line_len < 2:
            raise ValueError("line_len must be >= 2")
        if not 0 <= self.seed <= 0xFFFFFFFF:
            raise ValueError("seed must be a 32-bit unsigned integer")


def printable_stream(words: WordStream, count: int) -> np.ndarray:
    """``count`` printable bytes by rejection sampling of the low byte lane."""
    out = np.empty(count, np.uint8)
    filled = 0
    while filled < count:
        need = min(count - filled, _BLOCK)
        lanes = (words.take(need + need // 3 + 64) & 0xFF).astype(np.uint8)
        ok = lanes[lanes < _ACCEPT_BELOW][: count - filled]
        out[filled:filled + len(ok)] = PRINTABLE_LO + ok % PRINTABLE_COUNT
        filled += len(ok)
    return out


def generate_log(spec: GenSpec) -> tuple[bytes, str]:
    """Return ``(data, sha256_hex)`` for ``spec``; deterministic in the seed."""
    text_pos = np.ones(spec.size, np.bool_)
    text_pos[spec.line_len - 1 :: spec.line_len] = False
    out = np.full(spec.size, 0x0A, np.uint8)
    out[text_pos] = printable_stream(WordStream(spec.seed), spec.size - spec.size // spec.line_len)
    data = out.tobytes()
    return data, hashlib.sha256(data).hexdigest()


def write_log(spec: GenSpec, path: str | Path) -> str:
    data, digest = generate_log(spec)
    Path(path).write_bytes(data)
    return digest
