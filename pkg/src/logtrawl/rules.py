"""Rule files, pattern sets and truncated prefix sets.

A rule file holds one rule per line::

    # comment
    ssh-fail : Failed password for root
    nul-run  : \\x00\\x00\\x00\\x00

The name is everything before the first ``:``; the pattern is the rest with
surrounding whitespace stripped.  Inside the pattern ``\\xNN`` inserts a raw
byte and ``\\\\`` a literal backslash; any other escape is an error.
Matching is exact and case-sensitive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

DEFAULT_PREFIX_LEN = 8
MAX_PATTERN_LEN = 4096

_HEX = re.compile(rb"[0-9A-Fa-f]{2}")


class RuleParseError(ValueError):
    """Raised for malformed rule files; ``lineno`` is 1-based."""

    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Pattern:
    id: int
    name: str
    data: bytes

    def __post_init__(self) -> None:
        if not self.data:
            raise ValueError("pattern bytes must be non-empty")

    def __len__(self) -> int:
        return len(self.data)


@dataclass(frozen=True)
class RuleSet:
    patterns: tuple[Pattern, ...] = ()
    max_len: int = field(init=False)

    def __post_init__(self) -> None:
        pats = tuple(self.patterns)
        object.__setattr__(self, "patterns", pats)
        for i, p in enumerate(pats):
            if p.id != i:
                raise ValueError(f"pattern ids must be 0..n-1 in order, got {p.id} at {i}")
        if len({p.data for p in pats}) != len(pats):
            raise ValueError("duplicate pattern bytes in rule set")
        object.__setattr__(self, "max_len", max((len(p) for p in pats), default=0))

    @classmethod
    def from_patterns(cls, patterns, names=None) -> RuleSet:
        """Build a rule set from raw byte strings, naming them ``rule-<id>``
        unless ``names`` is given."""
        datas = [p.encode() if isinstance(p, str) else bytes(p) for p in patterns]
        if names is None:
            names = [f"rule-{i}" for i in range(len(datas))]
        return cls(tuple(Pattern(i, n, d) for i, (n, d) in enumerate(zip(names, datas))))

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def __getitem__(self, i: int) -> Pattern:
        return self.patterns[i]


@dataclass(frozen=True)
class PrefixEntry:
    prefix: bytes
    pattern_ids: tuple[int, ...]


@dataclass(frozen=True)
class PrefixSet:
    """Patterns cut to their first ``prefix_len`` bytes, merged on collision.

    ``prefix_len`` of ``None`` means no truncation.
    """

    prefix_len: int | None
    entries: tuple[PrefixEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def pattern_ids(self) -> set[int]:
        return {i for e in self.entries for i in e.pattern_ids}


def _unescape(raw: bytes, lineno: int) -> bytes:
    out = bytearray()
    i = 0
    n = len(raw)
    while i < n:
        c = raw[i]
        if c != 0x5C:  # backslash
            out.append(c)
            i += 1
            continue
        if raw[i + 1 : i + 2] == b"\\":
            out.append(0x5C)
            i += 2
        elif raw[i + 1 : i + 2] == b"x" and _HEX.fullmatch(raw[i + 2 : i + 4]):
            out.append(int(raw[i + 2 : i + 4], 16))
            i += 4
        else:
            raise RuleParseError(lineno, f"malformed escape {raw[i:i + 4]!r}")
    return bytes(out)


def _escape(data: bytes) -> str:
    parts = []
    last = len(data) - 1
    for i, b in enumerate(data):
        if b == 0x5C:
            parts.append("\\\\")
        elif 0x21 <= b <= 0x7E or (b == 0x20 and 0 < i < last):
            parts.append(chr(b))
        else:
            parts.append(f"\\x{b:02x}")
    return "".join(parts)


def parse_rules(source: str | bytes) -> RuleSet:
    """Parse rule-file content into a :class:`RuleSet`.

    Patterns keep file order and get ids 0, 1, 2, ...  Lines may end in LF
    or CRLF.  Raises :class:`RuleParseError` on an empty pattern, a bad
    escape, a missing separator, an over-long pattern or a duplicate.
    """
    if isinstance(source, str):
        source = source.encode("utf-8")
    patterns: list[Pattern] = []
    seen: dict[bytes, int] = {}
    for lineno, line in enumerate(source.split(b"\n"), start=1):
        line = line.removesuffix(b"\r")
        stripped = line.strip()
        if not stripped or stripped.startswith(b"#"):
            continue
        name, sep, rest = line.partition(b":")
        if not sep:
            raise RuleParseError(lineno, "expected 'name : pattern'")
        name = name.strip().decode("utf-8", errors="replace")
        if not name:
            raise RuleParseError(lineno, "missing rule name")
        data = _unescape(rest.strip(), lineno)
        if not data:
            raise RuleParseError(lineno, "empty pattern")
        if len(data) > MAX_PATTERN_LEN:
            raise RuleParseError(lineno, f"pattern longer than {MAX_PATTERN_LEN} bytes")
        if data in seen:
            raise RuleParseError(
                lineno, f"duplicate pattern (first defined on line {seen[data]})"
            )
        seen[data] = lineno
        patterns.append(Pattern(len(patterns), name, data))
    return RuleSet(tuple(patterns))


def format_rules(rules: RuleSet) -> str:
    """Serialize ``rules`` so that ``parse_rules(format_rules(r)) == r``."""
    return "".join(f"{p.name} : {_escape(p.data)}\n" for p in rules)


def truncate_prefixes(rules: RuleSet, prefix_len: int | None = DEFAULT_PREFIX_LEN) -> PrefixSet:
    if prefix_len is not None and prefix_len < 1:
        raise ValueError("prefix_len must be >= 1")
    groups: dict[bytes, list[int]] = {}
    for p in rules:
        key = p.data if prefix_len is None else p.data[:prefix_len]
        groups.setdefault(key, []).append(p.id)
    entries = tuple(PrefixEntry(k, tuple(v)) for k, v in groups.items())
    return PrefixSet(prefix_len, entries)
