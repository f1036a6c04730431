"""Multi-pattern log scanning with failureless Aho-Corasick prefix matching."""

from .automata import (
    CapacityError,
    TERMINATE,
    Automaton,
    build_ac_automaton,
    build_failureless_trie,
    next_state,
    to_compact,
)
from .engine import ENGINES, LogScanner
from .kmp import build_failure_table, kmp_multi, kmp_search
from .rules import (
    Pattern,
    PrefixSet,
    RuleParseError,
    RuleSet,
    format_rules,
    parse_rules,
    truncate_prefixes,
)
from .scan import Hit, ScanConfig, chunked_ac_scan, naive_scan, pfac_scan
from .verify import Alert, ScanReport, assemble_report, verify_hits

__version__ = "0.1.0"
