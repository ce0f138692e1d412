"""Symbols, patterns and corpora.

A symbol is an opaque whitespace-free token compared only for equality.  A
pattern is a non-empty sequence of symbols with a notional frequency.  A corpus
is the store of Old patterns together with the derived alphabet and
occurrence-weighted symbol frequencies.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

Symbol = str

_FREQ_RE = re.compile(r"^\((.*)\)$")


class PatternFormatError(ValueError):
    """A pattern line or pattern file could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class CorpusError(ValueError):
    """The patterns do not form a valid corpus."""


def check_symbol(name: str) -> Symbol:
    if not name or any(ch.isspace() for ch in name):
        raise PatternFormatError(f"invalid symbol {name!r}")
    return name


@dataclass(frozen=True)
class Pattern:
    id: str
    symbols: tuple[Symbol, ...]
    frequency: int = 1

    def __post_init__(self):
        if not self.symbols:
            raise PatternFormatError(f"pattern {self.id!r} has no symbols")
        if not isinstance(self.frequency, int) or self.frequency < 1:
            raise PatternFormatError(
                f"pattern {self.id!r}: frequency must be a positive integer"
            )
        object.__setattr__(self, "symbols", tuple(check_symbol(s) for s in self.symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    @property
    def text(self) -> str:
        return " ".join(self.symbols)

    def render(self) -> str:
        """Canonical one-line form; the frequency suffix is omitted when it is 1."""
        if self.frequency == 1:
            return self.text
        return f"{self.text} ({self.frequency})"

    @classmethod
    def of(cls, text: str | Iterable[Symbol], id: str = "", frequency: int = 1) -> "Pattern":
        syms = text.split() if isinstance(text, str) else tuple(text)
        return cls(id, tuple(syms), frequency)


def parse_pattern_line(line: str, id: str = "", line_no: int | None = None) -> Pattern:
    tokens = line.split()
    if not tokens:
        raise PatternFormatError("empty pattern line", line_no)
    frequency = 1
    m = _FREQ_RE.match(tokens[-1])
    if m:
        raw = m.group(1)
        try:
            frequency = int(raw)
        except ValueError:
            raise PatternFormatError(f"frequency {raw!r} is not an integer", line_no) from None
        if frequency <= 0:
            raise PatternFormatError(f"frequency must be positive, got {frequency}", line_no)
        tokens = tokens[:-1]
        if not tokens:
            raise PatternFormatError("pattern has a frequency but no symbols", line_no)
    try:
        return Pattern(id, tuple(tokens), frequency)
    except PatternFormatError as exc:
        raise PatternFormatError(str(exc), line_no) from None


def parse_patterns(text: str, id_prefix: str = "p") -> list[Pattern]:
    """Parse pattern-file text.  Ids are ``<prefix><n>`` numbered from 1 in file order."""
    patterns = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        patterns.append(
            parse_pattern_line(line, id=f"{id_prefix}{len(patterns) + 1}", line_no=line_no)
        )
    return patterns


def load_patterns(path: str | Path, id_prefix: str = "p") -> list[Pattern]:
    return parse_patterns(Path(path).read_text(encoding="utf-8"), id_prefix=id_prefix)


def render_patterns(patterns: Iterable[Pattern]) -> str:
    return "".join(p.render() + "\n" for p in patterns)


@dataclass(frozen=True, eq=False)
class Corpus:
    patterns: tuple[Pattern, ...]
    alphabet: frozenset[Symbol] = field(init=False)
    symbol_frequency: Mapping[Symbol, int] = field(init=False)
    _by_id: Mapping[str, Pattern] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        counts: Counter[Symbol] = Counter()
        for p in self.patterns:
            for s in p.symbols:
                counts[s] += p.frequency
        object.__setattr__(self, "symbol_frequency", dict(sorted(counts.items())))
        object.__setattr__(self, "alphabet", frozenset(counts))
        object.__setattr__(self, "_by_id", {p.id: p for p in self.patterns})

    def __len__(self) -> int:
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def get(self, pattern_id: str) -> Pattern:
        return self._by_id[pattern_id]

    @property
    def total_frequency(self) -> int:
        return sum(self.symbol_frequency.values())


def build_corpus(patterns: Iterable[Pattern]) -> Corpus:
    patterns = tuple(patterns)
    if not patterns:
        raise CorpusError("a corpus needs at least one pattern")
    seen: set[str] = set()
    for p in patterns:
        if p.id in seen:
            raise CorpusError(f"duplicate pattern id {p.id!r}")
        seen.add(p.id)
    return Corpus(patterns)


def load_corpus(path: str | Path) -> Corpus:
    return build_corpus(load_patterns(path))


def data_path(name: str) -> Path:
    """Path of a file shipped in the package's data directory."""
    return Path(str(resources.files("icmaus") / "data" / name))


def fixture_corpus(name: str) -> Corpus:
    """A shipped corpus: ``sentences``, ``rotation``, ``unary`` or ``palindrome``."""
    return load_corpus(data_path(f"{name}.txt"))
