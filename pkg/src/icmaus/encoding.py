"""Compression scoring of alignments.

New symbols have a notional *actual* size.  Old symbols are costed at a
*minimum* size, either one flat value or a Shannon-Fano-Elias length derived
from the corpus frequency of the symbol type.  An alignment is worth the actual
size of every New symbol it matches, less the cost of the code that identifies
the Old material used to match them.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import Literal, Sequence

from .alignment import Alignment, ProjectionAmbiguityError, has_fatal_mismatch, require_valid
from .patterns import Corpus, Pattern, Symbol

Mode = Literal["uniform", "sfe"]


class UnknownSymbolError(KeyError):
    pass


@dataclass(frozen=True)
class CostModel:
    mode: Mode = "uniform"
    actual_new_bits: float = 20.0
    uniform_min_bits: float = 4.0
    unknown_as_rare: bool = True  # cost symbols outside the corpus as frequency 1

    def __post_init__(self):
        if self.mode not in ("uniform", "sfe"):
            raise ValueError(f"unknown cost mode {self.mode!r}")
        if self.actual_new_bits <= 0 or self.uniform_min_bits <= 0:
            raise ValueError("bit sizes must be positive")
        if self.mode == "uniform" and self.actual_new_bits <= self.uniform_min_bits:
            raise ValueError("actual New symbol size must exceed the minimum size")


UNIFORM = CostModel()


def symbol_min_bits(corpus: Corpus, model: CostModel, t: Symbol) -> float:
    if model.mode == "uniform":
        return model.uniform_min_bits
    freq = corpus.symbol_frequency.get(t)
    if freq is None:
        if not model.unknown_as_rare:
            raise UnknownSymbolError(t)
        freq = 1
    return -math.log2(freq / corpus.total_frequency) + 1.0


def check_model(corpus: Corpus, model: CostModel) -> None:
    """Every minimum size must stay below the actual size of a New symbol."""
    if model.mode == "uniform":
        return
    worst = symbol_min_bits(corpus, model, min(corpus.alphabet, key=lambda t: (corpus.symbol_frequency[t], t)))
    if model.unknown_as_rare:
        worst = max(worst, -math.log2(1 / corpus.total_frequency) + 1.0)
    if model.actual_new_bits <= worst:
        raise ValueError(
            f"actual New size {model.actual_new_bits} bits does not exceed the largest "
            f"minimum size {worst:.3f} bits for this corpus"
        )


_DISC_CACHE: "weakref.WeakKeyDictionary[Corpus, dict[str, frozenset[int]]]" = weakref.WeakKeyDictionary()


def discriminating_positions(corpus: Corpus) -> dict[str, frozenset[int]]:
    """Positions that tell each pattern apart from the others in its class.

    A class is the set of patterns sharing a first symbol.  The positions are
    those after the first in the shortest prefix no other class member shares.
    A pattern alone in its class needs none.  A pattern that is a prefix of
    another, or a duplicate, needs all of them.
    """
    cached = _DISC_CACHE.get(corpus)
    if cached is not None:
        return cached
    out: dict[str, frozenset[int]] = {}
    for p in corpus.patterns:
        rivals = [q.symbols for q in corpus.patterns if q.id != p.id and q.symbols[0] == p.symbols[0]]
        k = 1
        while k < len(p) and any(q[:k] == p.symbols[:k] for q in rivals):
            k += 1
        if any(q[:k] == p.symbols[:k] for q in rivals):
            k = len(p)
        out[p.id] = frozenset(range(1, k))
    _DISC_CACHE[corpus] = out
    return out


def charged_cells(
    cells: Sequence[tuple[int, int]],
    lengths: Sequence[int],
    disc: Sequence[frozenset[int]],
) -> int:
    """Number of code symbols one column contributes.

    *cells* are the column's (row, position) pairs, *lengths* and *disc* give
    each row's pattern length and discriminating positions; row 0 is New and
    never charged.  A discriminating symbol is always charged.  A first or last
    symbol is charged unless it sits in a slot, an interior symbol of another
    row in the same column, and each slot takes one pattern only.
    """
    count = 0
    bounds = 0
    slot = False
    for r, i in cells:
        if r == 0:
            continue
        if 0 < i < lengths[r] - 1:
            slot = True
        if i in disc[r]:
            count += 1
        elif i == 0 or i == lengths[r] - 1:
            bounds += 1
    # one pattern per slot: a slot frees a single first or last symbol
    count += max(bounds - 1, 0) if slot else bounds
    return count


@dataclass(frozen=True)
class CodeSequence:
    symbols: tuple[Symbol, ...]
    bit_cost: float

    @property
    def text(self) -> str:
        return " ".join(self.symbols)


def _check_scorable(alignment: Alignment) -> None:
    require_valid(alignment)
    if has_fatal_mismatch(alignment):
        raise ProjectionAmbiguityError("alignment has an Old-Old mismatch")


def raw_code(alignment: Alignment) -> tuple[Symbol, ...]:
    """Unmatched Old symbols in column order."""
    _check_scorable(alignment)
    return tuple(
        alignment.column_symbol(k) for k in range(len(alignment)) if alignment.is_old_singleton(k)
    )


def _row_tables(alignment: Alignment, corpus: Corpus):
    table = discriminating_positions(corpus)
    lengths = [len(row.pattern) for row in alignment.rows]
    disc = [frozenset()]
    for row in alignment.rows[1:]:
        # a pattern missing from the corpus is spelled out in full
        disc.append(table.get(row.pattern.id, frozenset(range(1, len(row.pattern)))))
    return lengths, disc


def code_cells(alignment: Alignment, corpus: Corpus) -> list[int]:
    """Column index of every code symbol, repeated when a column is charged twice."""
    lengths, disc = _row_tables(alignment, corpus)
    out = []
    for k, col in enumerate(alignment.columns):
        out.extend([k] * charged_cells(col.cells, lengths, disc))
    return out


def extract_code(alignment: Alignment, corpus: Corpus, model: CostModel = UNIFORM) -> CodeSequence:
    _check_scorable(alignment)
    symbols = tuple(alignment.column_symbol(k) for k in code_cells(alignment, corpus))
    return CodeSequence(symbols, sum(symbol_min_bits(corpus, model, t) for t in symbols))


def residue(alignment: Alignment) -> tuple[Symbol, ...]:
    """New symbols left outside every hit column."""
    return tuple(
        alignment.column_symbol(k)
        for k, col in enumerate(alignment.columns)
        if not col.is_hit and col.cells[0][0] == 0
    )


def compression_score(alignment: Alignment, corpus: Corpus, model: CostModel = UNIFORM) -> float:
    code = extract_code(alignment, corpus, model)
    return alignment.new_hits() * model.actual_new_bits - code.bit_cost


def corpus_size_bits(corpus: Corpus, model: CostModel = UNIFORM) -> float:
    return sum(symbol_min_bits(corpus, model, t) for p in corpus for t in p.symbols)


def format_bits(x: float) -> str:
    return f"{x:.6g}" if x != int(x) else f"{x:.1f}"


def score_report(alignment: Alignment, corpus: Corpus, model: CostModel = UNIFORM) -> str:
    code = extract_code(alignment, corpus, model)
    score = alignment.new_hits() * model.actual_new_bits - code.bit_cost
    return (
        f"score_bits={format_bits(score)} new_hits={alignment.new_hits()} "
        f"code={code.text} residue={' '.join(residue(alignment))}"
    )


def pattern_bits(pattern: Pattern, corpus: Corpus, model: CostModel = UNIFORM) -> float:
    return sum(symbol_min_bits(corpus, model, t) for t in pattern)
