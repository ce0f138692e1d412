"""Multiple alignments of New against appearances of Old patterns.

Row 0 always holds New.  Every other row is one appearance of an Old pattern.
Columns are ordered; a column with two or more cells is a hit column and all of
its cells carry the same symbol.  Columns with a single cell are unmatched
symbols.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .patterns import Pattern, PatternFormatError, Symbol

Cell = tuple[int, int]  # (row index, position within the row's pattern)

NEW_ID = "new"


class AlignmentError(ValueError):
    """An operation was given an alignment that breaks its precondition."""


class ProjectionAmbiguityError(AlignmentError):
    """The alignment holds an Old-Old mismatch, so it has no single projection."""


@dataclass(frozen=True)
class Row:
    index: int
    pattern: Pattern
    appearance: int = 1
    is_new: bool = False

    @property
    def label(self) -> str:
        return NEW_ID if self.is_new else f"{self.pattern.id}#{self.appearance}"


@dataclass(frozen=True)
class Column:
    cells: tuple[Cell, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(sorted(self.cells)))

    @property
    def is_hit(self) -> bool:
        return len(self.cells) >= 2

    @property
    def rows(self) -> tuple[int, ...]:
        return tuple(r for r, _ in self.cells)

    def __contains__(self, row: int) -> bool:
        return any(r == row for r, _ in self.cells)


@dataclass(frozen=True)
class Alignment:
    rows: tuple[Row, ...]
    columns: tuple[Column, ...]

    @property
    def new(self) -> Pattern:
        return self.rows[0].pattern

    def symbol(self, cell: Cell) -> Symbol:
        r, i = cell
        return self.rows[r].pattern.symbols[i]

    def column_symbol(self, k: int) -> Symbol:
        return self.symbol(self.columns[k].cells[0])

    def cell_columns(self) -> dict[Cell, int]:
        return {cell: k for k, col in enumerate(self.columns) for cell in col.cells}

    def new_hits(self) -> int:
        """Number of New symbols that sit in hit columns."""
        return sum(1 for col in self.columns if col.is_hit and 0 in col)

    def is_old_singleton(self, k: int) -> bool:
        col = self.columns[k]
        return not col.is_hit and col.cells[0][0] != 0

    def __len__(self) -> int:
        return len(self.columns)


def make_rows(new: Pattern, old: Sequence[Pattern]) -> tuple[Row, ...]:
    rows = [Row(0, new, 1, True)]
    seen: dict[str, int] = {}
    for pattern in old:
        seen[pattern.id] = seen.get(pattern.id, 0) + 1
        rows.append(Row(len(rows), pattern, seen[pattern.id]))
    return tuple(rows)


# ---------------------------------------------------------------------------
# linearisation


def linearize(rows: Sequence[Row], groups: Iterable[Iterable[Cell]]) -> tuple[Column, ...]:
    """Order the columns implied by *groups* (the hit cells) deterministically.

    Every cell not named in a group becomes a singleton column.  Columns holding
    at least one Old cell are emitted as early as the row orders allow; New-only
    columns are deferred, so each unmatched run of New lands immediately before
    the next column that must follow it.  Raises AlignmentError when the row
    orders are cyclic.
    """
    node_of: dict[Cell, int] = {}
    nodes: list[tuple[Cell, ...]] = []
    for group in groups:
        cells = tuple(sorted(set(group)))
        for cell in cells:
            if cell in node_of:
                raise AlignmentError(f"cell {cell} is in more than one column")
            node_of[cell] = len(nodes)
        nodes.append(cells)
    for row in rows:
        for i in range(len(row.pattern)):
            if (row.index, i) not in node_of:
                node_of[(row.index, i)] = len(nodes)
                nodes.append(((row.index, i),))

    succ: list[set[int]] = [set() for _ in nodes]
    indeg = [0] * len(nodes)
    for row in rows:
        prev = None
        for i in range(len(row.pattern)):
            node = node_of[(row.index, i)]
            if prev is not None and node not in succ[prev]:
                if node == prev:
                    raise AlignmentError(f"row {row.index} is matched with itself")
                succ[prev].add(node)
                indeg[node] += 1
            prev = node

    def priority(n: int):
        cells = nodes[n]
        new_only = all(r == 0 for r, _ in cells)
        return (new_only, cells[0])

    heap = [(priority(n), n) for n in range(len(nodes)) if indeg[n] == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        _, n = heapq.heappop(heap)
        order.append(n)
        for m in succ[n]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(heap, (priority(m), m))
    if len(order) != len(nodes):
        raise AlignmentError("order constraints are cyclic")
    return tuple(Column(nodes[n]) for n in order)


def from_hits(
    new: Pattern | str,
    old: Sequence[Pattern | str],
    hits: Iterable[Iterable[Cell]] = (),
) -> Alignment:
    """Build an alignment from New, the Old rows (in row order) and hit groups."""
    if isinstance(new, str):
        new = Pattern.of(new, id=NEW_ID)
    old = [Pattern.of(p, id=f"r{k + 1}") if isinstance(p, str) else p for k, p in enumerate(old)]
    rows = make_rows(new, old)
    return Alignment(rows, linearize(rows, hits))


def single_row(new: Pattern | str) -> Alignment:
    return from_hits(new, [])


# ---------------------------------------------------------------------------
# validation


class ViolationKind(str, Enum):
    STRUCTURE = "structure"
    COVERAGE = "coverage"
    HETEROGENEOUS = "heterogeneous"
    SAME_ROW = "same-row"
    SELF_MATCH = "self-match"
    ORDER = "order"
    COLUMN_ORDER = "column-order"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    detail: str


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple[Violation, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def kinds(self) -> set[ViolationKind]:
        return {v.kind for v in self.violations}

    def __bool__(self) -> bool:
        return self.valid


def validate(alignment: Alignment) -> ValidityReport:
    out: list[Violation] = []

    def bad(kind: ViolationKind, detail: str):
        out.append(Violation(kind, detail))

    rows = alignment.rows
    if not rows or not rows[0].is_new:
        bad(ViolationKind.STRUCTURE, "row 0 must hold New")
    for k, row in enumerate(rows):
        if row.index != k:
            bad(ViolationKind.STRUCTURE, f"row {k} carries index {row.index}")
        if k > 0 and row.is_new:
            bad(ViolationKind.STRUCTURE, f"row {k} is marked as New")
    ordinals: dict[str, list[int]] = {}
    for row in rows[1:]:
        ordinals.setdefault(row.pattern.id, []).append(row.appearance)
    for pid, seen in sorted(ordinals.items()):
        if sorted(seen) != list(range(1, len(seen) + 1)):
            bad(ViolationKind.STRUCTURE, f"appearances of {pid!r} are {sorted(seen)}")

    where: dict[Cell, list[int]] = {}
    for k, col in enumerate(alignment.columns):
        if not col.cells:
            bad(ViolationKind.STRUCTURE, f"column {k} is empty")
            continue
        for r, i in col.cells:
            if not (0 <= r < len(rows)) or not (0 <= i < len(rows[r].pattern)):
                bad(ViolationKind.STRUCTURE, f"column {k} names missing cell {r}@{i}")
                continue
            where.setdefault((r, i), []).append(k)
    for r, row in enumerate(rows):
        for i in range(len(row.pattern)):
            count = len(where.get((r, i), ()))
            if count != 1:
                bad(ViolationKind.COVERAGE, f"cell {r}@{i} appears in {count} columns")
    if any(v.kind == ViolationKind.STRUCTURE for v in out):
        return ValidityReport(tuple(out))

    for k, col in enumerate(alignment.columns):
        symbols = {alignment.symbol(c) for c in col.cells}
        if len(symbols) > 1:
            bad(ViolationKind.HETEROGENEOUS, f"column {k} mixes {sorted(symbols)}")
        col_rows = col.rows
        if len(set(col_rows)) != len(col_rows):
            bad(ViolationKind.SAME_ROW, f"column {k} holds two symbols of one row")
        for a in range(len(col.cells)):
            for b in range(a + 1, len(col.cells)):
                (ra, ia), (rb, ib) = col.cells[a], col.cells[b]
                if (
                    ra != rb
                    and ra != 0
                    and rb != 0
                    and rows[ra].pattern.id == rows[rb].pattern.id
                    and ia == ib
                ):
                    bad(
                        ViolationKind.SELF_MATCH,
                        f"column {k} matches position {ia} of {rows[ra].pattern.id!r} with itself",
                    )

    # pairwise order constraint between every two rows
    pairs: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for col in alignment.columns:
        for a in range(len(col.cells)):
            for b in range(len(col.cells)):
                (ra, ia), (rb, ib) = col.cells[a], col.cells[b]
                if ra < rb:
                    pairs.setdefault((ra, rb), []).append((ia, ib))
    for (ra, rb), links in sorted(pairs.items()):
        links.sort()
        for x in range(len(links)):
            for y in range(x + 1, len(links)):
                (a1, b1), (a2, b2) = links[x], links[y]
                if (a2 > a1 and not b2 > b1) or (a2 == a1 and b2 != b1):
                    bad(
                        ViolationKind.ORDER,
                        f"rows {ra} and {rb}: {ra}@{a1}~{rb}@{b1} crosses {ra}@{a2}~{rb}@{b2}",
                    )

    last_col: dict[int, int] = {}
    last_pos: dict[int, int] = {}
    for k, col in enumerate(alignment.columns):
        for r, i in col.cells:
            if r in last_pos and i <= last_pos[r]:
                bad(
                    ViolationKind.COLUMN_ORDER,
                    f"row {r}: position {i} in column {k} follows position "
                    f"{last_pos[r]} in column {last_col[r]}",
                )
            last_pos[r], last_col[r] = i, k
    return ValidityReport(tuple(out))


def require_valid(alignment: Alignment) -> None:
    report = validate(alignment)
    if not report.valid:
        raise AlignmentError(
            "invalid alignment: " + "; ".join(v.detail for v in report.violations[:3])
        )


# ---------------------------------------------------------------------------
# mismatches and projection


@dataclass(frozen=True)
class Mismatch:
    """Unmatched columns lying between two neighbouring hit columns.

    ``span`` holds the indices of the bounding hit columns, ``None`` standing for
    an edge of the alignment.  A fatal mismatch has unmatched Old symbols from
    two or more rows, so their relative order is arbitrary.  A non-fatal one
    only records New symbols that cannot be encoded.
    """

    span: tuple[int | None, int | None]
    offending_columns: tuple[int, ...]
    old_rows: tuple[int, ...]
    fatal: bool


def find_mismatches(alignment: Alignment) -> list[Mismatch]:
    """Segment scan over the column order, without validating first."""
    out = []
    hits = [k for k, col in enumerate(alignment.columns) if col.is_hit]
    bounds = [None, *hits, None]
    for left, right in zip(bounds, bounds[1:]):
        lo = 0 if left is None else left + 1
        hi = len(alignment.columns) if right is None else right
        singles = [k for k in range(lo, hi) if not alignment.columns[k].is_hit]
        if not singles:
            continue
        old = [k for k in singles if alignment.columns[k].cells[0][0] != 0]
        old_rows = tuple(sorted({alignment.columns[k].cells[0][0] for k in old}))
        if len(old) >= 2 and len(old_rows) >= 2:
            out.append(Mismatch((left, right), tuple(old), old_rows, True))
        new = tuple(k for k in singles if alignment.columns[k].cells[0][0] == 0)
        if new:
            out.append(Mismatch((left, right), new, (), False))
    return out


def detect_mismatches(alignment: Alignment) -> list[Mismatch]:
    require_valid(alignment)
    return find_mismatches(alignment)


def has_fatal_mismatch(alignment: Alignment) -> bool:
    return any(m.fatal for m in find_mismatches(alignment))


def project(alignment: Alignment) -> Pattern:
    require_valid(alignment)
    if has_fatal_mismatch(alignment):
        raise ProjectionAmbiguityError("alignment has an Old-Old mismatch")
    return Pattern("projection", tuple(alignment.column_symbol(k) for k in range(len(alignment))))


# ---------------------------------------------------------------------------
# text forms


def render(alignment: Alignment) -> str:
    """Grid layout: one line per row with the row index at both ends, and bars
    marking the vertical extent of each hit column between rows."""
    ncols = len(alignment.columns)
    nrows = len(alignment.rows)
    width = [max(len(alignment.symbol(c)) for c in col.cells) for col in alignment.columns]
    grid: list[dict[int, Symbol]] = [dict() for _ in range(nrows)]
    span: list[tuple[int, int]] = []
    for k, col in enumerate(alignment.columns):
        for r, i in col.cells:
            grid[r][k] = alignment.rows[r].pattern.symbols[i]
        span.append((min(col.rows), max(col.rows)))
    label_w = len(str(nrows - 1))

    def body(cell_text) -> str:
        return "".join(cell_text(k).ljust(width[k]) + " " for k in range(ncols))

    lines = []
    for r in range(nrows):
        def text(k, r=r):
            if k in grid[r]:
                return grid[r][k]
            lo, hi = span[k]
            return "|" if lo < r < hi else ""

        label = str(r)
        lines.append(f"{label.rjust(label_w)} {body(text)}{label}".rstrip())
        if r < nrows - 1:
            def bar(k, r=r):
                lo, hi = span[k]
                return "|" if lo <= r < hi else ""

            lines.append((" " * (label_w + 1) + body(bar)).rstrip())
    return "\n".join(lines) + "\n"


def parse_rendered_row(line: str) -> list[Symbol]:
    """Tokens of one rendered row line, labels and pass-through bars removed."""
    tokens = line.split()
    return [t for t in tokens[1:-1] if t != "|"]


def dump(alignment: Alignment) -> str:
    lines = []
    for row in alignment.rows:
        name = NEW_ID if row.is_new else row.pattern.id
        lines.append(f"row {row.index} {name} {row.appearance}: {row.pattern.text}")
    for k, col in enumerate(alignment.columns):
        lines.append(f"{k}: " + ",".join(f"{r}@{i}" for r, i in col.cells))
    return "\n".join(lines) + "\n"


def load_dump(text: str) -> Alignment:
    rows: list[Row] = []
    columns: list[Column] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise PatternFormatError("expected ':'", line_no)
        try:
            if head.startswith("row "):
                _, idx, name, appearance = head.split()
                is_new = name == NEW_ID and int(idx) == 0
                pattern = Pattern(name, tuple(tail.split()))
                rows.append(Row(int(idx), pattern, int(appearance), is_new))
            else:
                int(head)
                cells = []
                for part in tail.split(","):
                    r, _, i = part.strip().partition("@")
                    cells.append((int(r), int(i)))
                columns.append(Column(tuple(cells)))
        except (ValueError, PatternFormatError) as exc:
            raise PatternFormatError(f"malformed dump line: {exc}", line_no) from None
    if not rows:
        raise PatternFormatError("dump has no rows")
    return Alignment(tuple(rows), tuple(columns))
