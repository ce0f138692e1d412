"""Beam search for well-compressing alignments, and the search-space size.

The search grows alignments one pattern appearance at a time.  Cycle 0 pairs
New with every Old pattern.  Each later cycle takes every alignment that
entered the beam in the previous cycle and adds one more appearance of every
Old pattern, in every admissible way.  A candidate is admissible when its
columns that hold Old symbols stay totally ordered, which is exactly the
condition for the alignment to project to one sequence without arbitrary
choices.  Unmatched New symbols may float; they are residue.
"""

from __future__ import annotations

import functools
import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .alignment import Alignment, Cell, Column, linearize, make_rows
from .encoding import CostModel, UNIFORM, check_model, discriminating_positions, symbol_min_bits
from .patterns import Corpus, Pattern

PAIR_EXHAUSTIVE_LIMIT = 12


@dataclass(frozen=True)
class SearchParams:
    beam_width: int = 30
    max_gap: int | None = None
    max_appearances: int = 10
    max_cycles: int = 20
    keep_nonpositive: bool = True
    # extensions that match no further New symbol are extended again within
    # the same cycle, this many times at most
    bridge_depth: int = 2
    # cap on the ways one alignment may be extended by one pattern
    max_matchings: int = 20000
    # most drafts kept from the descendants of any one starting pair, so that
    # a few early leads cannot fill the whole beam; None for no cap
    lineage_quota: int | None = 5

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be at least 1")
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be at least 1")
        if self.max_appearances < 1:
            raise ValueError("max_appearances must be at least 1")
        if self.bridge_depth < 0:
            raise ValueError("bridge_depth must be non-negative")
        if self.max_gap is not None and self.max_gap < 0:
            raise ValueError("max_gap must be non-negative")
        if self.lineage_quota is not None and self.lineage_quota < 1:
            raise ValueError("lineage_quota must be at least 1")


@dataclass(frozen=True)
class SearchResult:
    ranked: tuple[tuple[Alignment, float], ...]
    cycles_run: int
    candidates_examined: int

    @property
    def best(self) -> tuple[Alignment, float] | None:
        return self.ranked[0] if self.ranked else None


# ---------------------------------------------------------------------------
# search-space size


def search_space_size(m: int, n: int) -> int:
    """Pairs of non-empty subsequences of a length-m and a length-n sequence."""
    if m < 1 or n < 1:
        raise ValueError("sequence lengths must be positive")
    return ((1 << m) - 1) * ((1 << n) - 1)


def search_space_double_sum(m: int, n: int) -> int:
    return sum(math.comb(m, i) * math.comb(n, j) for i in range(1, m + 1) for j in range(1, n + 1))


# ---------------------------------------------------------------------------
# drafts: the search's working form of an alignment


class _Context:
    def __init__(self, corpus: Corpus, new: Pattern, model: CostModel, params: SearchParams):
        self.corpus = corpus
        self.new = new
        self.model = model
        self.params = params
        self.patterns = list(corpus.patterns)
        self.index = {p.id: k for k, p in enumerate(self.patterns)}
        disc = discriminating_positions(corpus)
        self.disc = [disc[p.id] for p in self.patterns]
        self.cost: dict[str, float] = {}
        self.slack = [max(self.min_bits(t) for t in p.symbols) for p in self.patterns]

    def min_bits(self, sym: str) -> float:
        bits = self.cost.get(sym)
        if bits is None:
            bits = self.cost[sym] = symbol_min_bits(self.corpus, self.model, sym)
        return bits

    def pattern(self, pidx: int) -> Pattern:
        return self.new if pidx < 0 else self.patterns[pidx]


@dataclass(eq=False)
class _Draft:
    rows: tuple[int, ...]  # corpus index per row, -1 for New
    columns: tuple[tuple[Cell, ...], ...]  # sorted cells, in linear order
    score: float
    projection: tuple[str, ...]
    key: tuple
    new_hits: int
    signature: tuple  # Old material matched by each New symbol
    reach: list[int] = field(repr=False)  # bitmask of columns reachable from each column
    coreach: list[int] = field(repr=False)  # bitmask of columns reaching each column
    chain_mask: int = field(repr=False)  # columns holding Old symbols
    chain_pos: list[int] = field(repr=False)
    chain_len: int = field(repr=False)
    # per-column code bookkeeping: discriminating cells, end cells, slot flag
    stats: list[tuple[int, int, bool]] = field(repr=False)
    lineage: int = -1  # which starting pair this draft descends from

    @functools.cached_property
    def members(self) -> list[frozenset]:
        """(pattern index, position) pairs held by each column."""
        rows = self.rows
        return [frozenset((rows[r], i) for r, i in cells) for cells in self.columns]

    def rank(self):
        return (-round(self.score, 9), len(self.rows), self.projection, self.key)

    def final_rank(self):
        # ties go to the alignment whose unmatched Old symbols come latest,
        # i.e. the one that parses New from the left
        late = tuple(-k for k, cells in enumerate(self.columns) if len(cells) == 1 and cells[0][0] != 0)
        return (-round(self.score, 9), len(self.rows), late, self.projection, self.key)

    def to_alignment(self, ctx: _Context) -> Alignment:
        rows = make_rows(ctx.new, [ctx.pattern(p) for p in self.rows[1:]])
        return Alignment(rows, tuple(Column(cells) for cells in self.columns))


def _charge(stat: tuple[int, int, bool]) -> int:
    disc, ends, slot = stat
    return disc + (max(ends - 1, 0) if slot else ends)


def _build(ctx: _Context, rows: tuple[int, ...], groups: Sequence[Sequence[Cell]]) -> _Draft | None:
    """Linearize and score the alignment given by *rows* and hit *groups*.

    Returns None when the row orders are cyclic, a cell is used twice, the Old
    columns are not totally ordered, or a gap exceeds the limit.
    """
    pats = [ctx.pattern(p) for p in rows]
    lens = [len(p) for p in pats]
    off = [0]
    for n in lens:
        off.append(off[-1] + n)
    total = off[-1]
    cell_rc = [(r, i) for r, n in enumerate(lens) for i in range(n)]
    node = [-1] * total
    nodes: list[list[int]] = []
    for g in groups:
        ids = sorted(off[r] + i for r, i in g)
        for c in ids:
            if node[c] >= 0:
                return None
            node[c] = len(nodes)
        nodes.append(ids)
    for c in range(total):
        if node[c] < 0:
            node[c] = len(nodes)
            nodes.append([c])

    nn = len(nodes)
    succ: list[set[int]] = [set() for _ in range(nn)]
    indeg = [0] * nn
    for r, n in enumerate(lens):
        base = off[r]
        for i in range(1, n):
            a, b = node[base + i - 1], node[base + i]
            if a == b:
                return None
            if b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    new_len = lens[0]
    heap = [(nodes[k][-1] < new_len, nodes[k][0], k) for k in range(nn) if indeg[k] == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        _, _, k = heapq.heappop(heap)
        order.append(k)
        for m in succ[k]:
            indeg[m] -= 1
            if indeg[m] == 0:
                heapq.heappush(heap, (nodes[m][-1] < new_len, nodes[m][0], m))
    if len(order) != nn:
        return None
    pos_of = [0] * nn
    for k, n_ in enumerate(order):
        pos_of[n_] = k

    reach = [0] * nn
    for k in range(nn - 1, -1, -1):
        acc = 1 << k
        for m in succ[order[k]]:
            acc |= reach[pos_of[m]]
        reach[k] = acc

    coreach = [1 << k for k in range(nn)]
    for k in range(nn):
        for m in succ[order[k]]:
            coreach[pos_of[m]] |= coreach[k]

    chain_pos = [-1] * nn
    chain_mask = 0
    prev_old = None
    pos = 0
    for k, n_ in enumerate(order):
        if nodes[n_][-1] >= new_len:
            if prev_old is not None and not (reach[prev_old] >> k) & 1:
                return None
            chain_pos[k] = pos
            chain_mask |= 1 << k
            pos += 1
            prev_old = k

    max_gap = ctx.params.max_gap
    if max_gap is not None:
        for r, n in enumerate(lens):
            last = None
            for i in range(n):
                if len(nodes[node[off[r] + i]]) >= 2:
                    if last is not None and i - last - 1 > max_gap:
                        return None
                    last = i

    disc = [frozenset()] + [ctx.disc[p] for p in rows[1:]]
    columns = []
    symbols = []
    stats = []
    new_hits = 0
    code_bits = 0.0
    first_col: dict[int, int] = {}
    for k, n_ in enumerate(order):
        cells = tuple(cell_rc[c] for c in nodes[n_])
        columns.append(cells)
        r0, i0 = cells[0]
        sym = pats[r0].symbols[i0]
        symbols.append(sym)
        if len(cells) >= 2 and r0 == 0:
            new_hits += 1
        nd = ne = 0
        slot = False
        for r, i in cells:
            first_col.setdefault(r, k)
            if r == 0:
                continue
            if 0 < i < lens[r] - 1:
                slot = True
            if i in disc[r]:
                nd += 1
            elif i == 0 or i == lens[r] - 1:
                ne += 1
        stat = (nd, ne, slot)
        stats.append(stat)
        charged = _charge(stat)
        if charged:
            code_bits += charged * ctx.min_bits(sym)
    score = new_hits * ctx.model.actual_new_bits - code_bits

    by_pattern: dict[int, list[int]] = {}
    for r in sorted(first_col, key=first_col.get):
        by_pattern.setdefault(rows[r], []).append(r)
    label = [None] * len(rows)
    for rs in by_pattern.values():
        for n, r in enumerate(rs):
            label[r] = (rows[r], n)
    key = tuple(tuple(sorted([label[r] + (i,) for r, i in cells])) for cells in columns)
    at = [()] * new_len
    for cells in columns:
        if cells[0][0] == 0 and len(cells) > 1:
            at[cells[0][1]] = tuple(sorted([(rows[r], i) for r, i in cells[1:]]))
    return _Draft(
        rows, tuple(columns), score, tuple(symbols), key, new_hits, tuple(at),
        reach, coreach, chain_mask, chain_pos, pos, stats,
    )


def _matchings(ctx: _Context, d: _Draft, pidx: int, anchor: int = 0) -> list[list[tuple[int, int]]]:
    """Admissible ways to hit the columns of *d* with a new appearance of a pattern.

    Returns lists of (position in the pattern, column index) pairs, at least
    one pair each.  Cyclic orders and unordered Old columns are ruled out
    here; the gap limit is left to the build.  With a non-zero *anchor*
    bitmask, each matching must hit at least one of those columns.
    """
    pattern = ctx.patterns[pidx]
    n = len(pattern)
    max_gap = ctx.params.max_gap
    last_chain = d.chain_len - 1
    chain_pos = d.chain_pos
    reach = d.reach
    members = d.members
    projection = d.projection
    options = [
        [k for k, s in enumerate(projection) if s == sym and (pidx, j) not in members[k]]
        for j, sym in enumerate(pattern.symbols)
    ]
    # whether an anchor column is still available from position j on
    anchor_ahead = [False] * (n + 1)
    # whether any column is available from position j on
    any_ahead = [False] * (n + 1)
    for j in range(n - 1, -1, -1):
        any_ahead[j] = any_ahead[j + 1] or bool(options[j])
    if anchor:
        for j in range(n - 1, -1, -1):
            anchor_ahead[j] = anchor_ahead[j + 1] or any((anchor >> t) & 1 for t in options[j])
    limit = ctx.params.max_matchings
    out: list[list[tuple[int, int]]] = []
    chosen: list[tuple[int, int]] = []

    def dfs(j: int, used: int) -> None:
        if len(out) >= limit:
            return
        if anchor and not used & anchor and not anchor_ahead[j]:
            return
        if not chosen and not any_ahead[j]:
            return
        if j == n:
            if not chosen:
                return
            lj, lt = chosen[-1]
            if lj < n - 1 and chain_pos[lt] >= 0 and chain_pos[lt] != last_chain:
                return
            if _stays_ordered(d, n, chosen):
                out.append(list(chosen))
            return
        if chosen:
            pj, pt = chosen[-1]
            gap = j - pj - 1
            pcp = chain_pos[pt]
            if max_gap is None or gap <= max_gap:
                for t in options[j]:
                    if (used >> t) & 1 or reach[t] & used:
                        continue
                    cp = chain_pos[t]
                    if gap > 0 and cp >= 0 and pcp >= 0 and cp != pcp + 1:
                        continue
                    chosen.append((j, t))
                    dfs(j + 1, used | (1 << t))
                    chosen.pop()
        else:
            for t in options[j]:
                if j > 0 and chain_pos[t] > 0:
                    continue
                chosen.append((j, t))
                dfs(j + 1, 1 << t)
                chosen.pop()
        dfs(j + 1, used)

    dfs(0, 0)
    return out


def _stays_ordered(d: _Draft, n: int, chosen: list[tuple[int, int]]) -> bool:
    """Whether every cell of the added pattern is ordered against every
    column that already holds Old symbols."""
    full = d.chain_mask
    if not full:
        return True
    m = len(chosen)
    before = [0] * m  # columns reaching the k-th target, through earlier targets
    acc = 0
    for k, (_, t) in enumerate(chosen):
        acc |= d.coreach[t]
        before[k] = acc
    after = [0] * m
    acc = 0
    for k in range(m - 1, -1, -1):
        acc |= d.reach[chosen[k][1]]
        after[k] = acc
    # cells before the first target, between targets, after the last one
    if chosen[0][0] > 0 and after[0] & full != full:
        return False
    for k in range(m):
        if (before[k] | after[k]) & full != full:
            return False
        if k + 1 < m and chosen[k + 1][0] - chosen[k][0] > 1 and (before[k] | after[k + 1]) & full != full:
            return False
    if chosen[-1][0] < n - 1 and before[-1] & full != full:
        return False
    return True


def _quick_score(ctx: _Context, d: _Draft, pidx: int, matching: list[tuple[int, int]]) -> tuple[float, int]:
    """Score and New-hit count of *d* extended by *matching*, without building it."""
    pattern = ctx.patterns[pidx]
    n = len(pattern)
    disc = ctx.disc[pidx]
    target = dict(matching)
    gain = 0
    delta = 0.0
    for j in range(n):
        is_disc = j in disc
        is_end = not is_disc and (j == 0 or j == n - 1)
        t = target.get(j)
        if t is None:
            if is_disc or is_end:
                delta += ctx.min_bits(pattern.symbols[j])
            continue
        nd, ne, slot = d.stats[t]
        after = _charge((nd + is_disc, ne + is_end, slot or 0 < j < n - 1))
        if after != _charge(d.stats[t]):
            delta += (after - _charge(d.stats[t])) * ctx.min_bits(pattern.symbols[j])
        if len(d.columns[t]) == 1 and d.columns[t][0][0] == 0:
            gain += 1
    return d.score + gain * ctx.model.actual_new_bits - delta, d.new_hits + gain


def _quick_signature(d: _Draft, pidx: int, matching: list[tuple[int, int]]) -> tuple:
    at = list(d.signature)
    for j, t in matching:
        r, i = d.columns[t][0]
        if r == 0:
            at[i] = tuple(sorted(at[i] + ((pidx, j),)))
    return tuple(at)


def _row_columns(d: _Draft, row: int) -> int:
    """Bitmask of the columns holding a cell of *row*."""
    mask = 0
    for k, cells in enumerate(d.columns):
        if any(r == row for r, _ in cells):
            mask |= 1 << k
    return mask


def _extend_one(ctx: _Context, d: _Draft, pidx: int, matching: list[tuple[int, int]]) -> _Draft | None:
    new_row = len(d.rows)
    groups = [list(cells) for cells in d.columns]
    for j, t in matching:
        groups[t].append((new_row, j))
    child = _build(ctx, d.rows + (pidx,), groups)
    if child is not None:
        child.lineage = d.lineage
    return child


def _seed_drafts(ctx: _Context, pidx: int) -> Iterator[_Draft]:
    for matching in _pair_matchings(ctx.new, ctx.patterns[pidx], ctx.params):
        groups = [((0, i), (1, j)) for i, j in matching]
        draft = _build(ctx, (-1, pidx), groups)
        if draft is not None:
            yield draft


# ---------------------------------------------------------------------------
# pairwise alignment


def _pair_matchings(a: Pattern, b: Pattern, params: SearchParams) -> list[list[tuple[int, int]]]:
    """Order-preserving sets of equal-symbol pairs (i in a, j in b), at least one pair."""
    max_gap = params.max_gap
    out: list[list[tuple[int, int]]] = []

    def gap_ok(pi, pj, i, j):
        return max_gap is None or (i - pi - 1 <= max_gap and j - pj - 1 <= max_gap)

    if len(a) <= PAIR_EXHAUSTIVE_LIMIT and len(b) <= PAIR_EXHAUSTIVE_LIMIT:
        chosen: list[tuple[int, int]] = []

        def dfs(i: int, jmin: int):
            if i == len(a):
                if chosen:
                    out.append(list(chosen))
                return
            for j in range(jmin, len(b)):
                if a[i] == b[j] and (not chosen or gap_ok(*chosen[-1], i, j)):
                    chosen.append((i, j))
                    dfs(i + 1, j + 1)
                    chosen.pop()
            dfs(i + 1, jmin)

        dfs(0, 0)
    else:
        # beam over positions of a, ranked by hits then leftmost hits
        beam: list[list[tuple[int, int]]] = [[]]
        for i in range(len(a)):
            grown = []
            for partial in beam:
                grown.append(partial)
                jmin = partial[-1][1] + 1 if partial else 0
                for j in range(jmin, len(b)):
                    if a[i] == b[j] and (not partial or gap_ok(*partial[-1], i, j)):
                        grown.append(partial + [(i, j)])
            grown.sort(key=lambda m: (-len(m), m))
            beam = grown[: max(params.beam_width, 1)]
        out = [m for m in beam if m]
    out.sort(key=lambda m: (-len(m), m))
    return out


def align_pair(a: Pattern, b: Pattern, params: SearchParams = SearchParams()) -> list[Alignment]:
    """Alignments of *a* (as New) with one appearance of *b*, most hits first.

    Exhaustive when both patterns have at most 12 symbols, otherwise the
    ``beam_width`` best partial matchings are kept position by position.
    """
    rows = make_rows(a, [b])
    return [
        Alignment(rows, linearize(rows, [((0, i), (1, j)) for i, j in m]))
        for m in _pair_matchings(a, b, params)
    ]


# ---------------------------------------------------------------------------
# the search proper


def find_alignments(
    corpus: Corpus,
    new: Pattern,
    model: CostModel = UNIFORM,
    params: SearchParams = SearchParams(),
    progress: Callable[[str], None] | None = None,
) -> SearchResult:
    """Best alignments of *new* against *corpus*, best first.

    Ranking is by score, then fewer Old rows, then a preference for reading
    New from the left, then projection and structure, so results do not
    depend on hash order or timing.
    """
    check_model(corpus, model)
    ctx = _Context(corpus, new, model, params)
    keep = params.keep_nonpositive
    beam = params.beam_width
    seen: set[tuple] = set()
    expanded: set[tuple] = set()
    examined = 0

    def fresh_draft(draft: _Draft | None) -> bool:
        if draft is None or draft.key in seen:
            return False
        seen.add(draft.key)
        return True

    pool = []
    for pidx in range(len(ctx.patterns)):
        for draft in _seed_drafts(ctx, pidx):
            examined += 1
            if fresh_draft(draft) and (keep or draft.score > 0):
                pool.append(draft)
    for n, draft in enumerate(pool):
        draft.lineage = n
    quota = params.lineage_quota or beam
    retained = _select(pool, beam, quota)
    fresh = list(retained)
    cycles = 1
    if progress:
        progress(_progress_line(0, retained))

    while cycles < params.max_cycles and fresh:
        # candidates are (quick key, parent, pattern, matching) or built drafts
        lazy: list[tuple] = []

        def collect(parent: _Draft, depth: int, anchor: int = 0):
            nonlocal examined
            for pidx in range(len(ctx.patterns)):
                if sum(1 for p in parent.rows if p == pidx) >= params.max_appearances:
                    continue
                # after a bridge, only steps that use it; the others are
                # reached from the parent directly
                for matching in _matchings(ctx, parent, pidx, anchor):
                    examined += 1
                    score, hits = _quick_score(ctx, parent, pidx, matching)
                    if depth > 0 and hits == parent.new_hits:
                        if score < parent.score - ctx.slack[pidx] - 1e-9:
                            # a bridge may cost one code symbol at most
                            lazy.append(
                                ((-round(score, 6), len(parent.rows) + 1), len(lazy), (parent, pidx, matching))
                            )
                            continue
                        child = _extend_one(ctx, parent, pidx, matching)
                        if child is None:
                            continue
                        if fresh_draft(child):
                            lazy.append(((-round(child.score, 6), len(child.rows)), len(lazy), child))
                        if child.key not in expanded:
                            expanded.add(child.key)
                            collect(child, depth - 1, _row_columns(child, len(child.rows) - 1))
                        continue
                    lazy.append(
                        ((-round(score, 6), len(parent.rows) + 1), len(lazy), (parent, pidx, matching))
                    )

        for draft in fresh:
            expanded.add(draft.key)
            collect(draft, params.bridge_depth)
        lazy.sort(key=lambda e: (e[0], e[1]))

        # build in quick-score order, one draft per hit signature, and stop
        # once the beam can no longer change
        built: list[_Draft] = []
        taken: dict[tuple, tuple] = {}  # signature -> (quick key, lineage)
        for d in retained:
            key = (-round(d.score, 6), len(d.rows))
            if d.signature not in taken or key < taken[d.signature][0]:
                taken[d.signature] = (key, d.lineage)
        k = 0
        while k < len(lazy):
            group = lazy[k][0]
            ahead: dict[int, int] = {}
            for key, lineage in taken.values():
                if key < group:
                    ahead[lineage] = ahead.get(lineage, 0) + 1
            if sum(min(n, quota) for n in ahead.values()) >= beam:
                break
            while k < len(lazy) and lazy[k][0] == group:
                item = lazy[k][2]
                k += 1
                lineage = item.lineage if isinstance(item, _Draft) else item[0].lineage
                if ahead.get(lineage, 0) >= quota:
                    continue
                if isinstance(item, _Draft):
                    draft = item
                    if draft.signature in taken:
                        continue
                else:
                    if _quick_signature(*item) in taken:
                        continue
                    draft = _extend_one(ctx, *item)
                    if not fresh_draft(draft):
                        continue
                if keep or draft.score > 0:
                    built.append(draft)
                    taken[draft.signature] = (group, lineage)

        merged = _select(retained + built, beam, quota)
        kept = {id(d) for d in retained}
        fresh = [d for d in merged if id(d) not in kept]
        retained = merged
        if not fresh:
            break
        if progress:
            progress(_progress_line(cycles, retained))
        cycles += 1

    ranked = tuple((d.to_alignment(ctx), d.score) for d in sorted(retained, key=_Draft.final_rank))
    return SearchResult(ranked, cycles, examined)


def _select(drafts: list[_Draft], beam: int, quota: int) -> list[_Draft]:
    """Best *beam* drafts, one per hit signature so that variants differing
    only in unmatched Old material do not crowd the beam, and at most *quota*
    per lineage."""
    out = []
    taken = set()
    per_lineage: dict[int, int] = {}
    for d in sorted(drafts, key=_Draft.rank):
        if d.signature in taken:
            continue
        taken.add(d.signature)
        if per_lineage.get(d.lineage, 0) >= quota:
            continue
        per_lineage[d.lineage] = per_lineage.get(d.lineage, 0) + 1
        out.append(d)
        if len(out) == beam:
            break
    return out


def _progress_line(cycle: int, retained: Sequence[_Draft]) -> str:
    best = f"{retained[0].score:.4f}" if retained else "none"
    return f"cycle={cycle} retained={len(retained)} best={best}"
