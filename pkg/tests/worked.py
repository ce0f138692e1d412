"""Alignments assembled cell by cell, independent of the search."""

from __future__ import annotations

from icmaus.alignment import Alignment, linearize, make_rows
from icmaus.patterns import Corpus, Pattern, fixture_corpus


def _by_text(corpus: Corpus) -> dict[str, Pattern]:
    return {p.text: p for p in corpus}


def sentence_parse() -> tuple[Alignment, Corpus]:
    """'j o h n r u n s' parsed as S -> N V."""
    corpus = fixture_corpus("sentences")
    g = _by_text(corpus)
    old = [g["S N #N V #V #S"], g["N 0 j o h n #N"], g["V 1 r u n s #V"]]
    rows = make_rows(Pattern.of("j o h n r u n s", id="new"), old)
    hits = [[(0, k), (2, k + 2)] for k in range(4)]
    hits += [[(0, k + 4), (3, k + 2)] for k in range(4)]
    hits += [[(1, 1), (2, 0)], [(1, 2), (2, 6)], [(1, 3), (3, 0)], [(1, 4), (3, 6)]]
    return Alignment(rows, linearize(rows, hits)), corpus


def rotation_step(word: str = "a b c b t") -> tuple[Alignment, Corpus]:
    """The leading letter bound by its P pattern, the rest threaded through
    the recursive pattern one L pattern at a time."""
    corpus = fixture_corpus("rotation")
    g = _by_text(corpus)
    w = word.split()
    bridge = g["$ L #L $ #$ #$"]
    old = [g[f"P {w[0]} $ #$ {w[0]} #P"]]
    for x in w[1:]:
        old += [bridge, g[f"L {x} #L"]]
    rows = make_rows(Pattern.of(word, id="new"), old)
    hits = [[(0, 0), (1, 1)], [(1, 2), (2, 0)], [(1, 3), (2, 5)]]
    rest = len(w) - 1
    for k in range(rest):
        br, lr = 2 + 2 * k, 3 + 2 * k
        hits += [[(br, 1), (lr, 0)], [(br, 2), (lr, 2)], [(0, k + 1), (lr, 1)]]
        if k < rest - 1:
            hits += [[(br, 3), (br + 2, 0)], [(br, 4), (br + 2, 5)]]
    return Alignment(rows, linearize(rows, hits)), corpus


def unary_nest(n: int = 5) -> tuple[Alignment, Corpus]:
    """n copies of '$ $ #$ 1 #$' nested inside one another."""
    corpus = fixture_corpus("unary")
    p = corpus.patterns[0]
    rows = make_rows(Pattern.of(" ".join(["1"] * n), id="new"), [p] * n)
    hits = []
    for r in range(1, n + 1):
        hits.append([(0, n - r), (r, 3)])
        if r < n:
            hits += [[(r, 1), (r + 1, 0)], [(r, 2), (r + 1, 4)]]
    return Alignment(rows, linearize(rows, hits)), corpus


def palindrome_parse() -> tuple[Alignment, Corpus]:
    """'a c b a b a b c a' as four matched pairs around a middle 'b'."""
    corpus = fixture_corpus("palindrome")
    g = _by_text(corpus)
    pair = {x: g[f"L1 {x} #L1 L2 {x} #L2"] for x in "abc"}
    outer = g["$ L1 #L1 $ #$ L2 #L2 #$"]
    core = g["$ L #L #$"]
    old = [pair["a"], outer, pair["b"], outer, pair["c"], outer, pair["a"], outer, g["L b #L"], core]
    rows = make_rows(Pattern.of("a c b a b a b c a", id="new"), old)
    hits = []
    ends = {1: (3, 5), 3: (2, 6), 5: (1, 7), 7: (0, 8)}
    for p, (i, j) in ends.items():
        r = p + 1
        hits += [[(0, i), (p, 1)], [(0, j), (p, 4)], [(r, 1), (p, 0)], [(r, 2), (p, 2)],
                 [(r, 5), (p, 3)], [(r, 6), (p, 5)]]
        if r < 8:
            hits += [[(r, 0), (r + 2, 3)], [(r, 7), (r + 2, 4)]]
    hits += [[(2, 3), (10, 0)], [(2, 4), (10, 3)], [(10, 1), (9, 0)], [(10, 2), (9, 2)], [(0, 4), (9, 1)]]
    return Alignment(rows, linearize(rows, hits)), corpus


ROTATION_PROJECTION = "P a $ L b #L $ L c #L $ L b #L $ L t #L $ #$ #$ #$ #$ #$ a #P"
SENTENCE_PROJECTION = "S N 0 j o h n #N V 1 r u n s #V #S"
