"""Checking an alignment against one PCS step, and translating a PCS to patterns."""

from __future__ import annotations

from dataclasses import dataclass

from .alignment import Alignment, find_mismatches
from .patterns import Corpus, Pattern, build_corpus
from .pcs import DerivationStep, PcsError, PcsSystem, Production, is_variable, text

CONDITIONS = (
    "no-mismatch",
    "symbol-mapping-of-I",
    "order-of-I",
    "production-mapping",
    "hit-column-correspondence",
)

SERVICE_SYMBOLS = ("P", "#P", "$", "#$", "L", "#L")


class UnsupportedFormError(PcsError):
    """The translation only covers productions of the form ``g $ -> $ h``."""


@dataclass(frozen=True)
class EquivalenceReport:
    results: tuple[tuple[str, bool], ...]
    diagnostics: tuple[str, ...]

    @property
    def equivalent(self) -> bool:
        return all(ok for _, ok in self.results)

    def __getitem__(self, name: str) -> bool:
        return dict(self.results)[name]

    @property
    def failed(self) -> list[str]:
        return [name for name, ok in self.results if not ok]

    def render(self) -> str:
        lines = [f"{name}: {'PASS' if ok else 'FAIL'}" for name, ok in self.results]
        lines += [f"  {d}" for d in self.diagnostics]
        lines.append(f"equivalent: {'yes' if self.equivalent else 'no'}")
        return "\n".join(lines) + "\n"


def production_signature(p: Production) -> tuple[str, ...]:
    """The production as it appears inside its pattern: g, the variable
    bracket, then h."""
    if not p.is_normal_form:
        raise UnsupportedFormError(f"production {p.text!r} is not of the form g $ -> $ h")
    return p.lhs[:-1] + ("$", "#$") + p.rhs[1:]


def _embed(needle, hay) -> list[int] | None:
    """Leftmost positions of *needle* as a subsequence of *hay*."""
    out = []
    k = 0
    for i, t in enumerate(hay):
        if k < len(needle) and t == needle[k]:
            out.append(i)
            k += 1
    return out if k == len(needle) else None


def check_step_equivalence(st: DerivationStep, alignment: Alignment) -> EquivalenceReport:
    diag: list[str] = []
    new = alignment.new.symbols
    inp = st.input

    fatal = [m for m in find_mismatches(alignment) if m.fatal]
    c1 = not fatal
    for m in fatal:
        diag.append(f"no-mismatch: unmatched Old symbols of rows {list(m.old_rows)} between hits {m.span}")

    pool = list(new)
    c2 = True
    for t in inp:
        if t in pool:
            pool.remove(t)
        else:
            c2 = False
            diag.append(f"symbol-mapping-of-I: {t!r} has no partner in New")
            break

    in_new = _embed(inp, new)
    c3 = in_new is not None
    if not c3:
        diag.append(f"order-of-I: {text(inp)!r} is not in order within New")

    row = None
    row_pos: list[int] | None = None
    try:
        sig = production_signature(st.production)
    except UnsupportedFormError as exc:
        sig = None
        diag.append(f"production-mapping: {exc}")
    if sig is not None:
        for r in alignment.rows[1:]:
            row_pos = _embed(sig, r.pattern.symbols)
            if row_pos is not None:
                row = r.index
                break
        if row is None:
            diag.append(f"production-mapping: no Old row contains {text(sig)!r}")
    c4 = row is not None

    c5 = False
    if c3 and c4:
        where = alignment.cell_columns()
        g = st.production.lhs[:-1]
        pairs: list[tuple[str, int | None]] = []
        # fixed part of the left side against the leading input symbols
        for k in range(len(g)):
            a = where.get((0, in_new[k]))
            b = where.get((row, row_pos[k]))
            pairs.append((f"{g[k]!r} at input {k}", a if a is not None and a == b else None))
        # the variable's content against Old material
        for k in range(len(g), len(inp)):
            col = where.get((0, in_new[k]))
            ok = col is not None and any(r != 0 for r, _ in alignment.columns[col].cells)
            pairs.append((f"variable content {inp[k]!r} at input {k}", col if ok else None))
        missing = [name for name, col in pairs if col is None]
        for name in missing:
            diag.append(f"hit-column-correspondence: no hit column for {name}")
        cols = [col for _, col in pairs if col is not None]
        ordered = all(a < b for a, b in zip(cols, cols[1:]))
        if not missing and not ordered:
            diag.append("hit-column-correspondence: hit columns are out of order")
        c5 = not missing and ordered
    elif not c4 or not c3:
        diag.append("hit-column-correspondence: needs the input and the production to be located")

    results = tuple(zip(CONDITIONS, (c1, c2, c3, c4, c5)))
    return EquivalenceReport(results, tuple(diag))


def pcs_to_sp(system: PcsSystem) -> Corpus:
    """Patterns for a PCS whose productions all have the form ``g $ -> $ h``.

    One ``L x #L`` per alphabet symbol, one ``P g $ #$ h #P`` per production,
    then the recursive ``$ L #L $ #$ #$`` standing for any string.
    """
    clash = [t for t in system.alphabet if t in SERVICE_SYMBOLS]
    if clash:
        raise UnsupportedFormError(f"alphabet symbol {clash[0]!r} is a service symbol")
    texts = [("L", x, "#L") for x in system.alphabet]
    for p in system.productions:
        texts.append(("P",) + production_signature(p) + ("#P",))
    texts.append(("$", "L", "#L", "$", "#$", "#$"))
    return build_corpus(Pattern(f"p{k}", syms) for k, syms in enumerate(texts, start=1))


def strip_service(symbols, service=SERVICE_SYMBOLS) -> tuple[str, ...]:
    drop = set(service)
    return tuple(t for t in symbols if t not in drop)


def variable_content(projection, service=SERVICE_SYMBOLS, marker: str = "$") -> tuple[str, ...] | None:
    """Data symbols of a projection from the first variable marker onward."""
    symbols = tuple(projection)
    if marker not in symbols:
        return None
    return strip_service(symbols[symbols.index(marker):], service)


def is_variable_token(token: str) -> bool:
    return is_variable(token)
