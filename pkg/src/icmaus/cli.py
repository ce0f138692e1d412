"""Command-line interface.

Exit status is 0 on success, 1 for unreadable or malformed input and 2 when
the command ran but produced no result (no alignment, no applicable step, a
failed equivalence check, a rejected string).
"""

from __future__ import annotations

import functools
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import click

from .alignment import AlignmentError, dump, load_dump, project, render
from .encoding import CostModel, format_bits, score_report
from .equivalence import (
    SERVICE_SYMBOLS,
    UnsupportedFormError,
    check_step_equivalence,
    pcs_to_sp,
    variable_content,
)
from .patterns import Corpus, Pattern, PatternFormatError, CorpusError, load_corpus, parse_patterns, render_patterns
from .pcs import PcsError, load_pcs, recognize, run, step, text
from .search import SearchParams, find_alignments, search_space_size

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_RESULT = 2

INPUT_ERRORS = (PatternFormatError, CorpusError, PcsError, AlignmentError, OSError, ValueError)


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


def _fail(exc: Exception, path: str | Path | None = None) -> InputError:
    line = getattr(exc, "line_no", None)
    where = f"{path}:{line}: " if path and line else (f"{path}: " if path else "")
    message = exc.args[0] if isinstance(exc, (PatternFormatError, PcsError)) and exc.args else str(exc)
    return InputError(f"{where}{message}")


def _read_corpus(path: str) -> Corpus:
    try:
        return load_corpus(path)
    except INPUT_ERRORS as exc:
        raise _fail(exc, path) from None


def _read_new(path: str | None, literal: str | None) -> Pattern:
    if (path is None) == (literal is None):
        raise InputError("give exactly one of --new and --new-text")
    try:
        if literal is not None:
            return Pattern("new", tuple(literal.split()))
        patterns = parse_patterns(Path(path).read_text(encoding="utf-8"), id_prefix="new")
    except INPUT_ERRORS as exc:
        raise _fail(exc, path) from None
    if len(patterns) != 1:
        raise InputError(f"{path}: expected one New pattern, found {len(patterns)}")
    return Pattern("new", patterns[0].symbols)


def _read_pcs(path: str):
    try:
        return load_pcs(path)
    except INPUT_ERRORS as exc:
        raise _fail(exc, path) from None


def _symbols(raw: str) -> tuple[str, ...]:
    return tuple(raw.split())


# ---------------------------------------------------------------------------
# shared search and cost options


def search_options(f):
    @click.option("--beam", type=click.IntRange(min=1), default=SearchParams.beam_width, show_default=True,
                  help="Alignments kept per cycle.")
    @click.option("--max-gap", type=click.IntRange(min=0), default=None,
                  help="Most unmatched symbols allowed between two hits in one row.")
    @click.option("--max-cycles", type=click.IntRange(min=1), default=SearchParams.max_cycles, show_default=True,
                  help="Most search cycles.")
    @click.option("--max-appearances", type=click.IntRange(min=1), default=SearchParams.max_appearances,
                  show_default=True, help="Most appearances of one pattern in an alignment.")
    @click.option("--keep-nonpositive/--drop-nonpositive", default=True, show_default=True,
                  help="Whether alignments scoring zero or less may be kept.")
    @click.option("--cost-mode", type=click.Choice(["uniform", "sfe"]), default="uniform", show_default=True)
    @click.option("--actual-bits", type=float, default=CostModel.actual_new_bits, show_default=True,
                  help="Size of one New symbol before encoding.")
    @click.option("--min-bits", type=float, default=CostModel.uniform_min_bits, show_default=True,
                  help="Size of one Old symbol in uniform mode.")
    @functools.wraps(f)
    def wrapper(*args, beam, max_gap, max_cycles, max_appearances, keep_nonpositive,
                cost_mode, actual_bits, min_bits, **kwargs):
        try:
            params = SearchParams(
                beam_width=beam, max_gap=max_gap, max_cycles=max_cycles,
                max_appearances=max_appearances, keep_nonpositive=keep_nonpositive,
            )
            model = CostModel(mode=cost_mode, actual_new_bits=actual_bits, uniform_min_bits=min_bits)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        return f(*args, params=params, model=model, **kwargs)

    return wrapper


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Multiple alignment by information compression, and Post Canonical Systems."""


# ---------------------------------------------------------------------------
# align


@main.command()
@click.option("--old", "old_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Pattern file of Old patterns.")
@click.option("--new", "new_path", type=click.Path(exists=True, dir_okay=False), help="File holding one New pattern.")
@click.option("--new-text", help="The New pattern written inline.")
@click.option("--top", type=click.IntRange(min=1), default=1, show_default=True, help="Alignments to print.")
@click.option("--output", type=click.Choice(["render", "projection", "dump"]), default="render", show_default=True)
@search_options
def align(old_path, new_path, new_text, top, output, params, model):
    """Find the best alignments of a New pattern against an Old corpus."""
    corpus = _read_corpus(old_path)
    new = _read_new(new_path, new_text)
    try:
        result = find_alignments(corpus, new, model, params)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if not result.ranked:
        click.echo("no alignment found")
        sys.exit(EXIT_NO_RESULT)
    for rank, (alignment, score) in enumerate(result.ranked[:top], start=1):
        if output == "projection":
            click.echo(project(alignment).text)
            continue
        if output == "dump":
            click.echo(f"// rank {rank} score_bits={format_bits(score)}")
            click.echo(dump(alignment), nl=False)
            continue
        click.echo(f"== rank {rank} ==")
        click.echo(render(alignment), nl=False)
        click.echo(f"projection: {project(alignment).text}")
        click.echo(score_report(alignment, corpus, model))


# ---------------------------------------------------------------------------
# PCS execution


@main.command("pcs-run")
@click.argument("pcs_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_text", help="Start string; the axioms when omitted.")
@click.option("--max-steps", type=click.IntRange(min=1), default=10, show_default=True)
def pcs_run(pcs_path, input_text, max_steps):
    """Run a PCS forwards and print the derivation tree."""
    system = _read_pcs(pcs_path)
    starts = [_symbols(input_text)] if input_text is not None else list(system.axioms)
    try:
        derivations = [run(system, s, max_steps) for s in starts]
    except INPUT_ERRORS as exc:
        raise _fail(exc) from None
    for d in derivations:
        click.echo(d.render(), nl=False)
        for s in d.quiescent:
            click.echo(f"terminal: {text(s) or '(empty)'}")


@main.command("pcs-recognize")
@click.argument("pcs_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_text", required=True, help="String to recognize.")
@click.option("--max-steps", type=click.IntRange(min=1), default=20, show_default=True)
def pcs_recognize(pcs_path, input_text, max_steps):
    """Decide whether a PCS generates a string, by running it backwards."""
    system = _read_pcs(pcs_path)
    try:
        result = recognize(system, _symbols(input_text), max_steps)
    except INPUT_ERRORS as exc:
        raise _fail(exc) from None
    if not result.accepted:
        click.echo("REJECT")
        sys.exit(EXIT_NO_RESULT)
    click.echo("ACCEPT")
    click.echo(f"axiom: {text(result.chain[-1])}")
    for st in result.steps:
        click.echo(f"  {text(st.input)} -> {text(st.output)}   <- {st.describe()}")


# ---------------------------------------------------------------------------
# repeated rotation


@dataclass(frozen=True)
class CycleReport:
    outputs: tuple[tuple[str, ...], ...]
    halt: str  # why the loop stopped
    limited: bool  # stopped by the cycle cap rather than by a halt condition


def rotate_cycles(
    corpus: Corpus,
    new: Sequence[str],
    strip: Sequence[str] = SERVICE_SYMBOLS,
    cycles: int = 20,
    model: CostModel = CostModel(),
    params: SearchParams = SearchParams(),
    marker: str = "$",
) -> CycleReport:
    """Align, take the data symbols from the variable's content onward, and
    feed them back as the next New pattern."""
    if not strip:
        raise ValueError("strip list must not be empty")
    current = tuple(new)
    outputs: list[tuple[str, ...]] = []
    for _ in range(cycles):
        result = find_alignments(corpus, Pattern("new", current), model, params)
        if not result.ranked:
            return CycleReport(tuple(outputs), "no alignment", False)
        alignment, _ = result.best
        if alignment.new_hits() < len(current):
            return CycleReport(tuple(outputs), "New cannot be fully matched", False)
        out = variable_content(project(alignment).symbols, strip, marker)
        if out is None:
            return CycleReport(tuple(outputs), "no variable in the projection", False)
        if out == current:
            return CycleReport(tuple(outputs), "output unchanged", False)
        outputs.append(out)
        current = out
    return CycleReport(tuple(outputs), f"cycle limit {cycles} reached", True)


@main.command("rotate-cycle")
@click.option("--old", "old_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--new", "new_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--new-text")
@click.option("--strip", default=",".join(SERVICE_SYMBOLS), show_default=True,
              help="Comma-separated symbols removed from each projection.")
@click.option("--cycles", type=click.IntRange(min=1), default=20, show_default=True)
@search_options
def rotate_cycle(old_path, new_path, new_text, strip, cycles, params, model):
    """Repeat alignment, feeding each cycle's variable content back in."""
    corpus = _read_corpus(old_path)
    new = _read_new(new_path, new_text)
    service = tuple(s for s in (t.strip() for t in strip.split(",")) if s)
    try:
        report = rotate_cycles(corpus, new.symbols, service, cycles, model, params)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    for k, out in enumerate(report.outputs, start=1):
        click.echo(f"cycle {k}: {text(out)}")
    click.echo(("limit: " if report.limited else "halt: ") + report.halt)


# ---------------------------------------------------------------------------
# translation, equivalence, search-space size


@main.command()
@click.argument("pcs_path", type=click.Path(exists=True, dir_okay=False))
def translate(pcs_path):
    """Print the pattern corpus that models a PCS in normal form."""
    system = _read_pcs(pcs_path)
    try:
        corpus = pcs_to_sp(system)
    except UnsupportedFormError as exc:
        raise _fail(exc, pcs_path) from None
    click.echo(render_patterns(corpus.patterns), nl=False)


@main.command("check-equiv")
@click.option("--pcs", "pcs_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_text", required=True, help="String the step rewrites.")
@click.option("--rule", type=click.IntRange(min=1), default=None,
              help="1-based production number, when several steps apply.")
@click.option("--alignment", "alignment_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Alignment in dump form, as written by align --output dump.")
def check_equiv(pcs_path, input_text, rule, alignment_path):
    """Check an alignment against one step of a PCS."""
    system = _read_pcs(pcs_path)
    try:
        alignment = load_dump(Path(alignment_path).read_text(encoding="utf-8"))
        steps = step(system, _symbols(input_text))
    except INPUT_ERRORS as exc:
        raise _fail(exc, alignment_path) from None
    if rule is not None:
        if rule > len(system.productions):
            raise InputError(f"the system has {len(system.productions)} productions")
        wanted = system.productions[rule - 1]
        steps = [s for s in steps if s.production == wanted]
    if not steps:
        click.echo(f"no step applies to {input_text!r}")
        sys.exit(EXIT_NO_RESULT)
    st = steps[0]
    click.echo(f"step: {text(st.input)} -> {text(st.output)}   <- {st.describe()}")
    report = check_step_equivalence(st, alignment)
    click.echo(report.render(), nl=False)
    if not report.equivalent:
        sys.exit(EXIT_NO_RESULT)


@main.command()
@click.argument("m", type=int)
@click.argument("n", type=int)
def psi(m, n):
    """Number of ways to pair subsequences of two sequences of lengths M and N."""
    try:
        click.echo(search_space_size(m, n))
    except ValueError as exc:
        raise InputError(str(exc)) from None


if __name__ == "__main__":  # pragma: no cover
    main()
