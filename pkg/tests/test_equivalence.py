import dataclasses

import pytest

from icmaus.alignment import Alignment, Column, project
from icmaus.equivalence import (
    CONDITIONS,
    SERVICE_SYMBOLS,
    UnsupportedFormError,
    check_step_equivalence,
    pcs_to_sp,
    production_signature,
    strip_service,
    variable_content,
)
from icmaus.patterns import Pattern, build_corpus, fixture_corpus, render_patterns
from icmaus.pcs import Production, palindrome_system, parse_pcs, rotation_system, step
from icmaus.search import find_alignments


def _best(corpus, s):
    return find_alignments(corpus, Pattern.of(s, id="new")).best[0]


def _report(system, s, alignment=None):
    corpus = pcs_to_sp(system)
    a = alignment or _best(corpus, s)
    (st,) = step(system, s)
    return check_step_equivalence(st, a), a


def swap_hit_columns(a: Alignment) -> Alignment:
    """Exchange the columns holding New positions 0 and 1."""
    where = a.cell_columns()
    i, j = where[(0, 0)], where[(0, 1)]
    cols = list(a.columns)
    cols[i], cols[j] = cols[j], cols[i]
    return Alignment(a.rows, tuple(cols))


def split_variable_column(a: Alignment) -> Alignment:
    """Break the first Old-only '$' hit column into singletons."""
    for k, col in enumerate(a.columns):
        if col.is_hit and 0 not in col.rows and a.column_symbol(k) == "$":
            singles = tuple(Column((c,)) for c in col.cells)
            return Alignment(a.rows, a.columns[:k] + singles + a.columns[k + 1:])
    raise AssertionError("no '$' column between Old rows")


def test_translation_matches_fixture():
    assert render_patterns(pcs_to_sp(rotation_system()).patterns) == render_patterns(fixture_corpus("rotation").patterns)


def test_translation_of_unary_shape():
    assert [p.text for p in pcs_to_sp(parse_pcs("alphabet: 1\naxiom: 1\nrule: $ -> $ 1\n"))] == [
        "L 1 #L", "P $ #$ 1 #P", "$ L #L $ #$ #$"]


def test_non_normal_form_rejected():
    with pytest.raises(UnsupportedFormError):
        pcs_to_sp(palindrome_system())
    with pytest.raises(UnsupportedFormError):
        production_signature(Production.parse("$ -> a $ a"))


def test_service_symbol_clash():
    with pytest.raises(UnsupportedFormError):
        pcs_to_sp(parse_pcs("alphabet: L x\naxiom: x\nrule: x $ -> $ x\n"))


def test_signature():
    assert production_signature(Production.parse("a b $ -> $ c")) == ("a", "b", "$", "#$", "c")


@pytest.mark.parametrize("word", ["a b c b t", "a b b a a t", "c t", "a a a a a t"])
def test_rotation_steps_equivalent(word):
    report, _ = _report(rotation_system(), word.split())
    assert report.equivalent, report.render()
    assert [name for name, _ in report.results] == list(CONDITIONS)


def test_swap_fails_only_column_correspondence():
    _, a = _report(rotation_system(), "a b c b t".split())
    report, _ = _report(rotation_system(), "a b c b t".split(), swap_hit_columns(a))
    assert report.failed == ["hit-column-correspondence"]


def test_split_fails_only_mismatch():
    _, a = _report(rotation_system(), "a b c b t".split())
    report, _ = _report(rotation_system(), "a b c b t".split(), split_variable_column(a))
    assert report.failed == ["no-mismatch"]


def test_wrong_input_fails_symbol_mapping():
    _, a = _report(rotation_system(), "a b c b t".split())
    (st,) = step(rotation_system(), "a b c c t".split())
    report = check_step_equivalence(st, a)
    assert not report["symbol-mapping-of-I"]
    assert not report["order-of-I"]
    assert report["no-mismatch"]


def test_reordered_input_fails_order_only_on_order():
    _, a = _report(rotation_system(), "a b c b t".split())
    (st,) = step(rotation_system(), "a c b b t".split())
    report = check_step_equivalence(st, a)
    assert report["symbol-mapping-of-I"]
    assert not report["order-of-I"]


def test_two_symbol_prefix_round_trip():
    system = parse_pcs("alphabet: a b c t\naxiom: a b c t\nrule: a b $ -> $ c\n")
    word = "a b c t".split()
    a = _best(pcs_to_sp(system), word)
    report, _ = _report(system, word, a)
    assert report.equivalent, report.render()
    (st,) = step(system, word)
    assert variable_content(project(a).symbols) == st.output == ("c", "t", "c")


def test_trailing_h_absorbed_by_pattern():
    # New ending in h is cheaper to read with an empty variable
    system = parse_pcs("alphabet: a b c\naxiom: a b c\nrule: a b $ -> $ c\n")
    a = _best(pcs_to_sp(system), "a b c".split())
    assert project(a).text == "P a b $ #$ c #P"
    assert variable_content(project(a).symbols) == ("c",)


def test_invariant_under_renamed_ids():
    system = rotation_system()
    corpus = pcs_to_sp(system)
    renamed = build_corpus(dataclasses.replace(p, id=f"q{len(corpus) - k}") for k, p in enumerate(corpus))
    a1 = _best(corpus, "b a c t".split())
    a2 = _best(renamed, "b a c t".split())
    assert project(a1).symbols == project(a2).symbols
    report, _ = _report(system, "b a c t".split(), a2)
    assert report.equivalent


def test_render_layout():
    report, _ = _report(rotation_system(), "c t".split())
    lines = report.render().splitlines()
    assert lines[:5] == [f"{c}: PASS" for c in CONDITIONS]
    assert lines[-1] == "equivalent: yes"


def test_strip_and_variable_content():
    proj = "P a $ L b #L $ #$ #$ a #P".split()
    assert strip_service(proj) == ("a", "b", "a")
    assert variable_content(proj) == ("b", "a")
    assert variable_content(["x", "y"]) is None
    assert set(SERVICE_SYMBOLS) == {"P", "#P", "$", "#$", "L", "#L"}
