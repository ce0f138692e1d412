import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icmaus.alignment import (
    Alignment,
    AlignmentError,
    Column,
    ProjectionAmbiguityError,
    ViolationKind,
    dump,
    find_mismatches,
    from_hits,
    has_fatal_mismatch,
    linearize,
    load_dump,
    make_rows,
    parse_rendered_row,
    project,
    render,
    require_valid,
    single_row,
    validate,
)
from icmaus.patterns import Pattern

from worked import ROTATION_PROJECTION, SENTENCE_PROJECTION, palindrome_parse, rotation_step, sentence_parse, unary_nest
from oracles import crosses, is_subsequence, partial_matchings

WORKED = [sentence_parse, rotation_step, unary_nest, palindrome_parse]


def _pair_alignment(a, b, matching) -> Alignment:
    """Columns in New order with Old leftovers appended; no reordering."""
    rows = make_rows(Pattern.of(a, id="new"), [Pattern.of(b, id="old")])
    cols = []
    matched_old = {j for _, j in matching}
    hit_of = dict(matching)
    for i in range(len(a)):
        cells = ((0, i), (1, hit_of[i])) if i in hit_of else ((0, i),)
        cols.append(Column(cells))
    cols += [Column(((1, j),)) for j in range(len(b)) if j not in matched_old]
    return Alignment(rows, tuple(cols))


@pytest.mark.parametrize("build", WORKED)
def test_worked_examples_valid(build):
    a, _ = build()
    assert validate(a).valid


def test_projections_of_worked_examples():
    assert project(sentence_parse()[0]).text == SENTENCE_PROJECTION
    assert project(rotation_step()[0]).text == ROTATION_PROJECTION


@pytest.mark.parametrize("build", WORKED)
def test_projection_keeps_every_row_in_order(build):
    a, _ = build()
    proj = project(a).symbols
    for row in a.rows:
        assert is_subsequence(row.pattern.symbols, proj)


def test_single_row():
    a = single_row("a b c")
    assert validate(a).valid
    assert a.new_hits() == 0
    assert project(a).text == "a b c"


def test_heterogeneous_column():
    rows = make_rows(Pattern.of("a", id="new"), [Pattern.of("b", id="x")])
    a = Alignment(rows, (Column(((0, 0), (1, 0))),))
    assert ViolationKind.HETEROGENEOUS in validate(a).kinds


def test_coverage_violation():
    rows = make_rows(Pattern.of("a b", id="new"), [])
    a = Alignment(rows, (Column(((0, 0),)),))
    assert ViolationKind.COVERAGE in validate(a).kinds
    with pytest.raises(AlignmentError):
        require_valid(a)


def test_self_match_between_two_appearances():
    p = Pattern.of("x y", id="p")
    rows = make_rows(Pattern.of("x", id="new"), [p, p])
    a = Alignment(rows, linearize(rows, [[(1, 0), (2, 0)]]))
    assert ViolationKind.SELF_MATCH in validate(a).kinds


def test_two_cells_of_one_row_in_a_column():
    rows = make_rows(Pattern.of("a a", id="new"), [])
    a = Alignment(rows, (Column(((0, 0), (0, 1))),))
    assert ViolationKind.SAME_ROW in validate(a).kinds


def test_crossing_pair_rejected():
    a = _pair_alignment(["a", "b"], ["b", "a"], [(0, 1), (1, 0)])
    assert ViolationKind.ORDER in validate(a).kinds


def test_linearize_rejects_cycles_and_reuse():
    rows = make_rows(Pattern.of("a b", id="new"), [Pattern.of("b a", id="x")])
    with pytest.raises(AlignmentError):
        linearize(rows, [[(0, 0), (1, 1)], [(0, 1), (1, 0)]])
    with pytest.raises(AlignmentError):
        linearize(rows, [[(0, 0), (1, 1)], [(0, 0), (1, 0)]])


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.sampled_from("xy"), min_size=1, max_size=4),
    st.lists(st.sampled_from("xy"), min_size=1, max_size=4),
)
def test_order_violation_exactly_when_crossing(a, b):
    for m in partial_matchings(a, b):
        report = validate(_pair_alignment(a, b, m))
        assert (ViolationKind.ORDER in report.kinds) == crosses(m)


def test_mismatch_between_two_rows_is_fatal():
    a = from_hits("a b", ["a x b", "a y b"], [[(0, 0), (1, 0), (2, 0)], [(0, 1), (1, 2), (2, 2)]])
    assert validate(a).valid
    assert has_fatal_mismatch(a)
    fatal = [m for m in find_mismatches(a) if m.fatal]
    assert fatal[0].old_rows == (1, 2)
    with pytest.raises(ProjectionAmbiguityError):
        project(a)


def test_unmatched_old_in_one_row_is_not_fatal():
    a = from_hits("a b", ["a x b"], [[(0, 0), (1, 0)], [(0, 1), (1, 2)]])
    assert not has_fatal_mismatch(a)
    assert project(a).text == "a x b"


def test_unmatched_new_recorded_as_non_fatal():
    a = from_hits("a q b", ["a b"], [[(0, 0), (1, 0)], [(0, 2), (1, 1)]])
    ms = find_mismatches(a)
    assert [m.fatal for m in ms] == [False]
    assert project(a).text == "a q b"


@pytest.mark.parametrize("build", WORKED)
def test_dump_round_trip(build):
    a, _ = build()
    b = load_dump(dump(a))
    assert b.columns == a.columns
    assert [r.pattern.symbols for r in b.rows] == [r.pattern.symbols for r in a.rows]
    assert dump(b) == dump(a)


def test_render_rows_read_back():
    a, _ = rotation_step()
    lines = render(a).splitlines()
    row_lines = lines[::2]
    assert len(row_lines) == len(a.rows)
    for row, line in zip(a.rows, row_lines):
        assert parse_rendered_row(line) == list(row.pattern.symbols)
