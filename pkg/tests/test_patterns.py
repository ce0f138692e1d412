import pytest

from icmaus.patterns import (
    CorpusError,
    Pattern,
    PatternFormatError,
    build_corpus,
    fixture_corpus,
    load_corpus,
    parse_pattern_line,
    parse_patterns,
    render_patterns,
)


def test_parse_line_with_frequency():
    p = parse_pattern_line("a b c (3)", id="x")
    assert p.symbols == ("a", "b", "c")
    assert p.frequency == 3
    assert p.render() == "a b c (3)"


def test_default_frequency_is_omitted_when_rendered():
    assert parse_pattern_line("a b").render() == "a b"


@pytest.mark.parametrize("line", ["", "(2)", "a (0)", "a (-1)", "a (x)"])
def test_bad_lines(line):
    with pytest.raises(PatternFormatError):
        parse_pattern_line(line)


def test_error_carries_line_number():
    with pytest.raises(PatternFormatError) as info:
        parse_patterns("a b\n\nc (0)\n")
    assert info.value.line_no == 3
    assert str(info.value).startswith("line 3:")


def test_comments_and_blanks_skipped_and_ids_sequential():
    ps = parse_patterns("// header\n\na b\n  // note\nc d (2)\n")
    assert [p.id for p in ps] == ["p1", "p2"]
    assert [p.text for p in ps] == ["a b", "c d"]


def test_render_round_trip():
    text = "S N #N (4)\nN 0 j o h n #N\n"
    assert render_patterns(parse_patterns(text)) == text


def test_symbol_with_whitespace_rejected():
    with pytest.raises(PatternFormatError):
        Pattern("x", ("a b",))


def test_frequency_must_be_positive_int():
    with pytest.raises(PatternFormatError):
        Pattern("x", ("a",), 0)


def test_corpus_frequencies_weighted():
    c = build_corpus(parse_patterns("a b (2)\nb c\n"))
    assert c.symbol_frequency == {"a": 2, "b": 3, "c": 1}
    assert c.total_frequency == 6
    assert c.alphabet == {"a", "b", "c"}
    assert c.get("p2").text == "b c"


def test_empty_corpus_rejected():
    with pytest.raises(CorpusError):
        build_corpus([])


def test_duplicate_ids_rejected():
    with pytest.raises(CorpusError):
        build_corpus([Pattern.of("a", id="x"), Pattern.of("b", id="x")])


@pytest.mark.parametrize("name,size", [("sentences", 5), ("rotation", 8), ("unary", 1), ("palindrome", 8)])
def test_fixtures_load(name, size):
    assert len(fixture_corpus(name)) == size


def test_load_corpus_from_path(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("x y\n", encoding="utf-8")
    assert load_corpus(f).patterns[0].symbols == ("x", "y")


def test_sentence_alphabet_size():
    assert len(fixture_corpus("sentences").alphabet) == 19
