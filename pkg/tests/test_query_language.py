import random

import pytest

from polyfed.errors import (
    ParseError,
    UnknownAttribute,
    UnknownEntity,
    UnknownWorkflow,
)
from polyfed.query import Filter, GlobalQuery, parse, render, validate

BASE = "select Seismic.inline where Seismic from wf"


def test_minimal_query():
    q = parse(BASE)
    assert q == GlobalQuery(("Seismic.inline",), "Seismic", "wf")


def test_full_query():
    text = (
        'select E.a, E.b where E from wf_2 '
        'and E.a = "x" and E.b != 4 and E.c <= 2.5'
    )
    q = parse(text)
    assert q.projections == ("E.a", "E.b")
    assert q.entity == "E"
    assert q.workflow == "wf_2"
    assert q.filters == (
        Filter("E.a", "=", "x"),
        Filter("E.b", "!=", 4),
        Filter("E.c", "<=", 2.5),
    )


@pytest.mark.parametrize("op", ["=", "!=", "<", "<=", ">", ">="])
def test_every_operator(op):
    q = parse(f"{BASE} and Seismic.x {op} 10")
    assert q.filters[0].op == op


@pytest.mark.parametrize(
    "literal,value",
    [
        ("0", 0),
        ("-17", -17),
        ("2.5", 2.5),
        ("-0.125", -0.125),
        ("1e3", 1000.0),
        ("5e-1", 0.5),
        ("2.5e2", 250.0),
        ('"plain"', "plain"),
        ('""', ""),
        ('"with \\"quotes\\""', 'with "quotes"'),
        ('"back\\\\slash"', "back\\slash"),
        ('"tab\tand space"', "tab\tand space"),
    ],
)
def test_literals(literal, value):
    q = parse(f"{BASE} and Seismic.x = {literal}")
    assert q.filters[0].value == value
    assert type(q.filters[0].value) is type(value)


def test_keywords_are_case_insensitive_identifiers_are_not():
    q = parse('SELECT E.a WHERE E FROM wf AND E.a = 1')
    assert q.entity == "E"
    with pytest.raises(ParseError):
        parse("select e.a where E from wf")


def test_newlines_and_padding_are_fine():
    q = parse("select  E.a ,\n\tE.b\nwhere E\nfrom wf\nand E.a > 3")
    assert q.projections == ("E.a", "E.b")


@pytest.mark.parametrize(
    "text,line,column,expected_one,found",
    [
        ("", 1, 1, "'select'", "end of input"),
        ("pick E.a", 1, 1, "'select'", "'pick'"),
        ("select", 1, 7, "an identifier", "end of input"),
        ("select E", 1, 9, "'.'", "end of input"),
        ("select E.", 1, 10, "an attribute name", "end of input"),
        ("select E.a", 1, 11, "'where'", "end of input"),
        ("select E.a,", 1, 12, "an identifier", "end of input"),
        ("select E.a where", 1, 17, "an entity name", "end of input"),
        ("select E.a where E", 1, 19, "'from'", "end of input"),
        ("select E.a where E from", 1, 24, "a workflow name", "end of input"),
        ("select E.a where E from wf junk", 1, 28, "'and'", "'junk'"),
        ("select E.a where E from wf and", 1, 31, "an identifier", "end of input"),
        ("select E.a where E from wf and E.a", 1, 35, "a comparison operator", "end of input"),
        ("select E.a where E from wf and E.a =", 1, 37, "a string or number literal", "end of input"),
        ("select E.a where E from wf and E.a = from", 1, 38, "a string or number literal", "'from'"),
        ("select select.a where E from wf", 1, 8, "an identifier", "'select'"),
        ("select E.a where F from wf", 1, 8, "an attribute of 'F'", "'E.a'"),
        ("select E.a where E from wf and F.b = 1", 1, 32, "an attribute of 'E'", "'F.b'"),
        ("select E.a where E from wf and E.a ! 1", 1, 36, "'!='", "'!'"),
        ("select E.a where E from wf and E.a = ?", 1, 38, "a token", "'?'"),
        ('select E.a where E from wf and E.a = "open', 1, 38, "a closing '\"'", "end of input"),
        ('select E.a where E from wf and E.a = "nl\nx"', 1, 38, "a closing '\"'", "end of line"),
    ],
)
def test_error_positions(text, line, column, expected_one, found):
    with pytest.raises(ParseError) as err:
        parse(text)
    e = err.value
    assert (e.line, e.column) == (line, column), str(e)
    assert expected_one in e.expected
    assert e.found == found
    assert str(e).startswith(f"{line}:{column}: expected ")


def test_error_position_counts_lines():
    with pytest.raises(ParseError) as err:
        parse("select E.a\nwhere E\nfrom wf\nand E.a @ 1")
    assert (err.value.line, err.value.column) == (4, 9)


def test_filter_value_rules():
    with pytest.raises(ValueError):
        Filter("E.a", "~", 1)
    with pytest.raises(TypeError):
        Filter("E.a", "=", True)
    with pytest.raises(TypeError):
        Filter("E.a", "=", None)
    with pytest.raises(ValueError):
        Filter("E.a", "=", float("inf"))


def test_render_canonical_form():
    q = GlobalQuery(
        ("E.a", "E.b"),
        "E",
        "wf",
        (Filter("E.a", "=", 'say "hi"'), Filter("E.b", "<", 2.5), Filter("E.c", ">=", -3)),
    )
    assert render(q) == (
        'select E.a, E.b where E from wf '
        'and E.a = "say \\"hi\\"" and E.b < 2.5 and E.c >= -3'
    )


@pytest.mark.parametrize(
    "query",
    [
        GlobalQuery(("E.a",), "E", "wf"),
        GlobalQuery(("E.a", "E.b", "E.c"), "E", "wf", (Filter("E.a", "!=", "x y"),)),
        GlobalQuery(("E.a",), "E", "wf", (Filter("E.b", "<=", 0.5), Filter("E.b", ">", -10))),
        GlobalQuery(("E.long_name",), "E", "wf_v2", (Filter("E.a", "=", ""),)),
        GlobalQuery(("E.a",), "E", "wf", (Filter("E.a", "=", "tab\there"),)),
        GlobalQuery(("E.a",), "E", "wf", (Filter("E.a", "=", "grüße 渋谷"),)),
        GlobalQuery(("E.a",), "E", "wf", (Filter("E.a", "!=", 'mix\\ed "q"'),)),
    ],
)
def test_parse_render_round_trip(query):
    assert parse(render(query)) == query


def test_round_trip_of_random_renderings():
    rng = random.Random(424242)
    ops = ["=", "!=", "<", "<=", ">", ">="]
    for _ in range(200):
        filters = tuple(
            Filter(
                f"E.f{rng.randrange(5)}",
                rng.choice(ops),
                rng.choice([rng.randrange(-99, 99), rng.random(), "txt", 'q"q', ""]),
            )
            for _ in range(rng.randrange(0, 4))
        )
        q = GlobalQuery(
            tuple(f"E.p{i}" for i in range(rng.randint(1, 4))), "E", "wf", filters
        )
        assert parse(render(q)) == q


def test_validate_against_scenario(scenario):
    ok = parse(
        "select Seismic.inline where Seismic "
        'from geological_data_ingestion_workflow and Seismic.name = "n"'
    )
    validate(ok, scenario.registry, scenario.recorder)
    # alternate spelling is part of the global schema surface
    validate(
        parse("select Seismic.hasWell where Seismic from geological_data_ingestion_workflow"),
        scenario.registry,
        scenario.recorder,
    )
    with pytest.raises(UnknownEntity):
        validate(
            parse("select Rock.a where Rock from geological_data_ingestion_workflow"),
            scenario.registry,
            scenario.recorder,
        )
    with pytest.raises(UnknownAttribute):
        validate(
            parse("select Seismic.depth where Seismic from geological_data_ingestion_workflow"),
            scenario.registry,
            scenario.recorder,
        )
    with pytest.raises(UnknownAttribute):
        validate(
            parse(
                "select Seismic.inline where Seismic "
                "from geological_data_ingestion_workflow and Seismic.depth = 1"
            ),
            scenario.registry,
            scenario.recorder,
        )
    with pytest.raises(UnknownWorkflow):
        validate(
            parse("select Seismic.inline where Seismic from never_ran"),
            scenario.registry,
            scenario.recorder,
        )
