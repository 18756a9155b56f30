"""Round-trip and format tests for the line-oriented catalog file."""

import random

import pytest

from polyfed.catalog import Catalog, Node, NodeKind, NodeRef
from polyfed.errors import IoFailure, ParseFailure

from oracles import value_key
from randgen import random_graph


def snapshot(catalog):
    """Identity of a catalog: nodes, link multiset, context membership."""
    nodes = {n.id: (n.kind, dict(n.properties)) for n in catalog.nodes()}
    links = sorted(
        (l.subject, l.predicate, value_key(l.object)) for l in catalog.links()
    )
    contexts = {
        ctx: set(catalog.context_members(ctx)) for ctx in catalog.contexts()
    }
    return nodes, links, contexts


def roundtrip(catalog, tmp_path):
    path = tmp_path / "cat.txt"
    catalog.save(path)
    return Catalog.load(path)


def test_empty_catalog_roundtrip(tmp_path):
    loaded = roundtrip(Catalog(), tmp_path)
    assert loaded.node_count == 0
    assert loaded.link_count == 0


def test_every_node_kind_roundtrips(tmp_path):
    c = Catalog()
    for i, kind in enumerate(NodeKind):
        c.add_node(Node(f"hk://id/k{i}", kind, {"pos": i}))
    loaded = roundtrip(c, tmp_path)
    assert snapshot(loaded) == snapshot(c)


def test_literal_families_survive(tmp_path):
    c = Catalog()
    c.add_node(Node("hk://id/a", NodeKind.CONCEPT))
    values = [1, 0, -7, 1.0, 2.5, True, False, "1", "true", "a b  c", "", "it's"]
    for i, v in enumerate(values):
        c.add_link("hk://id/a", f"p{i}", v)
    loaded = roundtrip(c, tmp_path)
    for i, v in enumerate(values):
        got = loaded.objects("hk://id/a", f"p{i}")
        assert got == (v,)
        assert value_key(got[0]) == value_key(v), f"family changed for {v!r}"


def test_ref_and_lookalike_literal_stay_distinct(tmp_path):
    c = Catalog()
    c.add_node(Node("hk://id/a", NodeKind.CONCEPT))
    c.add_node(Node("hk://id/b", NodeKind.CONCEPT))
    c.add_link("hk://id/a", "p", NodeRef("hk://id/b"))
    c.add_link("hk://id/a", "p", "hk://id/b")
    loaded = roundtrip(c, tmp_path)
    objs = loaded.objects("hk://id/a", "p")
    assert sorted(map(value_key, objs)) == [("ref", "hk://id/b"), ("str", "hk://id/b")]


def test_context_membership_roundtrips(tmp_path):
    c = Catalog()
    c.add_node(Node("hk://ctx/w", NodeKind.CONTEXT))
    c.add_node(Node("hk://id/a", NodeKind.CONCEPT), context="hk://ctx/w")
    c.add_node(Node("hk://id/b", NodeKind.CONCEPT))
    link = c.add_link("hk://id/a", "p", NodeRef("hk://id/b"), context="hk://ctx/w")
    loaded = roundtrip(c, tmp_path)
    assert set(loaded.context_members("hk://ctx/w")) == {"hk://id/a", link}


def test_file_layout_is_nodes_links_members(tmp_path):
    c = Catalog()
    c.add_node(Node("hk://ctx/w", NodeKind.CONTEXT))
    c.add_node(Node("hk://id/a", NodeKind.CONCEPT), context="hk://ctx/w")
    c.add_link("hk://id/a", "p", 1)
    path = tmp_path / "cat.txt"
    c.save(path)
    kinds = [line[0] for line in path.read_text().splitlines()]
    assert kinds == sorted(kinds, key="NLC".index)


def test_scenario_catalog_roundtrips(scenario, tmp_path):
    loaded = roundtrip(scenario.catalog, tmp_path)
    assert snapshot(loaded) == snapshot(scenario.catalog)


def test_random_catalogs_roundtrip(tmp_path):
    rng = random.Random(5150)
    for trial in range(10):
        catalog, _, _ = random_graph(rng, nodes=20, links=120)
        loaded = roundtrip(catalog, tmp_path)
        assert snapshot(loaded) == snapshot(catalog), f"trial {trial}"


def test_double_save_is_stable(scenario, tmp_path):
    first = tmp_path / "one.txt"
    second = tmp_path / "two.txt"
    scenario.catalog.save(first)
    Catalog.load(first).save(second)
    assert first.read_text() == second.read_text()


@pytest.mark.parametrize(
    "content,bad_line",
    [
        ("X hk://id/a Concept {}", 1),
        ("N hk://id/a NoSuchKind {}", 1),
        ("N hk://id/a Concept []", 1),
        ("N hk://id/a Concept", 1),
        ("N hk://id/a Concept {}\nN hk://id/a Concept {}", 2),
        ("L hk://id/a p 1", 1),  # link before its subject exists
        ("N hk://id/a Concept {}\nL hk://id/a p", 2),
        ("N hk://id/a Concept {}\nC hk://ctx/x hk://id/a", 2),
        ("N hk://id/a Concept {}\nL hk://id/a p 1\nL hk://id/a p 1", 3),
    ],
)
def test_malformed_files_report_their_line(tmp_path, content, bad_line):
    path = tmp_path / "bad.txt"
    path.write_text(content + "\n", encoding="utf-8")
    with pytest.raises(ParseFailure) as err:
        Catalog.load(path)
    assert err.value.line == bad_line


def test_blank_lines_are_ignored(tmp_path):
    path = tmp_path / "cat.txt"
    path.write_text("\nN hk://id/a Concept {}\n\n\n", encoding="utf-8")
    assert Catalog.load(path).has_node("hk://id/a")


def test_io_failures(tmp_path):
    with pytest.raises(IoFailure):
        Catalog.load(tmp_path / "absent.txt")
    with pytest.raises(IoFailure):
        Catalog().save(tmp_path)  # a directory, not a file
