import random

import pytest

from polyfed.errors import MissingAdapter
from polyfed.executor import execute
from polyfed.planner import (
    ConstantTable,
    FederatedPlan,
    JoinClause,
    LocalFilter,
    LocalQuery,
    OutputColumn,
    plan,
)
from polyfed.query import parse, render
from polyfed.stores import RelationalStore, matches
from polyfed.workspace import SCENARIO_QUERY

from conftest import NETHERLANDS_ROW
from oracles import brute_force_join, multiset
from randgen import random_instance


def two_store_plan(constant_rows, s1_filters=(), s2_filters=(), distinct=True):
    return FederatedPlan(
        workflow="wf",
        output_columns=(
            OutputColumn("x", "S1", "D1", "x"),
            OutputColumn("z", "S2", "D2", "z"),
        ),
        local_queries=(
            LocalQuery("S1", "D1", ("x", "k"), tuple(s1_filters), "k"),
            LocalQuery("S2", "D2", ("z", "j"), tuple(s2_filters), "j"),
        ),
        constant_table=ConstantTable(("S1", "S2"), tuple(constant_rows)),
        join_spec=(JoinClause("S1", "D1", "k"), JoinClause("S2", "D2", "j")),
        distinct=distinct,
    )


def two_stores(pushdown=True):
    s1 = RelationalStore("S1", pushdown=pushdown)
    s1.add_table(
        "D1",
        ["k", "x"],
        [(1, "a"), (1, "b"), (2, "c"), ("1", "str-key")],
    )
    s2 = RelationalStore("S2", pushdown=pushdown)
    s2.add_table(
        "D2",
        ["j", "z", "flag"],
        [("u", 10, "keep"), ("u", 10, "keep"), ("v", 20, "drop")],
    )
    return {"S1": s1, "S2": s2}


def test_scenario_end_to_end(scenario):
    result = execute(
        plan(parse(SCENARIO_QUERY), scenario.registry, scenario.recorder),
        scenario.adapters,
    )
    assert result.columns == ("inline", "crossline", "hasWell", "hasHorizon", "epsg")
    assert result.rows == (NETHERLANDS_ROW,)


def test_missing_adapter():
    adapters = two_stores()
    del adapters["S2"]
    with pytest.raises(MissingAdapter):
        execute(two_store_plan([(1, "u")]), adapters)


def test_join_and_distinct():
    # k=1 matches two rows, j="u" matches two identical ones; distinct
    # collapses the duplicated document rows
    result = execute(two_store_plan([(1, "u")]), two_stores())
    assert multiset(result.rows) == multiset([("a", 10), ("b", 10)])


def test_without_distinct_products_survive():
    p = two_store_plan([(1, "u")], distinct=False)
    result = execute(p, two_stores())
    assert multiset(result.rows) == multiset([("a", 10)] * 2 + [("b", 10)] * 2)


def test_reference_missing_in_one_store_contributes_nothing():
    assert execute(two_store_plan([(2, "w")]), two_stores()).rows == ()
    assert execute(two_store_plan([(3, "u")]), two_stores()).rows == ()


def test_each_constant_row_joins_independently():
    result = execute(two_store_plan([(2, "v"), (1, "u")]), two_stores())
    assert multiset(result.rows) == multiset([("c", 20), ("a", 10), ("b", 10)])


def test_identifier_probe_is_type_strict():
    result = execute(two_store_plan([("1", "u")]), two_stores())
    assert multiset(result.rows) == multiset([("str-key", 10)])


@pytest.mark.parametrize("pushdown", [True, False])
def test_filter_semantics_do_not_depend_on_pushdown(pushdown):
    p = two_store_plan(
        [(1, "u"), (2, "v")],
        s1_filters=[LocalFilter("x", "!=", "a")],
        s2_filters=[LocalFilter("flag", "=", "keep")],
    )
    result = execute(p, two_stores(pushdown=pushdown))
    assert result.columns == ("x", "z")
    assert multiset(result.rows) == multiset([("b", 10)])


@pytest.mark.parametrize(
    "value,op,literal,outcome",
    [
        (1, "=", 1, True),
        (1.0, "=", 1.0, True),
        (1, "=", 1.0, False),
        (1, "=", "1", False),
        (True, "=", 1, False),
        (True, "=", True, True),
        (1, "!=", "1", True),
        (1, "!=", 1, False),
        (1, "<", 2, True),
        (1, "<", 1.5, True),
        (2.5, ">=", 2, True),
        ("a", "<", "b", True),
        ("a", "<", 1, False),
        (True, "<", 2, False),
        (1, "<=", "2", False),
    ],
)
def test_typed_comparison(value, op, literal, outcome):
    assert matches(value, op, literal) is outcome


def test_unknown_operator_rejected():
    with pytest.raises(ValueError):
        matches(1, "~", 1)


def test_agreement_with_nested_loop_oracle():
    rng = random.Random(8675309)
    checked = 0
    nonempty = 0
    while checked < 150:
        ws, query = random_instance(rng)
        seed_note = f"trial {checked}: {render(query)}"
        federated = plan(query, ws.registry, ws.recorder)
        got = execute(federated, ws.adapters)
        want = brute_force_join(federated, ws.adapters)
        assert multiset(got.rows) == multiset(want), seed_note
        checked += 1
        if got.rows:
            nonempty += 1
    # the generator pools are tight enough that joins actually fire
    assert nonempty > 30
