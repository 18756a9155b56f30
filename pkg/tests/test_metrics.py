from polyfed.metrics import (
    ComplexityReport,
    complexity_of_global,
    complexity_of_plan,
    complexity_of_unpruned_plan,
)
from polyfed.planner import plan
from polyfed.query import Filter, GlobalQuery, parse
from polyfed.workspace import SCENARIO_QUERY


def test_report_total_and_dict():
    report = ComplexityReport(projection=3, filter=2, join_clause=4, from_clause=5)
    assert report.total == 14
    assert report.as_dict() == {
        "projection": 3,
        "filter": 2,
        "join_clause": 4,
        "from_clause": 5,
        "total": 14,
    }


def test_global_counts_components_as_written():
    report = complexity_of_global(parse(SCENARIO_QUERY))
    assert report == ComplexityReport(
        projection=5, filter=1, join_clause=0, from_clause=1
    )
    assert report.total == 7


def test_global_counts_scale_with_the_query():
    q = GlobalQuery(
        ("E.a", "E.b"),
        "E",
        "wf",
        (Filter("E.a", "=", 1), Filter("E.b", "<", 2), Filter("E.a", ">", 0)),
    )
    assert complexity_of_global(q) == ComplexityReport(2, 3, 0, 1)


def test_executed_plan_counts_replicated_filters(scenario):
    federated = plan(parse(SCENARIO_QUERY), scenario.registry, scenario.recorder)
    report = complexity_of_plan(federated)
    # the name filter lands in two stores; three joins; three tables plus
    # the constant table
    assert report == ComplexityReport(
        projection=5, filter=2, join_clause=3, from_clause=4
    )
    assert report.total == 14


def test_unpruned_plan_counts_what_a_user_would_write(scenario):
    federated = plan(parse(SCENARIO_QUERY), scenario.registry, scenario.recorder)
    report = complexity_of_unpruned_plan(federated)
    # one logical filter, but the pruned training store returns to the
    # from-clause
    assert report == ComplexityReport(
        projection=5, filter=1, join_clause=3, from_clause=5
    )
    assert report.total == 14


def test_single_store_plan_views_diverge(scenario):
    q = parse(
        "select Seismic.epsg where Seismic "
        "from geological_data_ingestion_workflow"
    )
    federated = plan(q, scenario.registry, scenario.recorder)
    assert complexity_of_plan(federated) == ComplexityReport(1, 0, 1, 2)
    # three pruned stores come back
    assert complexity_of_unpruned_plan(federated) == ComplexityReport(1, 0, 1, 5)
