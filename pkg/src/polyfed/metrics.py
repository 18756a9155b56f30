"""Query complexity accounting.

Complexity here is the user-facing count of query components (projections,
filters, join clauses, from-clause elements), unweighted. Three views:

* ``complexity_of_global`` counts the components of the query a user writes
  against the global schema. The language has no join clause, and the
  workflow reference is its single from-element.
* ``complexity_of_plan`` counts the federated plan as executed: every
  replicated local filter counts, pruned stores are gone, and the constant
  table counts as one from-element since its data could be a temporary
  table.
* ``complexity_of_unpruned_plan`` counts what a user would have had to write
  by hand against the federation *without* the mediator's pruning: stores
  the workflow touches stay in the from-clause even when nothing projects
  from them, and a logical filter counts once however many scopes it is
  replicated into.

The two plan accountings answer different questions (cost of the plan vs
cognitive load of the equivalent hand-written SQL) and can disagree per
component while summing to the same total on simple plans.
"""

from __future__ import annotations

from dataclasses import dataclass

from .planner import FederatedPlan
from .query import GlobalQuery

__all__ = [
    "ComplexityReport",
    "complexity_of_global",
    "complexity_of_plan",
    "complexity_of_unpruned_plan",
]


@dataclass(frozen=True)
class ComplexityReport:
    projection: int
    filter: int
    join_clause: int
    from_clause: int

    @property
    def total(self) -> int:
        return self.projection + self.filter + self.join_clause + self.from_clause

    def as_dict(self) -> dict[str, int]:
        return {
            "projection": self.projection,
            "filter": self.filter,
            "join_clause": self.join_clause,
            "from_clause": self.from_clause,
            "total": self.total,
        }


def complexity_of_global(query: GlobalQuery) -> ComplexityReport:
    return ComplexityReport(
        projection=len(query.projections),
        filter=len(query.filters),
        join_clause=0,
        from_clause=1,
    )


def complexity_of_plan(plan: FederatedPlan) -> ComplexityReport:
    """Component count of the plan as executed (pruned, filters replicated)."""
    return ComplexityReport(
        projection=len(plan.output_columns),
        filter=sum(len(lq.filters) for lq in plan.local_queries),
        join_clause=len(plan.join_spec),
        from_clause=len(plan.local_queries) + 1,
    )


def complexity_of_unpruned_plan(plan: FederatedPlan) -> ComplexityReport:
    """Component count of the equivalent hand-written federated SQL.

    Stores the workflow's provenance references but the mediator pruned are
    put back into the from-clause (they would sit there unjoined), and each
    logical filter counts once regardless of replication.
    """
    return ComplexityReport(
        projection=len(plan.output_columns),
        filter=len(plan.global_filters),
        join_clause=len(plan.join_spec),
        from_clause=len(plan.local_queries) + len(plan.pruned_stores) + 1,
    )
