"""Federated query planning.

``plan`` turns a validated global query into a :class:`FederatedPlan`:

1. every projection is resolved through the alias mappings to exactly one
   local attribute (no mapping and multiple mappings are both errors);
2. every filter is resolved the same way but replicated into *each* local
   query whose store maps the filtered attribute, since any of those stores
   can restrict its rows by it;
3. the constant table is filled with one row per workflow execution, holding
   the identifier value each participating store captured during that run;
4. stores referenced by the workflow's provenance that contribute neither a
   projection nor a filter are pruned from execution and recorded on the
   plan, because joining a table nobody projects from can only cross-join.

``render_sql`` emits a deterministic SQL rendering of the plan in the style
a foreign-data-wrapper host would accept: one foreign table per local query,
the constant table as a ``VALUES`` list aliased ``p``, identifier-equality
joins, and the replicated filters.
"""

from __future__ import annotations

from dataclasses import dataclass

from .catalog import Scalar
from .errors import (
    AmbiguousMapping,
    ComplexAttributeProjection,
    NoExecutions,
    UnmappedAttribute,
)
from .provenance import ProvenanceRecorder
from .query import Filter, GlobalQuery
from .registry import SchemaRegistry

__all__ = [
    "ConstantTable",
    "FederatedPlan",
    "JoinClause",
    "LocalFilter",
    "LocalQuery",
    "OutputColumn",
    "plan",
    "render_sql",
]


@dataclass(frozen=True)
class LocalFilter:
    attribute: str
    op: str
    value: Scalar


@dataclass(frozen=True)
class LocalQuery:
    store: str
    dataset: str
    projection: tuple[str, ...]
    filters: tuple[LocalFilter, ...]
    identifier: str


@dataclass(frozen=True)
class ConstantTable:
    stores: tuple[str, ...]
    rows: tuple[tuple[Scalar, ...], ...]

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(f"{store}_prov_id" for store in self.stores)

    def column_of(self, store: str) -> int:
        return self.stores.index(store)


@dataclass(frozen=True)
class OutputColumn:
    name: str  # attribute part of the projection, as written in the query
    store: str
    dataset: str
    attribute: str  # local attribute the projection resolved to


@dataclass(frozen=True)
class JoinClause:
    store: str
    dataset: str
    identifier: str


@dataclass(frozen=True)
class FederatedPlan:
    workflow: str
    output_columns: tuple[OutputColumn, ...]
    local_queries: tuple[LocalQuery, ...]
    constant_table: ConstantTable
    join_spec: tuple[JoinClause, ...]
    global_filters: tuple[Filter, ...] = ()
    pruned_stores: tuple[str, ...] = ()
    distinct: bool = True


def plan(
    query: GlobalQuery,
    registry: SchemaRegistry,
    provenance: ProvenanceRecorder,
) -> FederatedPlan:
    """Translate a validated query into a federated plan.

    Raises UnmappedAttribute, AmbiguousMapping, ComplexAttributeProjection,
    NoExecutions, or a propagated MissingReference.
    """
    output_columns = []
    participants: dict[tuple[str, str], dict] = {}

    def participant(store: str, dataset: str) -> dict:
        return participants.setdefault(
            (store, dataset), {"projection": [], "filters": []}
        )

    for qualified in query.projections:
        attr = qualified.partition(".")[2]
        if registry.is_complex(query.entity, attr):
            raise ComplexAttributeProjection(
                f"{qualified!r} is a complex attribute and cannot be projected"
            )
        refs = registry.resolve_attribute(qualified)
        if not refs:
            raise UnmappedAttribute(f"{qualified!r} has no alias mapping to any store")
        if len(refs) > 1:
            where = ", ".join(f"{r.store}/{r.qualified}" for r in refs)
            raise AmbiguousMapping(f"{qualified!r} maps to several stores: {where}")
        ref = refs[0]
        output_columns.append(OutputColumn(attr, ref.store, ref.dataset, ref.attribute))
        slot = participant(ref.store, ref.dataset)
        if ref.attribute not in slot["projection"]:
            slot["projection"].append(ref.attribute)

    for f in query.filters:
        refs = registry.resolve_attribute(f.attribute)
        if not refs:
            raise UnmappedAttribute(
                f"filter attribute {f.attribute!r} has no alias mapping to any store"
            )
        for ref in refs:
            participant(ref.store, ref.dataset)["filters"].append(
                LocalFilter(ref.attribute, f.op, f.value)
            )

    local_queries = []
    for (store, dataset) in sorted(participants):
        slot = participants[(store, dataset)]
        identifier = registry.identifier_of(store, dataset)
        projection = list(slot["projection"])
        if identifier not in projection:
            projection.append(identifier)
        local_queries.append(
            LocalQuery(
                store=store,
                dataset=dataset,
                projection=tuple(projection),
                filters=tuple(slot["filters"]),
                identifier=identifier,
            )
        )

    stores = tuple(sorted({lq.store for lq in local_queries}))
    rows = provenance.reference_rows(query.workflow, stores)
    if not rows:
        raise NoExecutions(f"workflow {query.workflow!r} has no captured executions")
    constant_table = ConstantTable(stores=stores, rows=rows)
    join_spec = tuple(
        JoinClause(lq.store, lq.dataset, lq.identifier) for lq in local_queries
    )
    pruned = tuple(
        sorted(set(provenance.referenced_stores(query.workflow)) - set(stores))
    )
    return FederatedPlan(
        workflow=query.workflow,
        output_columns=tuple(output_columns),
        local_queries=tuple(local_queries),
        constant_table=constant_table,
        join_spec=join_spec,
        global_filters=query.filters,
        pruned_stores=pruned,
    )


# -- SQL rendering ---------------------------------------------------------------


def _snake(name: str) -> str:
    out = []
    for i, ch in enumerate(name):
        if ch.isupper():
            prev = name[i - 1] if i else ""
            nxt = name[i + 1] if i + 1 < len(name) else ""
            if i and prev != "_" and (prev.islower() or prev.isdigit() or nxt.islower()):
                out.append("_")
            out.append(ch.lower())
        else:
            out.append(ch)
    return "".join(out)


def _sql_literal(value: Scalar) -> str:
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_sql(p: FederatedPlan) -> str:
    """Render the federated SQL text for a plan.

    Output is stable byte-for-byte for identical plans: table aliases derive
    from dataset names, clause order follows the plan's (already sorted)
    local query order, and the constant table keeps its store-sorted column
    order.
    """
    aliases: dict[tuple[str, str], str] = {}
    taken = set()
    for lq in p.local_queries:
        base = f"fdw_{_snake(lq.dataset)}"
        alias = base
        serial = 2
        while alias in taken:
            alias = f"{base}_{serial}"
            serial += 1
        taken.add(alias)
        aliases[(lq.store, lq.dataset)] = alias

    select_items = [
        f'{aliases[(col.store, col.dataset)]}."{col.attribute}"'
        for col in p.output_columns
    ]
    head = "SELECT distinct " if p.distinct else "SELECT "
    select_clause = head + ",\n\t".join(select_items)

    from_items = [
        f"{_snake(lq.dataset)} {aliases[(lq.store, lq.dataset)]}"
        for lq in p.local_queries
    ]
    value_rows = ",\n\t".join(
        "(" + ", ".join(map(_sql_literal, row)) + ")"
        for row in p.constant_table.rows
    )
    from_items.append(
        f"( VALUES {value_rows} )\n\tas p({', '.join(p.constant_table.column_names)})"
    )
    from_clause = "FROM " + ",\n\t".join(from_items)

    conditions = [
        f'{aliases[(j.store, j.dataset)]}."{j.identifier}" = p.{j.store}_prov_id'
        for j in p.join_spec
    ]
    for lq in p.local_queries:
        alias = aliases[(lq.store, lq.dataset)]
        for f in lq.filters:
            conditions.append(f'{alias}."{f.attribute}" {f.op} {_sql_literal(f.value)}')
    where_clause = "WHERE " + "\n\tAND ".join(conditions)

    return "\n".join((select_clause, from_clause, where_clause))
