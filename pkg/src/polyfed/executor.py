"""Federated plan execution.

The constant table drives the join: each of its rows names, per store, the
identifier value a workflow execution captured there. For every local query
the executor scans its store once, indexes the result rows by identifier
value, and then probes that index with each constant-table row. Rows from
different stores combine only when they were matched by the same
constant-table row, which is exactly the record-linkage the provenance
promises. Executions whose reference misses in some store contribute
nothing (inner-join semantics).

Identifier comparison is type-strict, like everything else in the pipeline:
an integer reference never matches a string-typed cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .catalog import typed_key
from .errors import MissingAdapter
from .planner import FederatedPlan
from .stores import StoreAdapter, matches

__all__ = ["ResultTable", "execute"]


@dataclass(frozen=True)
class ResultTable:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


def execute(plan: FederatedPlan, adapters: dict[str, StoreAdapter]) -> ResultTable:
    """Run a federated plan against the given store adapters."""
    for lq in plan.local_queries:
        if lq.store not in adapters:
            raise MissingAdapter(f"no adapter for store {lq.store!r}")

    # Scan each local query once and index its rows by identifier value.
    indexes = []
    for lq in plan.local_queries:
        adapter = adapters[lq.store]
        scan_projection = list(lq.projection)
        if not adapter.supports_pushdown:
            for f in lq.filters:
                if f.attribute not in scan_projection:
                    scan_projection.append(f.attribute)
        rows = adapter.scan(lq.dataset, scan_projection, lq.filters)
        if not adapter.supports_pushdown and lq.filters:
            positions = {attr: i for i, attr in enumerate(scan_projection)}
            rows = [
                row
                for row in rows
                if all(
                    matches(row[positions[f.attribute]], f.op, f.value)
                    for f in lq.filters
                )
            ]
        width = len(lq.projection)
        id_pos = lq.projection.index(lq.identifier)
        index: dict[tuple, list[tuple]] = {}
        for row in rows:
            index.setdefault(typed_key(row[id_pos]), []).append(row[:width])
        indexes.append(index)

    # Column positions of each output attribute inside its local query.
    slots = []
    lq_pos = {(lq.store, lq.dataset): i for i, lq in enumerate(plan.local_queries)}
    for col in plan.output_columns:
        i = lq_pos[(col.store, col.dataset)]
        slots.append((i, plan.local_queries[i].projection.index(col.attribute)))

    store_col = {store: i for i, store in enumerate(plan.constant_table.stores)}
    out_rows: list[tuple] = []
    seen: set[tuple] = set()
    for reference_row in plan.constant_table.rows:
        matched = []
        for lq, index in zip(plan.local_queries, indexes):
            rows = index.get(typed_key(reference_row[store_col[lq.store]]))
            if not rows:
                matched = None
                break
            matched.append(rows)
        if matched is None:
            continue
        for combination in product(*matched):
            out = tuple(combination[i][j] for i, j in slots)
            if plan.distinct:
                key = tuple(typed_key(v) for v in out)
                if key in seen:
                    continue
                seen.add(key)
            out_rows.append(out)

    return ResultTable(
        columns=tuple(col.name for col in plan.output_columns),
        rows=tuple(out_rows),
    )
