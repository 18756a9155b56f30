"""HTTP/JSON surface over a workspace.

Endpoints mirror the three operational concerns: schema ingestion
(``/schema/gcs``, ``/schema/lcs``, ``/schema/alias``), provenance capture
(``/provenance/executions`` and per-execution transformation/end posts), and
query execution (``/query``).

Concurrency model: queries never lock. They run against a published
snapshot workspace; each mutation takes the write lock, applies to the
master workspace, persists the catalog when a path is configured, and then
publishes a fresh snapshot. Readers therefore see either the state before a
mutation or after it, never a half-applied batch.

Error mapping is uniform: syntax errors are 400 with line/column, duplicate
registrations and closed executions are 409, unknown execution ids are 404,
and every other domain error is 422.
"""

from __future__ import annotations

import os
import threading
from typing import Optional, Union

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field, StrictBool, StrictFloat, StrictInt, StrictStr

from .errors import (
    ClosedExecution,
    DuplicateEntity,
    DuplicateStore,
    DuplicateTriple,
    ParseError,
    PolyfedError,
    UnknownExecution,
)
from .planner import plan as build_plan
from .planner import render_sql
from .query import parse, validate
from .registry import AliasMapping
from .workspace import Workspace, _parse_capture, _parse_dataset, _parse_store

__all__ = ["create_app"]

Scalar = Union[StrictBool, StrictInt, StrictFloat, StrictStr]


class _State:
    """Master workspace plus the snapshot queries read from."""

    def __init__(self, workspace: Workspace, catalog_path: Optional[str]):
        self.master = workspace
        self.catalog_path = catalog_path
        self.lock = threading.Lock()
        self.published = workspace.snapshot()

    def mutate(self, apply):
        with self.lock:
            result = apply(self.master)
            if self.catalog_path:
                self.master.save(self.catalog_path)
            self.published = self.master.snapshot()
            return result


class GcsBody(BaseModel):
    entities: list[dict]


class AliasBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    global_attr: str = Field(alias="global")
    store: str
    local: str


class BeginExecutionBody(BaseModel):
    workflow: str


class AttributeLocation(BaseModel):
    store: str
    dataset: str
    attribute: str


class CaptureValue(BaseModel):
    attribute: Union[str, AttributeLocation]
    value: Scalar
    direction: str = "generated"


class TransformationBody(BaseModel):
    transformation: str
    values: list[CaptureValue] = []


class QueryBody(BaseModel):
    text: str
    explain: bool = False


def _status_for(exc: PolyfedError) -> int:
    if isinstance(exc, ParseError):
        return 400
    if isinstance(exc, (DuplicateEntity, DuplicateStore, DuplicateTriple, ClosedExecution)):
        return 409
    if isinstance(exc, UnknownExecution):
        return 404
    return 422


def create_app(
    workspace: Optional[Workspace] = None, catalog_path: Optional[str] = None
) -> FastAPI:
    catalog_path = catalog_path or os.environ.get("POLYFED_CATALOG")
    if workspace is None:
        if catalog_path and os.path.exists(catalog_path):
            workspace = Workspace.load(catalog_path)
        else:
            workspace = Workspace()
    state = _State(workspace, catalog_path)
    app = FastAPI(title="polyfed")

    @app.exception_handler(PolyfedError)
    async def _domain_error(request: Request, exc: PolyfedError) -> JSONResponse:
        detail: dict = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ParseError):
            detail.update(
                line=exc.line,
                column=exc.column,
                expected=list(exc.expected),
                found=exc.found,
            )
        return JSONResponse(status_code=_status_for(exc), content={"detail": detail})

    @app.post("/schema/gcs", status_code=201)
    def register_gcs(body: GcsBody):
        def apply(ws: Workspace):
            entities = [_parse_dataset(e) for e in body.entities]
            ws.registry.register_gcs(entities)
            return [e.name for e in entities]

        try:
            names = state.mutate(apply)
        except (KeyError, TypeError, ValueError) as exc:
            raise _malformed(exc)
        return {"entities": names}

    @app.post("/schema/lcs", status_code=201)
    def register_lcs(body: dict):
        def apply(ws: Workspace):
            descriptor = _parse_store(body)
            ws.registry.register_lcs(descriptor)
            ws.rebuild_adapters()
            return descriptor.name

        try:
            name = state.mutate(apply)
        except (KeyError, TypeError, ValueError) as exc:
            raise _malformed(exc)
        return {"store": name}

    @app.post("/schema/alias", status_code=201)
    def register_alias(body: AliasBody):
        state.mutate(
            lambda ws: ws.registry.create_alias(
                AliasMapping(body.global_attr, body.local, body.store)
            )
        )
        return {"global": body.global_attr, "store": body.store, "local": body.local}

    @app.post("/provenance/executions", status_code=201)
    def begin_execution(body: BeginExecutionBody):
        exec_id = state.mutate(
            lambda ws: ws.recorder.begin_workflow_execution(body.workflow)
        )
        return {"execution": exec_id}

    @app.post("/provenance/executions/{exec_id:path}/transformations", status_code=201)
    def record_transformation(exec_id: str, body: TransformationBody):
        records = [
            _parse_capture(
                {
                    "attribute": v.attribute.model_dump()
                    if isinstance(v.attribute, AttributeLocation)
                    else v.attribute,
                    "value": v.value,
                    "direction": v.direction,
                }
            )
            for v in body.values
        ]
        dte = state.mutate(
            lambda ws: ws.recorder.record_transformation_execution(
                exec_id, body.transformation, records
            )
        )
        return {"transformation_execution": dte}

    @app.post("/provenance/executions/{exec_id:path}/end", status_code=201)
    def end_execution(exec_id: str):
        state.mutate(lambda ws: ws.recorder.end_workflow_execution(exec_id))
        return {"execution": exec_id, "ended": True}

    @app.post("/query")
    def run_query(body: QueryBody):
        ws = state.published
        if body.explain:
            query = parse(body.text)
            validate(query, ws.registry, ws.recorder)
            federated = build_plan(query, ws.registry, ws.recorder)
            return {
                "columns": [c.name for c in federated.output_columns],
                "rows": [],
                "stats": {
                    "build_ms": 0.0,
                    "exec_ms": 0.0,
                    "stores_touched": len(federated.local_queries),
                    "constant_table_rows": len(federated.constant_table.rows),
                },
                "rendered_sql": render_sql(federated),
                "plan": {
                    "workflow": federated.workflow,
                    "stores": [lq.store for lq in federated.local_queries],
                    "pruned_stores": list(federated.pruned_stores),
                    "local_queries": [
                        {
                            "store": lq.store,
                            "dataset": lq.dataset,
                            "projection": list(lq.projection),
                            "filters": [
                                [f.attribute, f.op, f.value] for f in lq.filters
                            ],
                        }
                        for lq in federated.local_queries
                    ],
                },
            }
        result = ws.run(body.text)
        return {
            "columns": list(result.columns),
            "rows": [list(row) for row in result.rows],
            "stats": {
                "build_ms": result.stats.build_ms,
                "exec_ms": result.stats.exec_ms,
                "stores_touched": result.stats.stores_touched,
                "constant_table_rows": result.stats.constant_table_rows,
            },
            "rendered_sql": None,
        }

    return app


def _malformed(exc: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=f"malformed body: {exc}")
