"""Workspace assembly: one catalog, its registry views, and live adapters.

A :class:`Workspace` is the unit everything user-facing operates on. It wires
a :class:`~polyfed.catalog.Catalog` to a schema registry, a provenance
recorder, and one store adapter per registered data store, and it runs the
full query pipeline (parse, validate, plan, render, execute) in one call.

Workspaces come from three places:

* :func:`scenario_workspace` builds the bundled oil-and-gas demo in memory,
* :meth:`Workspace.from_fixture_dir` loads a fixture directory of YAML
  schema files plus per-store data files,
* :meth:`Workspace.load` re-opens a catalog previously written with
  :meth:`Workspace.save` (the data directory is remembered inside the
  catalog so adapters can be rebuilt).

Fixture directory layout::

    gcs.yaml            global entities
    stores/*.yaml       one data store descriptor each
    aliases.yaml        local-to-global attribute mappings
    provenance.yaml     workflows and recorded executions
    data/<store>/       store payloads (CSV / JSONL / triples / manifest)
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import yaml

from .catalog import Catalog, Node, NodeKind
from .executor import execute
from .planner import FederatedPlan, plan, render_sql
from .provenance import (
    AttributeValueRecord,
    ProvenanceRecorder,
    TransformationDef,
    WorkflowDef,
)
from .query import parse, validate
from .registry import (
    AliasMapping,
    AttributeDef,
    AttributeRef,
    DataStoreDescriptor,
    DatabaseDef,
    DatabaseSchemaDef,
    DatasetSchemaDef,
    SchemaRegistry,
    StoreKind,
)
from .stores import (
    DocumentStore,
    FileMetaStore,
    RelationalStore,
    StoreAdapter,
    TripleStore,
)

__all__ = [
    "QueryResult",
    "QueryStats",
    "SCENARIO_QUERY",
    "SCENARIO_WORKFLOW",
    "Workspace",
    "build_scenario_schemas",
    "scenario_workspace",
]

_CONFIG_NODE = "hk://id/config/workspace"

SCENARIO_WORKFLOW = "geological_data_ingestion_workflow"

SCENARIO_QUERY = (
    "select Seismic.inline, Seismic.crossline, Seismic.hasWell, "
    "Seismic.hasHorizon, Seismic.epsg "
    f"where Seismic from {SCENARIO_WORKFLOW} "
    'and Seismic.name = "Netherlands"'
)


@dataclass(frozen=True)
class QueryStats:
    build_ms: float
    exec_ms: float
    stores_touched: int
    constant_table_rows: int


@dataclass(frozen=True)
class QueryResult:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    sql: str
    plan: FederatedPlan
    stats: QueryStats


class Workspace:
    def __init__(self, catalog: Optional[Catalog] = None, data_dir=None):
        self.catalog = catalog if catalog is not None else Catalog()
        self.registry = SchemaRegistry(self.catalog)
        self.recorder = ProvenanceRecorder(self.catalog, self.registry)
        self.data_dir = Path(data_dir) if data_dir else None
        self.adapters: dict[str, StoreAdapter] = {}
        self.rebuild_adapters()

    # -- adapters --------------------------------------------------------

    def rebuild_adapters(self) -> None:
        """Build one adapter per registered store, loading data files if any."""
        self.adapters = {
            store: _make_adapter(self.registry, store, self.data_dir)
            for store in self.registry.stores()
        }

    # -- query pipeline ----------------------------------------------------

    def run(self, text: str) -> QueryResult:
        """Parse, validate, plan, render, and execute a query."""
        t0 = time.perf_counter_ns()
        query = parse(text)
        validate(query, self.registry, self.recorder)
        federated = plan(query, self.registry, self.recorder)
        sql = render_sql(federated)
        t1 = time.perf_counter_ns()
        table = execute(federated, self.adapters)
        t2 = time.perf_counter_ns()
        stats = QueryStats(
            build_ms=(t1 - t0) / 1e6,
            exec_ms=(t2 - t1) / 1e6,
            stores_touched=len(federated.local_queries),
            constant_table_rows=len(federated.constant_table.rows),
        )
        return QueryResult(table.columns, table.rows, sql, federated, stats)

    # -- persistence -------------------------------------------------------

    def save(self, path) -> None:
        if self.data_dir is not None:
            if self.catalog.has_node(_CONFIG_NODE):
                self.catalog.node(_CONFIG_NODE).properties["data_dir"] = str(
                    self.data_dir
                )
            else:
                self.catalog.add_node(
                    Node(
                        _CONFIG_NODE,
                        NodeKind.CONCEPT,
                        {"data_dir": str(self.data_dir)},
                    )
                )
        self.catalog.save(path)

    @classmethod
    def load(cls, path, data_dir=None) -> "Workspace":
        catalog = Catalog.load(path)
        if data_dir is None and catalog.has_node(_CONFIG_NODE):
            data_dir = catalog.node(_CONFIG_NODE).properties.get("data_dir")
        return cls(catalog, data_dir=data_dir)

    def snapshot(self) -> "Workspace":
        """An independent copy of the graph, sharing the (read-only) adapters.

        Mutations to either workspace's catalog never show through to the
        other; store payloads are shared because the query path does not
        write to them.
        """
        twin = Workspace.__new__(Workspace)
        twin.catalog = self.catalog.clone()
        twin.registry = SchemaRegistry(twin.catalog)
        twin.recorder = ProvenanceRecorder(twin.catalog, twin.registry)
        twin.data_dir = self.data_dir
        twin.adapters = self.adapters
        return twin

    # -- fixture loading --------------------------------------------------------

    @classmethod
    def from_fixture_dir(cls, path) -> "Workspace":
        root = Path(path)
        data_dir = root / "data"
        ws = cls(data_dir=data_dir if data_dir.is_dir() else None)

        gcs_file = root / "gcs.yaml"
        if gcs_file.is_file():
            doc = _load_yaml(gcs_file)
            ws.registry.register_gcs(
                [_parse_dataset(e) for e in doc.get("entities", ())]
            )
        stores_dir = root / "stores"
        if stores_dir.is_dir():
            for store_file in sorted(stores_dir.glob("*.yaml")):
                ws.registry.register_lcs(_parse_store(_load_yaml(store_file)))
        aliases_file = root / "aliases.yaml"
        if aliases_file.is_file():
            for entry in _load_yaml(aliases_file).get("aliases", ()):
                ws.registry.create_alias(
                    AliasMapping(entry["global"], entry["local"], entry["store"])
                )
        ws.rebuild_adapters()

        provenance_file = root / "provenance.yaml"
        if provenance_file.is_file():
            _apply_provenance(ws.recorder, _load_yaml(provenance_file))
        return ws


def _load_yaml(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return yaml.safe_load(fh) or {}


def _parse_attribute(spec) -> AttributeDef:
    if isinstance(spec, str):
        return AttributeDef(spec)
    return AttributeDef(
        spec["name"],
        complex=bool(spec.get("complex", False)),
        members=tuple(_parse_attribute(m) for m in spec.get("members", ())),
        aka=tuple(spec.get("aka", ())),
    )


def _parse_dataset(spec) -> DatasetSchemaDef:
    return DatasetSchemaDef(
        name=spec["name"],
        attributes=tuple(_parse_attribute(a) for a in spec.get("attributes", ())),
        identifier=spec["identifier"],
        referred=tuple(
            (r["attribute"], r["target"]) for r in spec.get("referred", ())
        ),
    )


def _parse_store(spec) -> DataStoreDescriptor:
    return DataStoreDescriptor(
        name=spec["name"],
        store_kind=StoreKind(spec["kind"]),
        machine=spec["machine"],
        databases=tuple(
            DatabaseDef(
                name=db["name"],
                schemas=tuple(
                    DatabaseSchemaDef(
                        name=schema["name"],
                        datasets=tuple(
                            _parse_dataset(d) for d in schema.get("datasets", ())
                        ),
                    )
                    for schema in db.get("schemas", ())
                ),
            )
            for db in spec.get("databases", ())
        ),
    )


def _parse_capture(spec) -> AttributeValueRecord:
    attribute: Union[AttributeRef, str]
    raw = spec["attribute"]
    if isinstance(raw, dict):
        attribute = AttributeRef(raw["store"], raw["dataset"], raw["attribute"])
    else:
        attribute = raw
    return AttributeValueRecord(
        attribute, spec["value"], spec.get("direction", "generated")
    )


def _apply_provenance(recorder: ProvenanceRecorder, doc: dict) -> None:
    for wf in doc.get("workflows", ()):
        recorder.register_workflow(
            WorkflowDef(
                wf["name"],
                tuple(
                    TransformationDef(
                        t["name"],
                        used=tuple(t.get("used", ())),
                        generated=tuple(t.get("generated", ())),
                    )
                    for t in wf.get("transformations", ())
                ),
            )
        )
    for run in doc.get("executions", ()):
        exec_id = recorder.begin_workflow_execution(run["workflow"])
        for step in run.get("steps", ()):
            recorder.record_transformation_execution(
                exec_id,
                step["transformation"],
                [_parse_capture(v) for v in step.get("values", ())],
            )
        if run.get("ended", True):
            recorder.end_workflow_execution(exec_id)


def _make_adapter(
    registry: SchemaRegistry, store: str, data_dir: Optional[Path]
) -> StoreAdapter:
    kind = registry.store_kind(store)
    base = data_dir / store if data_dir is not None else None
    datasets = registry.datasets_of(store)

    if kind is StoreKind.RELATIONAL_DB:
        relational = RelationalStore(store)
        for dataset in datasets:
            relational.declare_columns(dataset, registry.attributes_of(store, dataset))
            if base is not None and (base / f"{dataset}.csv").is_file():
                relational.load_csv(dataset, base / f"{dataset}.csv")
        return relational

    if kind is StoreKind.DOCUMENT_DB:
        documents = DocumentStore(store)
        for dataset in datasets:
            documents.declare_columns(dataset, registry.attributes_of(store, dataset))
            if base is not None and (base / f"{dataset}.jsonl").is_file():
                documents.load_jsonl(dataset, base / f"{dataset}.jsonl")
        return documents

    if kind is StoreKind.TRIPLE_STORE:
        triples = TripleStore(store)
        for dataset in datasets:
            triples.declare_dataset(dataset, registry.identifier_of(store, dataset))
            triples.declare_columns(dataset, registry.attributes_of(store, dataset))
        if base is not None and base.is_dir():
            for triple_file in sorted(base.glob("*.triples")):
                triples.load_triples(triple_file)
        return triples

    if kind is StoreKind.FILE_SYSTEM:
        files = FileMetaStore(store)
        for dataset in datasets:
            files.declare_columns(dataset, registry.attributes_of(store, dataset))
        if base is not None and (base / "manifest.txt").is_file():
            files.load_manifest(base / "manifest.txt")
        return files

    raise ValueError(f"no adapter for store kind {kind!r}")


# -- bundled demo scenario ----------------------------------------------------


def build_scenario_schemas(registry: SchemaRegistry) -> None:
    """Register the oil-and-gas demo schema: one global entity, four stores."""
    registry.register_gcs(
        [
            DatasetSchemaDef(
                name="Seismic",
                identifier="URI",
                attributes=(
                    AttributeDef("URI"),
                    AttributeDef("inline"),
                    AttributeDef("crossline"),
                    AttributeDef("well", aka=("hasWell",)),
                    AttributeDef("horizon", aka=("hasHorizon",)),
                    AttributeDef("epsg"),
                    AttributeDef("name"),
                ),
            )
        ]
    )
    registry.register_lcs(
        DataStoreDescriptor(
            name="PostgreSQL",
            store_kind=StoreKind.RELATIONAL_DB,
            machine="pg01.local",
            databases=(
                DatabaseDef(
                    name="SeismicDB",
                    schemas=(
                        DatabaseSchemaDef(
                            name="SeismicSQ",
                            datasets=(
                                DatasetSchemaDef(
                                    name="SeismicHeader",
                                    identifier="id",
                                    attributes=(
                                        AttributeDef("id"),
                                        AttributeDef("inline"),
                                        AttributeDef("crossline"),
                                        AttributeDef("header_info"),
                                        AttributeDef("filepath"),
                                        AttributeDef("name"),
                                    ),
                                ),
                            ),
                        ),
                    ),
                ),
            ),
        )
    )
    registry.register_lcs(
        DataStoreDescriptor(
            name="AllegroGraph",
            store_kind=StoreKind.TRIPLE_STORE,
            machine="agraph01.local",
            databases=(
                DatabaseDef(
                    name="Seismic catalog",
                    schemas=(
                        DatabaseSchemaDef(
                            name="Seismic repo",
                            datasets=(
                                DatasetSchemaDef(
                                    name="SeismicCls",
                                    identifier="URI",
                                    attributes=(
                                        AttributeDef("URI"),
                                        AttributeDef("name"),
                                        AttributeDef("hasWell"),
                                        AttributeDef("hasHorizon"),
                                    ),
                                ),
                            ),
                        ),
                    ),
                ),
            ),
        )
    )
    registry.register_lcs(
        DataStoreDescriptor(
            name="MongoDB",
            store_kind=StoreKind.DOCUMENT_DB,
            machine="mongo01.local",
            databases=(
                DatabaseDef(
                    name="Seismicdb",
                    schemas=(
                        DatabaseSchemaDef(
                            name="Seismic",
                            datasets=(
                                DatasetSchemaDef(
                                    name="Seismic_data",
                                    identifier="identifier",
                                    attributes=(
                                        AttributeDef("identifier"),
                                        AttributeDef("name"),
                                        AttributeDef("num_ilines"),
                                        AttributeDef("num_xlines"),
                                        AttributeDef("epsg"),
                                    ),
                                ),
                            ),
                        ),
                    ),
                ),
            ),
        )
    )
    registry.register_lcs(
        DataStoreDescriptor(
            name="LocalFileSystem",
            store_kind=StoreKind.FILE_SYSTEM,
            machine="files01.local",
            databases=(
                DatabaseDef(
                    name="data",
                    schemas=(
                        DatabaseSchemaDef(
                            name="files",
                            datasets=(
                                DatasetSchemaDef(
                                    name="TrainingFile",
                                    identifier="path",
                                    attributes=(
                                        AttributeDef("path"),
                                        AttributeDef("size"),
                                    ),
                                ),
                            ),
                        ),
                    ),
                ),
            ),
        )
    )
    for global_attr, store, local_attr in (
        ("Seismic.URI", "PostgreSQL", "SeismicHeader.id"),
        ("Seismic.inline", "PostgreSQL", "SeismicHeader.inline"),
        ("Seismic.crossline", "PostgreSQL", "SeismicHeader.crossline"),
        ("Seismic.name", "PostgreSQL", "SeismicHeader.name"),
        ("Seismic.URI", "AllegroGraph", "SeismicCls.URI"),
        ("Seismic.well", "AllegroGraph", "SeismicCls.hasWell"),
        ("Seismic.horizon", "AllegroGraph", "SeismicCls.hasHorizon"),
        ("Seismic.name", "AllegroGraph", "SeismicCls.name"),
        ("Seismic.URI", "MongoDB", "Seismic_data.identifier"),
        ("Seismic.epsg", "MongoDB", "Seismic_data.epsg"),
    ):
        registry.create_alias(AliasMapping(global_attr, local_attr, store))


def _scenario_data(adapters: dict[str, StoreAdapter]) -> None:
    adapters["PostgreSQL"].add_table(
        "SeismicHeader",
        ["id", "inline", "crossline", "header_info", "filepath", "name"],
        [
            (12345, 651, 951, "NL offshore F3 header", "/segy/netherlands.sgy", "Netherlands"),
            (67890, 120, 80, "Synthetic cube header", "/segy/synthetic.sgy", "Synthetic"),
        ],
    )
    adapters["MongoDB"].add_collection(
        "Seismic_data",
        [
            {
                "identifier": 1111,
                "name": "Netherlands",
                "num_ilines": 651,
                "num_xlines": 951,
                "epsg": 23031,
            },
            {
                "identifier": 2222,
                "name": "Synthetic",
                "num_ilines": 120,
                "num_xlines": 80,
                "epsg": 4326,
            },
        ],
    )
    graph = adapters["AllegroGraph"]
    netherlands = "http://oilandgas/Seismic#Netherlands"
    synthetic = "http://oilandgas/Seismic#Synthetic"
    for subject, predicate, obj in (
        (netherlands, "type", "SeismicCls"),
        (netherlands, "name", "Netherlands"),
        (netherlands, "hasWell", "http://oilandgas/Well#F03-2"),
        (netherlands, "hasHorizon", "http://oilandgas/Horizon#FS8"),
        (synthetic, "type", "SeismicCls"),
        (synthetic, "name", "Synthetic"),
        (synthetic, "hasWell", "http://oilandgas/Well#SYN-1"),
        (synthetic, "hasHorizon", "http://oilandgas/Horizon#SYN-H1"),
    ):
        graph.add_triple(subject, predicate, obj)
    adapters["LocalFileSystem"].add_record(
        "TrainingFile", "/data/netherlands.train", 73014
    )
    adapters["LocalFileSystem"].add_record(
        "TrainingFile", "/data/synthetic.train", 1024
    )


def _scenario_provenance(recorder: ProvenanceRecorder) -> None:
    netherlands = "http://oilandgas/Seismic#Netherlands"
    recorder.register_workflow(
        WorkflowDef(
            SCENARIO_WORKFLOW,
            (
                TransformationDef(
                    "Data quality assessment", generated=("SeismicHeader.id",)
                ),
                TransformationDef(
                    "Geospatial index generation",
                    generated=("Seismic_data.identifier",),
                ),
                TransformationDef(
                    "Expert knowledge ingestion", generated=("SeismicCls.URI",)
                ),
                TransformationDef(
                    "Data preparation",
                    used=(
                        "SeismicHeader.id",
                        "Seismic_data.identifier",
                        "SeismicCls.URI",
                    ),
                    generated=("TrainingFile.path",),
                ),
            ),
        )
    )
    exec_id = recorder.begin_workflow_execution(SCENARIO_WORKFLOW)
    recorder.record_transformation_execution(
        exec_id,
        "Data quality assessment",
        [AttributeValueRecord("SeismicHeader.id", 12345)],
    )
    recorder.record_transformation_execution(
        exec_id,
        "Geospatial index generation",
        [AttributeValueRecord("Seismic_data.identifier", 1111)],
    )
    recorder.record_transformation_execution(
        exec_id,
        "Expert knowledge ingestion",
        [AttributeValueRecord("SeismicCls.URI", netherlands)],
    )
    recorder.record_transformation_execution(
        exec_id,
        "Data preparation",
        [
            AttributeValueRecord("SeismicHeader.id", 12345, "used"),
            AttributeValueRecord("Seismic_data.identifier", 1111, "used"),
            AttributeValueRecord("SeismicCls.URI", netherlands, "used"),
            AttributeValueRecord("TrainingFile.path", "/data/netherlands.train"),
        ],
    )
    recorder.end_workflow_execution(exec_id)


def scenario_workspace(
    with_data: bool = True, with_provenance: bool = True
) -> Workspace:
    """The in-memory demo workspace.

    ``with_data=False`` leaves the stores empty (schemas still declared);
    ``with_provenance=False`` skips workflow registration and the recorded
    execution. The benchmark uses the bare variant and fills in its own
    synthetic payload.
    """
    ws = Workspace()
    build_scenario_schemas(ws.registry)
    ws.rebuild_adapters()
    if with_data:
        _scenario_data(ws.adapters)
    if with_provenance:
        _scenario_provenance(ws.recorder)
    return ws
