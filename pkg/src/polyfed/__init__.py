"""Federated querying over polystore schemas linked by workflow provenance.

A typed knowledge-graph catalog holds global and per-store schemas, alias
mappings between them, and recorded workflow executions. Queries written
against the global schema are planned into per-store local queries joined
through a constant table of provenance-captured identifiers, rendered as
SQL for inspection, and executed against in-process store adapters.
"""

from .bench import (
    Batch,
    BatchSpec,
    TimingPoint,
    TimingReport,
    TimingSample,
    apply_batches,
    generate_batches,
    run_benchmark,
)
from .catalog import (
    Catalog,
    Edge,
    Link,
    Node,
    NodeKind,
    NodeRef,
    Template,
    Var,
)
from .errors import ParseError, PolyfedError
from .executor import ResultTable, execute
from .metrics import (
    ComplexityReport,
    complexity_of_global,
    complexity_of_plan,
    complexity_of_unpruned_plan,
)
from .planner import FederatedPlan, plan, render_sql
from .provenance import (
    AttributeValueRecord,
    DataReferenceRow,
    ProvenanceRecorder,
    StoreReference,
    TransformationDef,
    WorkflowDef,
)
from .query import Filter, GlobalQuery, parse, render, validate
from .registry import (
    AliasMapping,
    AttributeDef,
    AttributeRef,
    DatabaseDef,
    DatabaseSchemaDef,
    DataStoreDescriptor,
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
from .workspace import (
    SCENARIO_QUERY,
    SCENARIO_WORKFLOW,
    QueryResult,
    QueryStats,
    Workspace,
    build_scenario_schemas,
    scenario_workspace,
)

__version__ = "0.1.0"

__all__ = [
    "AliasMapping",
    "AttributeDef",
    "AttributeRef",
    "AttributeValueRecord",
    "Batch",
    "BatchSpec",
    "Catalog",
    "ComplexityReport",
    "DataReferenceRow",
    "DataStoreDescriptor",
    "DatabaseDef",
    "DatabaseSchemaDef",
    "DatasetSchemaDef",
    "DocumentStore",
    "Edge",
    "FederatedPlan",
    "FileMetaStore",
    "Filter",
    "GlobalQuery",
    "Link",
    "Node",
    "NodeKind",
    "NodeRef",
    "ParseError",
    "PolyfedError",
    "ProvenanceRecorder",
    "QueryResult",
    "QueryStats",
    "RelationalStore",
    "ResultTable",
    "SCENARIO_QUERY",
    "SCENARIO_WORKFLOW",
    "SchemaRegistry",
    "StoreAdapter",
    "StoreKind",
    "StoreReference",
    "Template",
    "TimingPoint",
    "TimingReport",
    "TimingSample",
    "TransformationDef",
    "TripleStore",
    "Var",
    "WorkflowDef",
    "Workspace",
    "apply_batches",
    "build_scenario_schemas",
    "complexity_of_global",
    "complexity_of_plan",
    "complexity_of_unpruned_plan",
    "execute",
    "generate_batches",
    "parse",
    "plan",
    "render",
    "render_sql",
    "run_benchmark",
    "scenario_workspace",
    "validate",
    "__version__",
]
