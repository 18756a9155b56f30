"""Workflow provenance capture and data-reference retrieval.

Executions are recorded as graph nodes in the shared catalog:

* a ``Workflow`` node per workflow name (created on first use),
* a ``WorkflowExecution`` node per run, linked via ``wasDerivedFromWorkflow``
  and carrying ``startedAt``/``endedAt`` literal links,
* a ``DataTransformationExecution`` node per recorded step, linked via
  ``wasMemberOfWorkflowExecution``,
* an ``AttributeValue`` node per captured value with a
  ``wasDerivedFromAttribute`` link to the local attribute it instantiates, a
  ``value`` literal link, and either ``wasGeneratedBy`` (value -> step) or
  ``used`` (step -> value).

Captured attribute names must match local schema names; anything that does
not resolve is a hard error because a silently dropped capture would corrupt
the record linkage later.

The recorder also maintains an in-memory index of identifier captures per
execution, plus a memo of assembled reference rows per workflow, so that
:meth:`ProvenanceRecorder.data_references_for` stays cheap on catalogs with
many executions and under repeated identical queries. Both are derived
state: the index is rebuilt from the graph when a recorder is constructed
over a loaded catalog, the memo is dropped whenever anything is recorded,
and the test suite checks the results against a direct evaluation of the
traversal pattern.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence, Union
from urllib.parse import quote

from .catalog import Catalog, Node, NodeKind, NodeRef, Scalar, typed_key
from .errors import (
    AmbiguousReference,
    ClosedExecution,
    DuplicateEntity,
    MissingReference,
    UnknownExecution,
    UnknownWorkflow,
    UnresolvableAttribute,
)
from .registry import AttributeRef, SchemaRegistry

__all__ = [
    "AttributeValueRecord",
    "DataReferenceRow",
    "ProvenanceRecorder",
    "StoreReference",
    "TransformationDef",
    "WorkflowDef",
]

_EXEC_PREFIX = "hk://id/exec/"


@dataclass(frozen=True)
class TransformationDef:
    name: str
    used: tuple[str, ...] = ()
    generated: tuple[str, ...] = ()


@dataclass(frozen=True)
class WorkflowDef:
    name: str
    transformations: tuple[TransformationDef, ...] = ()


@dataclass(frozen=True)
class AttributeValueRecord:
    """One captured value.

    ``attribute`` is either an :class:`~polyfed.registry.AttributeRef` or a
    dataset-qualified local name such as ``"SeismicHeader.id"``. Global
    attribute names are rejected; capture speaks the local schema language.
    """

    attribute: Union[AttributeRef, str]
    value: Scalar
    direction: str = "generated"


@dataclass(frozen=True)
class StoreReference:
    dataset: str
    attribute: str
    value: Scalar


@dataclass(frozen=True)
class DataReferenceRow:
    workflow_execution: str
    references: dict[str, StoreReference] = field(default_factory=dict)


def _ident_ok(name: str) -> bool:
    if not name or not isinstance(name, str):
        return False
    first, rest = name[0], name[1:]
    return (first.isalpha() or first == "_") and all(
        c.isalnum() or c == "_" for c in rest
    )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class _CapturedStore:
    """Identifier captures for one (execution, store) pair."""

    __slots__ = ("generated", "used")

    def __init__(self):
        self.generated: dict[tuple, StoreReference] = {}
        self.used: dict[tuple, StoreReference] = {}


class ProvenanceRecorder:
    def __init__(self, catalog: Catalog, registry: SchemaRegistry):
        self.catalog = catalog
        self.registry = registry
        self._attr_cache: dict[str, AttributeRef] = {}
        self._executions: dict[str, list[str]] = {}
        self._captured: dict[str, dict[str, _CapturedStore]] = {}
        # memo of derived reference views, dropped on every new capture;
        # keys are tagged tuples ("refs"/"rows"/"stores", workflow, ...)
        self._reference_cache: dict[tuple, object] = {}
        self._closed: set[str] = set()
        self._wfe_seq = 0
        self._dte_seq = 0
        self._atv_seq = 0
        self._rebuild()

    # -- id scheme -----------------------------------------------------------

    @staticmethod
    def workflow_id(name: str) -> str:
        return f"hk://id/workflow/{quote(name, safe='')}"

    @staticmethod
    def workflow_context(name: str) -> str:
        return f"hk://ctx/wf/{quote(name, safe='')}"

    def _next(self, tag: str) -> str:
        seq = getattr(self, f"_{tag}_seq") + 1
        setattr(self, f"_{tag}_seq", seq)
        return f"{_EXEC_PREFIX}{tag}-{seq:06d}"

    @staticmethod
    def _seq_of(node_id: str) -> int:
        return int(node_id.rsplit("-", 1)[-1])

    # -- rebuilding from a loaded catalog --------------------------------------

    def _rebuild(self) -> None:
        rows = []
        for node in self.catalog.nodes(NodeKind.WORKFLOW_EXECUTION):
            workflows = self.catalog.objects(node.id, "wasDerivedFromWorkflow")
            if not workflows:
                continue
            name = self._workflow_name(workflows[0].id)
            rows.append((self._seq_of(node.id), node.id, name))
        rows.sort()
        for seq, exec_id, workflow in rows:
            self._wfe_seq = max(self._wfe_seq, seq)
            self._executions.setdefault(workflow, []).append(exec_id)
            self._captured[exec_id] = {}
            if self.catalog.objects(exec_id, "endedAt"):
                self._closed.add(exec_id)
            for dte in self.catalog.subjects(
                "wasMemberOfWorkflowExecution", NodeRef(exec_id)
            ):
                self._dte_seq = max(self._dte_seq, self._seq_of(dte))
                generated = self.catalog.subjects("wasGeneratedBy", NodeRef(dte))
                used = [
                    o.id
                    for o in self.catalog.objects(dte, "used")
                    if isinstance(o, NodeRef)
                ]
                for atv, direction in [(a, "generated") for a in generated] + [
                    (a, "used") for a in used
                ]:
                    self._atv_seq = max(self._atv_seq, self._seq_of(atv))
                    self._index_capture(exec_id, atv, direction)

    def _workflow_name(self, workflow_node: str) -> str:
        names = self.catalog.objects(workflow_node, "name")
        return names[0] if names else workflow_node

    def _index_capture(self, exec_id: str, atv: str, direction: str) -> None:
        attrs = self.catalog.objects(atv, "wasDerivedFromAttribute")
        values = self.catalog.objects(atv, "value")
        if not attrs or not values:
            return
        ref = self._resolve_node(attrs[0].id)
        if not ref.is_identifier:
            return
        value = values[0]
        per_store = self._captured[exec_id].setdefault(ref.store, _CapturedStore())
        bucket = per_store.generated if direction == "generated" else per_store.used
        bucket.setdefault(
            typed_key(value), StoreReference(ref.dataset, ref.attribute, value)
        )

    def _resolve_node(self, attr_node: str) -> AttributeRef:
        ref = self._attr_cache.get(attr_node)
        if ref is None:
            ref = self.registry.attribute_ref(attr_node)
            self._attr_cache[attr_node] = ref
        return ref

    # -- workflow registration ---------------------------------------------------

    def has_workflow(self, name: str) -> bool:
        return self.catalog.has_node(self.workflow_id(name))

    def register_workflow(self, workflow: WorkflowDef) -> None:
        """Register a workflow schema with its declared transformations.

        Every attribute reference in the transformation definitions must
        resolve against the local schemas.
        """
        if self.has_workflow(workflow.name):
            raise DuplicateEntity(f"workflow {workflow.name!r} already registered")
        seen = set()
        for t in workflow.transformations:
            if t.name in seen:
                raise ValueError(
                    f"transformation {t.name!r} repeats in {workflow.name!r}"
                )
            seen.add(t.name)
            for qualified in (*t.used, *t.generated):
                self._resolve_capture_target(qualified)
        context = self._workflow_nodes(workflow.name)
        wf_node = self.workflow_id(workflow.name)
        for t in workflow.transformations:
            t_node = f"{wf_node}/t/{quote(t.name, safe='')}"
            props = {}
            if t.used:
                props["used"] = ",".join(t.used)
            if t.generated:
                props["generated"] = ",".join(t.generated)
            self.catalog.add_node(
                Node(t_node, NodeKind.DATA_TRANSFORMATION, props), context=context
            )
            self.catalog.add_link(t_node, "name", t.name, context=context)
            self.catalog.add_link(
                t_node, "isTransformationOf", NodeRef(wf_node), context=context
            )

    def _workflow_nodes(self, name: str) -> str:
        """Get or create the workflow node and its context; return the context id."""
        if not _ident_ok(name):
            raise ValueError(f"workflow name {name!r} is not an identifier")
        context = self.workflow_context(name)
        if not self.catalog.has_node(context):
            self.catalog.add_node(Node(context, NodeKind.CONTEXT))
        wf_node = self.workflow_id(name)
        if not self.catalog.has_node(wf_node):
            self.catalog.add_node(Node(wf_node, NodeKind.WORKFLOW), context=context)
            self.catalog.add_link(wf_node, "name", name, context=context)
        return context

    # -- capture -------------------------------------------------------------------

    def begin_workflow_execution(self, workflow: str) -> str:
        """Open a new execution of ``workflow``, creating the workflow on first use."""
        context = self._workflow_nodes(workflow)
        exec_id = self._next("wfe")
        self.catalog.add_node(
            Node(exec_id, NodeKind.WORKFLOW_EXECUTION), context=context
        )
        self.catalog.add_link(
            exec_id, "wasDerivedFromWorkflow", NodeRef(self.workflow_id(workflow)),
            context=context,
        )
        self.catalog.add_link(exec_id, "startedAt", _now(), context=context)
        self._executions.setdefault(workflow, []).append(exec_id)
        self._captured[exec_id] = {}
        self._reference_cache.clear()
        return exec_id

    def _require_open(self, exec_id: str) -> None:
        if exec_id not in self._captured:
            raise UnknownExecution(f"no workflow execution {exec_id!r}")
        if exec_id in self._closed:
            raise ClosedExecution(f"execution {exec_id!r} has already ended")

    def _resolve_capture_target(self, attribute: Union[AttributeRef, str]) -> str:
        """Resolve a capture target to a local attribute node id."""
        if isinstance(attribute, AttributeRef):
            node_id = self.registry.lcs_attr_id(
                attribute.store, attribute.dataset, attribute.attribute
            )
            if not self.catalog.has_node(node_id):
                raise UnresolvableAttribute(
                    f"{attribute.store}/{attribute.qualified} is not registered"
                )
            return node_id
        dataset, _, attr = str(attribute).partition(".")
        if not dataset or not attr:
            raise UnresolvableAttribute(
                f"capture attribute {attribute!r} is not of the form Dataset.attr"
            )
        candidates = self.registry.lcs_attribute_node(dataset, attr)
        if not candidates:
            raise UnresolvableAttribute(
                f"capture attribute {attribute!r} matches no local attribute"
            )
        if len(candidates) > 1:
            raise UnresolvableAttribute(
                f"capture attribute {attribute!r} is ambiguous across stores; "
                "pass an AttributeRef with the store name"
            )
        return candidates[0]

    def record_transformation_execution(
        self,
        exec_id: str,
        transformation: str,
        values: Sequence[AttributeValueRecord],
    ) -> str:
        """Record one transformation execution with its captured values.

        Returns the id of the created transformation-execution node. All
        attribute references are resolved before anything is written.
        """
        self._require_open(exec_id)
        resolved = []
        for record in values:
            if record.direction not in ("used", "generated"):
                raise ValueError(
                    f"direction must be 'used' or 'generated', got {record.direction!r}"
                )
            resolved.append((self._resolve_capture_target(record.attribute), record))

        workflow = self._workflow_name(
            self.catalog.objects(exec_id, "wasDerivedFromWorkflow")[0].id
        )
        context = self.workflow_context(workflow)
        dte = self._next("dte")
        self.catalog.add_node(
            Node(dte, NodeKind.DATA_TRANSFORMATION_EXECUTION), context=context
        )
        self.catalog.add_link(
            dte, "wasMemberOfWorkflowExecution", NodeRef(exec_id), context=context
        )
        self.catalog.add_link(dte, "name", transformation, context=context)
        for attr_node, record in resolved:
            atv = self._next("atv")
            self.catalog.add_node(Node(atv, NodeKind.ATTRIBUTE_VALUE), context=context)
            self.catalog.add_link(
                atv, "wasDerivedFromAttribute", NodeRef(attr_node), context=context
            )
            self.catalog.add_link(atv, "value", record.value, context=context)
            if record.direction == "generated":
                self.catalog.add_link(atv, "wasGeneratedBy", NodeRef(dte), context=context)
            else:
                self.catalog.add_link(dte, "used", NodeRef(atv), context=context)
            self._index_capture(exec_id, atv, record.direction)
        self._reference_cache.clear()
        return dte

    def end_workflow_execution(self, exec_id: str) -> None:
        self._require_open(exec_id)
        workflow = self._workflow_name(
            self.catalog.objects(exec_id, "wasDerivedFromWorkflow")[0].id
        )
        self.catalog.add_link(
            exec_id, "endedAt", _now(), context=self.workflow_context(workflow)
        )
        self._closed.add(exec_id)
        self._reference_cache.clear()

    def open_executions(self) -> list[str]:
        open_ids = [e for e in self._captured if e not in self._closed]
        open_ids.sort(key=self._seq_of)
        return open_ids

    def executions_of(self, workflow: str) -> list[str]:
        if not self.has_workflow(workflow):
            raise UnknownWorkflow(f"workflow {workflow!r} unknown")
        return list(self._executions.get(workflow, ()))

    # -- reference retrieval -----------------------------------------------------------

    def data_references_for(
        self, workflow: str, stores: Iterable[str]
    ) -> list[DataReferenceRow]:
        """Return one reference row per execution of ``workflow``.

        Each row carries, for every requested store, the identifier value
        that execution captured there. A generated value wins over a used
        one for the same store; conflicting captures raise
        AmbiguousReference, absent ones MissingReference. Rows are ordered
        by execution id.
        """
        if not self.has_workflow(workflow):
            raise UnknownWorkflow(f"workflow {workflow!r} unknown")
        wanted = sorted(set(stores))
        key = ("refs", workflow, tuple(wanted))
        cached = self._reference_cache.get(key)
        if cached is not None:
            return list(cached)
        rows = []
        for exec_id in self._executions.get(workflow, ()):
            references = {}
            for store in wanted:
                references[store] = self._reference_for(exec_id, store)
            rows.append(DataReferenceRow(exec_id, references))
        self._reference_cache[key] = rows
        return list(rows)

    def reference_rows(
        self, workflow: str, stores: Iterable[str]
    ) -> tuple[tuple[Scalar, ...], ...]:
        """Constant-table payload: one value tuple per execution.

        Values come in sorted-store order, matching
        :meth:`data_references_for`; the result shares its memoization and
        is safe to hold, being fully immutable.
        """
        wanted = sorted(set(stores))
        key = ("rows", workflow, tuple(wanted))
        cached = self._reference_cache.get(key)
        if cached is not None:
            return cached
        rows = tuple(
            tuple(row.references[store].value for store in wanted)
            for row in self.data_references_for(workflow, wanted)
        )
        self._reference_cache[key] = rows
        return rows

    def _reference_for(self, exec_id: str, store: str) -> StoreReference:
        captured = self._captured[exec_id].get(store)
        if captured is None:
            raise MissingReference(store, exec_id)
        bucket = captured.generated or captured.used
        if len(bucket) > 1:
            values = sorted(repr(r.value) for r in bucket.values())
            raise AmbiguousReference(
                f"execution {exec_id!r} captured conflicting identifier values "
                f"for store {store!r}: {', '.join(values)}"
            )
        return next(iter(bucket.values()))

    def referenced_stores(self, workflow: str) -> list[str]:
        """Stores with at least one identifier capture across the workflow's runs."""
        if not self.has_workflow(workflow):
            raise UnknownWorkflow(f"workflow {workflow!r} unknown")
        key = ("stores", workflow)
        cached = self._reference_cache.get(key)
        if cached is not None:
            return list(cached)
        stores: set[str] = set()
        for exec_id in self._executions.get(workflow, ()):
            stores.update(self._captured[exec_id])
        result = sorted(stores)
        self._reference_cache[key] = result
        return list(result)
