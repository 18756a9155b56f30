"""Schema registry: global schema, local store schemas, and alias mappings.

This module is a typed facade over :class:`~polyfed.catalog.Catalog`. It owns
the identifier scheme for schema nodes and the link vocabulary that the rest
of the pipeline traverses:

* global entities and attributes live under ``hk://id/gcs/...`` in the
  ``hk://ctx/gcs`` context;
* each data store gets a node hierarchy (store, machine, databases, database
  schemas, dataset schemas, attributes) under ``hk://id/...`` namespaces and
  a per-store context;
* ``alias`` links run from a local attribute to the global attribute it
  realizes, and :meth:`SchemaRegistry.resolve_attribute` walks them in the
  inverse direction to answer "where does this global attribute live".

Names are stored as literal ``name`` links so pattern matching can reach
them; alternate spellings of a global attribute (for domains that grew a
second convention, such as ``well`` also being written ``hasWell``) are kept
in an ``aka`` node property and resolved transparently.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence
from urllib.parse import quote, unquote

from .catalog import Catalog, Node, NodeKind, NodeRef
from .errors import (
    DuplicateEntity,
    DuplicateStore,
    MissingIdentifier,
    UnknownAttribute,
    UnknownDataset,
    UnknownReferredTarget,
)

__all__ = [
    "AliasMapping",
    "AttributeDef",
    "AttributeRef",
    "DataStoreDescriptor",
    "DatabaseDef",
    "DatabaseSchemaDef",
    "DatasetSchemaDef",
    "SchemaRegistry",
    "StoreKind",
]

GCS_CONTEXT = "hk://ctx/gcs"


class StoreKind(Enum):
    FILE_SYSTEM = "FileSystem"
    DOCUMENT_DB = "DocumentDB"
    RELATIONAL_DB = "RelationalDB"
    TRIPLE_STORE = "TripleStore"


_STORE_KIND_BY_NAME = {k.value: k for k in StoreKind}


def _ident_ok(name: str) -> bool:
    if not name or not isinstance(name, str):
        return False
    first, rest = name[0], name[1:]
    return (first.isalpha() or first == "_") and all(
        c.isalnum() or c == "_" for c in rest
    )


def _q(segment: str) -> str:
    return quote(segment, safe="")


@dataclass(frozen=True)
class AttributeDef:
    name: str
    complex: bool = False
    members: tuple["AttributeDef", ...] = ()
    aka: tuple[str, ...] = ()

    def __post_init__(self):
        if self.complex and not self.members:
            raise ValueError(f"complex attribute {self.name!r} needs members")
        if self.members and not self.complex:
            raise ValueError(f"attribute {self.name!r} has members but is not complex")


@dataclass(frozen=True)
class DatasetSchemaDef:
    name: str
    attributes: tuple[AttributeDef, ...]
    identifier: str
    referred: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class DatabaseSchemaDef:
    name: str
    datasets: tuple[DatasetSchemaDef, ...]


@dataclass(frozen=True)
class DatabaseDef:
    name: str
    schemas: tuple[DatabaseSchemaDef, ...]


@dataclass(frozen=True)
class DataStoreDescriptor:
    name: str
    store_kind: StoreKind
    machine: str
    databases: tuple[DatabaseDef, ...]


@dataclass(frozen=True)
class AliasMapping:
    gcs_attr: str
    lcs_attr: str
    store: str


@dataclass(frozen=True)
class AttributeRef:
    store: str
    dataset: str
    attribute: str
    is_identifier: bool = False

    @property
    def qualified(self) -> str:
        return f"{self.dataset}.{self.attribute}"


def _split_qualified(qualified: str, what: str) -> tuple[str, str]:
    head, sep, tail = qualified.partition(".")
    if not sep or not head or not tail:
        raise UnknownAttribute(f"{what} {qualified!r} is not of the form A.b")
    return head, tail


class SchemaRegistry:
    """Register and resolve schemas stored in a catalog.

    All state lives in the catalog, so a registry built over a loaded
    catalog sees everything an earlier process registered.
    """

    def __init__(self, catalog: Catalog):
        self.catalog = catalog

    # -- id scheme -------------------------------------------------------

    @staticmethod
    def entity_id(entity: str) -> str:
        return f"hk://id/gcs/{_q(entity)}"

    @staticmethod
    def gcs_attr_id(entity: str, attr: str) -> str:
        return f"hk://id/gcs/{_q(entity)}.{_q(attr)}"

    @staticmethod
    def store_id(store: str) -> str:
        return f"hk://id/store/{_q(store)}"

    @staticmethod
    def dataset_id(store: str, dataset: str) -> str:
        return f"hk://id/lcs/{_q(store)}/{_q(dataset)}"

    @staticmethod
    def lcs_attr_id(store: str, dataset: str, attr: str) -> str:
        return f"hk://id/lcs/{_q(store)}/{_q(dataset)}.{_q(attr)}"

    @staticmethod
    def store_context(store: str) -> str:
        return f"hk://ctx/lcs/{_q(store)}"

    # -- registration -------------------------------------------------------

    def _ensure_context(self, context_id: str) -> str:
        if not self.catalog.has_node(context_id):
            self.catalog.add_node(Node(context_id, NodeKind.CONTEXT))
        return context_id

    def _add(self, node: Node, context: str, name: str) -> str:
        self.catalog.add_node(node, context=context)
        self.catalog.add_link(node.id, "name", name, context=context)
        return node.id

    def register_gcs(self, entities: Sequence[DatasetSchemaDef]) -> None:
        """Register global entities, their attributes, and referred links.

        The batch is validated before anything is written: duplicate names,
        identifiers missing from the attribute list, and referred targets
        that resolve neither inside the batch nor in the already registered
        schema all fail with nothing applied.
        """
        existing = set(self.gcs_entities())
        batch_names: set[str] = set()
        for entity in entities:
            if not _ident_ok(entity.name):
                raise ValueError(f"entity name {entity.name!r} is not an identifier")
            if entity.name in existing or entity.name in batch_names:
                raise DuplicateEntity(f"entity {entity.name!r} already registered")
            batch_names.add(entity.name)
            self._check_dataset_def(entity)

        known_attrs = {
            (e, a)
            for e in existing
            for a in self.gcs_attributes(e)
        }
        for entity in entities:
            for attr in entity.attributes:
                known_attrs.add((entity.name, attr.name))
        for entity in entities:
            local_names = {a.name for a in entity.attributes}
            for local_attr, target in entity.referred:
                if local_attr not in local_names:
                    raise UnknownReferredTarget(
                        f"referred source {entity.name}.{local_attr} is not an attribute"
                    )
                t_entity, t_attr = _split_qualified(target, "referred target")
                if (t_entity, t_attr) not in known_attrs:
                    raise UnknownReferredTarget(f"referred target {target!r} unknown")

        context = self._ensure_context(GCS_CONTEXT)
        for entity in entities:
            entity_node = self._add(
                Node(self.entity_id(entity.name), NodeKind.DATASET_SCHEMA),
                context,
                entity.name,
            )
            self._register_attributes(
                entity.attributes,
                entity.identifier,
                dataset_node=entity_node,
                attr_id=lambda a, e=entity.name: self.gcs_attr_id(e, a),
                context=context,
                store_node=None,
            )
        for entity in entities:
            for local_attr, target in entity.referred:
                t_entity, t_attr = _split_qualified(target, "referred target")
                self.catalog.add_link(
                    self.gcs_attr_id(entity.name, local_attr),
                    "referred",
                    NodeRef(self.gcs_attr_id(t_entity, t_attr)),
                    context=context,
                )

    def _check_dataset_def(self, dataset: DatasetSchemaDef) -> None:
        names: set[str] = set()
        for attr in dataset.attributes:
            if not _ident_ok(attr.name):
                raise ValueError(f"attribute name {attr.name!r} is not an identifier")
            for spelled in (attr.name, *attr.aka):
                if spelled in names:
                    raise ValueError(
                        f"attribute name {spelled!r} repeats in {dataset.name!r}"
                    )
                names.add(spelled)
        if dataset.identifier not in {a.name for a in dataset.attributes}:
            raise MissingIdentifier(
                f"identifier {dataset.identifier!r} is not an attribute of {dataset.name!r}"
            )
        by_name = {a.name: a for a in dataset.attributes}
        if by_name[dataset.identifier].complex:
            raise ValueError(f"identifier {dataset.identifier!r} must not be complex")

    def _register_attributes(
        self,
        attributes: Sequence[AttributeDef],
        identifier: Optional[str],
        dataset_node: str,
        attr_id,
        context: str,
        store_node: Optional[str],
    ) -> None:
        for pos, attr in enumerate(attributes):
            props: dict = {"pos": pos}
            if attr.complex:
                props["complex"] = True
            if attr.aka:
                props["aka"] = ",".join(attr.aka)
            node_id = self._add(
                Node(attr_id(attr.name), NodeKind.ATTRIBUTE, props), context, attr.name
            )
            self.catalog.add_link(
                node_id, "isAttributeOf", NodeRef(dataset_node), context=context
            )
            if store_node is not None:
                self.catalog.add_link(
                    node_id, "isStoredInStore", NodeRef(store_node), context=context
                )
            if identifier is not None and attr.name == identifier:
                self.catalog.add_link(
                    node_id, "isIdentifierOf", NodeRef(dataset_node), context=context
                )
            for mpos, member in enumerate(attr.members):
                member_node = self._add(
                    Node(f"{node_id}.{_q(member.name)}", NodeKind.ATTRIBUTE, {"pos": mpos}),
                    context,
                    member.name,
                )
                self.catalog.add_link(
                    member_node, "isMemberOfComplexAttribute", NodeRef(node_id),
                    context=context,
                )

    def register_lcs(self, desc: DataStoreDescriptor) -> None:
        """Register one data store's full schema hierarchy."""
        if self.has_store(desc.name):
            raise DuplicateStore(f"store {desc.name!r} already registered")
        seen_dbs: set[str] = set()
        dataset_names: set[str] = set()
        for db in desc.databases:
            if db.name in seen_dbs:
                raise ValueError(f"database {db.name!r} repeats in {desc.name!r}")
            seen_dbs.add(db.name)
            seen_schemas: set[str] = set()
            for schema in db.schemas:
                if schema.name in seen_schemas:
                    raise ValueError(f"schema {schema.name!r} repeats in {db.name!r}")
                seen_schemas.add(schema.name)
                for dataset in schema.datasets:
                    if not _ident_ok(dataset.name):
                        raise ValueError(
                            f"dataset name {dataset.name!r} is not an identifier"
                        )
                    if dataset.name in dataset_names:
                        raise ValueError(
                            f"dataset {dataset.name!r} repeats in store {desc.name!r}"
                        )
                    dataset_names.add(dataset.name)
                    self._check_dataset_def(dataset)

        context = self._ensure_context(self.store_context(desc.name))
        machine_node = f"hk://id/machine/{_q(desc.machine)}"
        if not self.catalog.has_node(machine_node):
            self._add(Node(machine_node, NodeKind.MACHINE), context, desc.machine)
        else:
            self.catalog.add_to_context(context, machine_node)
        store_node = self._add(
            Node(
                self.store_id(desc.name),
                NodeKind.DATA_STORE,
                {"kind": desc.store_kind.value},
            ),
            context,
            desc.name,
        )
        self.catalog.add_link(store_node, "wasRunOn", NodeRef(machine_node), context=context)
        for db in desc.databases:
            db_node = self._add(
                Node(f"hk://id/db/{_q(desc.name)}/{_q(db.name)}", NodeKind.DATABASE),
                context,
                db.name,
            )
            self.catalog.add_link(db_node, "isInStore", NodeRef(store_node), context=context)
            for schema in db.schemas:
                schema_node = self._add(
                    Node(
                        f"hk://id/dbschema/{_q(desc.name)}/{_q(db.name)}/{_q(schema.name)}",
                        NodeKind.DATABASE_SCHEMA,
                    ),
                    context,
                    schema.name,
                )
                self.catalog.add_link(
                    schema_node, "isSchemaOf", NodeRef(db_node), context=context
                )
                for dataset in schema.datasets:
                    dataset_node = self._add(
                        Node(
                            self.dataset_id(desc.name, dataset.name),
                            NodeKind.DATASET_SCHEMA,
                        ),
                        context,
                        dataset.name,
                    )
                    self.catalog.add_link(
                        dataset_node, "isDataSchemaOf", NodeRef(schema_node),
                        context=context,
                    )
                    self._register_attributes(
                        dataset.attributes,
                        dataset.identifier,
                        dataset_node=dataset_node,
                        attr_id=lambda a, s=desc.name, d=dataset.name: self.lcs_attr_id(s, d, a),
                        context=context,
                        store_node=store_node,
                    )

    def create_alias(self, mapping: AliasMapping) -> None:
        """Link a local attribute to the global attribute it realizes."""
        gcs_node = self._find_gcs_attr(mapping.gcs_attr)
        if gcs_node is None:
            raise UnknownAttribute(f"global attribute {mapping.gcs_attr!r} unknown")
        dataset, attr = _split_qualified(mapping.lcs_attr, "local attribute")
        lcs_node = self.lcs_attr_id(mapping.store, dataset, attr)
        if not self.catalog.has_node(lcs_node):
            raise UnknownAttribute(
                f"local attribute {mapping.lcs_attr!r} unknown in store {mapping.store!r}"
            )
        self.catalog.add_link(
            lcs_node, "alias", NodeRef(gcs_node), context=self.store_context(mapping.store)
        )

    # -- resolution ----------------------------------------------------------

    def _find_gcs_attr(self, qualified: str) -> Optional[str]:
        entity, attr = _split_qualified(qualified, "global attribute")
        node_id = self.gcs_attr_id(entity, attr)
        if self.catalog.has_node(node_id):
            return node_id
        # fall back to alternate spellings
        entity_node = self.entity_id(entity)
        if not self.catalog.has_node(entity_node):
            return None
        for candidate in self.catalog.subjects("isAttributeOf", NodeRef(entity_node)):
            aka = self.catalog.node(candidate).properties.get("aka", "")
            if attr in aka.split(","):
                return candidate
        return None

    def resolve_attribute(self, gcs_attr: str) -> list[AttributeRef]:
        """Return every local attribute aliased to a global attribute.

        Results are sorted by (store, dataset, attribute) so callers get a
        stable order.
        """
        node_id = self._find_gcs_attr(gcs_attr)
        if node_id is None:
            raise UnknownAttribute(f"global attribute {gcs_attr!r} unknown")
        refs = [
            self.attribute_ref(subject)
            for subject in self.catalog.subjects("alias", NodeRef(node_id))
        ]
        refs.sort(key=lambda r: (r.store, r.dataset, r.attribute))
        return refs

    def attribute_ref(self, attr_node: str) -> AttributeRef:
        """Describe a local attribute node as an :class:`AttributeRef`."""
        stores = self.catalog.objects(attr_node, "isStoredInStore")
        datasets = self.catalog.objects(attr_node, "isAttributeOf")
        if not stores or not datasets:
            raise UnknownAttribute(f"{attr_node!r} is not a local attribute node")
        store_name = self._name_of(stores[0].id)
        dataset_name = self._name_of(datasets[0].id)
        attr_name = self._name_of(attr_node)
        is_identifier = bool(self.catalog.objects(attr_node, "isIdentifierOf"))
        return AttributeRef(store_name, dataset_name, attr_name, is_identifier)

    def _name_of(self, node_id: str) -> str:
        names = self.catalog.objects(node_id, "name")
        if names:
            return names[0]
        # every registered node carries a name link; fall back for robustness
        return unquote(node_id.rsplit("/", 1)[-1])

    def identifier_of(self, store: str, dataset: str) -> str:
        dataset_node = self.dataset_id(store, dataset)
        if not self.catalog.has_node(dataset_node):
            raise UnknownDataset(f"dataset {dataset!r} unknown in store {store!r}")
        for subject in self.catalog.subjects("isIdentifierOf", NodeRef(dataset_node)):
            return self._name_of(subject)
        raise MissingIdentifier(f"dataset {dataset!r} has no identifier attribute")

    def lcs_attribute_node(self, dataset: str, attribute: str) -> list[str]:
        """Find local attribute nodes by dataset-qualified name, across stores."""
        found = []
        for store in self.stores():
            node_id = self.lcs_attr_id(store, dataset, attribute)
            if self.catalog.has_node(node_id):
                found.append(node_id)
        return found

    # -- views ---------------------------------------------------------------

    def gcs_entities(self) -> list[str]:
        if not self.catalog.has_node(GCS_CONTEXT):
            return []
        return sorted(
            self._name_of(n.id)
            for n in self.catalog.nodes(NodeKind.DATASET_SCHEMA)
            if n.id.startswith("hk://id/gcs/")
        )

    def has_gcs_entity(self, entity: str) -> bool:
        return self.catalog.has_node(self.entity_id(entity))

    def gcs_attributes(self, entity: str) -> list[str]:
        entity_node = self.entity_id(entity)
        if not self.catalog.has_node(entity_node):
            raise UnknownDataset(f"entity {entity!r} unknown")
        attrs = list(self.catalog.subjects("isAttributeOf", NodeRef(entity_node)))
        attrs.sort(key=lambda a: self.catalog.node(a).properties.get("pos", 0))
        return [self._name_of(a) for a in attrs]

    def gcs_attribute_node(self, entity: str, attr: str) -> Optional[str]:
        return self._find_gcs_attr(f"{entity}.{attr}")

    def is_complex(self, entity: str, attr: str) -> bool:
        node_id = self._find_gcs_attr(f"{entity}.{attr}")
        if node_id is None:
            raise UnknownAttribute(f"global attribute {entity}.{attr} unknown")
        return bool(self.catalog.node(node_id).properties.get("complex", False))

    def stores(self) -> list[str]:
        return sorted(
            self._name_of(n.id)
            for n in self.catalog.nodes(NodeKind.DATA_STORE)
        )

    def has_store(self, store: str) -> bool:
        return self.catalog.has_node(self.store_id(store))

    def store_kind(self, store: str) -> StoreKind:
        node_id = self.store_id(store)
        if not self.catalog.has_node(node_id):
            raise UnknownDataset(f"store {store!r} unknown")
        return _STORE_KIND_BY_NAME[self.catalog.node(node_id).properties["kind"]]

    def datasets_of(self, store: str) -> list[str]:
        if not self.has_store(store):
            raise UnknownDataset(f"store {store!r} unknown")
        prefix = f"hk://id/lcs/{_q(store)}/"
        return sorted(
            self._name_of(n.id)
            for n in self.catalog.nodes(NodeKind.DATASET_SCHEMA)
            if n.id.startswith(prefix)
        )

    def attributes_of(self, store: str, dataset: str) -> list[str]:
        dataset_node = self.dataset_id(store, dataset)
        if not self.catalog.has_node(dataset_node):
            raise UnknownDataset(f"dataset {dataset!r} unknown in store {store!r}")
        attrs = list(self.catalog.subjects("isAttributeOf", NodeRef(dataset_node)))
        attrs.sort(key=lambda a: self.catalog.node(a).properties.get("pos", 0))
        return [self._name_of(a) for a in attrs]
