"""Typed knowledge-graph catalog.

The catalog is the single physical home for every piece of metadata the
mediator works with: global and local schemas, alias mappings, and workflow
provenance. It is a small typed graph store:

* **Nodes** carry a fixed kind and a flat map of scalar properties.
* **Links** are (subject, predicate, object) triples. The object is either a
  reference to another node (wrapped in :class:`NodeRef`) or a scalar
  literal. Triples are unique and type-strict: the string literal
  ``"hk://id/x"`` and a reference to the node ``hk://id/x`` are different
  objects and never compare equal.
* **Contexts** group nodes and links for bookkeeping. They scope pattern
  matching when a context filter is supplied but never change triple
  semantics.

Pattern matching supports conjunctive triple templates with forward edges,
inverse edges, and a two-way alternation (a template with two edges matches
when either direction holds), which is exactly the traversal power the
mediator needs to walk from attribute values back to schemas and mappings.

Persistence is a line-oriented UTF-8 text format, one record per line::

    N <id> <kind> <json property map>
    L <subject> <predicate> <object>
    C <context-id> <member-id>

Node ids and predicates are whitespace-free tokens. A link object is either a
bare node id or a JSON scalar; node ids are required to not parse as JSON
scalars, which keeps the two readable from the same column. Files written by
:meth:`Catalog.save` list nodes first, then links, then context members, and
:meth:`Catalog.load` expects that order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from .errors import (
    ContextCycle,
    DuplicateId,
    DuplicateTriple,
    IoFailure,
    ParseFailure,
    UnknownContext,
    UnknownNode,
)

__all__ = [
    "Binding",
    "Catalog",
    "Edge",
    "Link",
    "Node",
    "NodeKind",
    "NodeRef",
    "Scalar",
    "Template",
    "Var",
    "typed_key",
]

Scalar = Union[str, int, float, bool]


class NodeKind(Enum):
    CONCEPT = "Concept"
    DATASET_SCHEMA = "DatasetSchema"
    ATTRIBUTE = "Attribute"
    DATA_STORE = "DataStore"
    DATABASE = "Database"
    DATABASE_SCHEMA = "DatabaseSchema"
    MACHINE = "Machine"
    WORKFLOW = "Workflow"
    DATA_TRANSFORMATION = "DataTransformation"
    WORKFLOW_EXECUTION = "WorkflowExecution"
    DATA_TRANSFORMATION_EXECUTION = "DataTransformationExecution"
    ATTRIBUTE_VALUE = "AttributeValue"
    CONTEXT = "Context"


_KIND_BY_NAME = {k.value: k for k in NodeKind}


@dataclass(frozen=True)
class NodeRef:
    """A node-valued link object.

    Wrapping node references keeps them distinct from string literals with
    the same characters.
    """

    id: str


@dataclass
class Node:
    id: str
    kind: NodeKind
    properties: dict[str, Scalar] = field(default_factory=dict)


@dataclass(frozen=True)
class Link:
    subject: str
    predicate: str
    object: Union[NodeRef, Scalar]


@dataclass(frozen=True)
class Var:
    """A variable position in a triple template."""

    name: str


@dataclass(frozen=True)
class Edge:
    """One traversal direction of a template.

    ``inverse=True`` matches the stored triple with subject and object roles
    swapped: template ``(S, ^p, O)`` matches the triple ``(O, p, S)``.
    """

    predicate: str
    inverse: bool = False


@dataclass(frozen=True)
class Template:
    """One conjunct of a pattern.

    ``subject`` is a variable or a fixed node id. ``object`` is a variable, a
    :class:`NodeRef`, or a scalar literal. ``edges`` holds one edge, or two
    for an alternation that matches when either edge does.
    """

    subject: Union[Var, str]
    edges: tuple[Edge, ...]
    object: Union[Var, NodeRef, Scalar]

    def __post_init__(self):
        if not 1 <= len(self.edges) <= 2:
            raise ValueError("a template takes one or two edges")


Binding = dict[str, Union[NodeRef, Scalar]]

Pattern = Sequence[Template]


def typed_key(value: Union[NodeRef, Scalar]) -> tuple[str, object]:
    """Return a comparison key that keeps value families apart.

    Booleans are kept out of the integer family and node references out of
    the string family, so ``1``, ``1.0``, ``True`` and ``"1"`` are four
    different keys.
    """
    if isinstance(value, NodeRef):
        return ("node", value.id)
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, int):
        return ("int", value)
    if isinstance(value, float):
        return ("float", value)
    if isinstance(value, str):
        return ("str", value)
    raise TypeError(f"unsupported value type: {type(value).__name__}")


def _check_scalar(value: object, what: str) -> None:
    if isinstance(value, bool) or isinstance(value, (int, str)):
        return
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError(f"{what} must be a finite number")
        return
    raise TypeError(f"{what} must be a string, integer, float, or boolean")


def _check_token(token: str, what: str) -> None:
    if not isinstance(token, str) or not token:
        raise ValueError(f"{what} must be a non-empty string")
    if any(ch.isspace() for ch in token):
        raise ValueError(f"{what} must not contain whitespace: {token!r}")


def _check_node_id(node_id: str) -> None:
    _check_token(node_id, "node id")
    try:
        decoded = json.loads(node_id)
    except (json.JSONDecodeError, ValueError):
        return
    if decoded is None or isinstance(decoded, (bool, int, float, str)):
        raise ValueError(
            f"node id {node_id!r} would be read back as a literal; "
            "use an id that does not parse as a JSON scalar"
        )


def compute_link_id(subject: str, predicate: str, obj: Union[NodeRef, Scalar]) -> str:
    tag, value = typed_key(obj)
    raw = "\x00".join((subject, predicate, tag, repr(value)))
    digest = hashlib.sha1(raw.encode("utf-8")).hexdigest()[:16]
    return f"hk://link/{digest}"


class Catalog:
    """In-memory typed graph with pattern matching and file persistence.

    Mutations must be serialized by the caller (single writer); reads may
    run concurrently against a :meth:`clone` snapshot.
    """

    def __init__(self):
        self._nodes: dict[str, Node] = {}
        # link id -> Link, insertion ordered
        self._links: dict[str, Link] = {}
        # (subject, predicate, typed object) -> link id
        self._triples: dict[tuple[str, str, tuple], str] = {}
        # (subject, predicate) -> [(object, link id)]
        self._by_sp: dict[tuple[str, str], list] = {}
        # (predicate, typed object) -> [(subject, link id)]
        self._by_po: dict[tuple[str, tuple], list] = {}
        # predicate -> [link id]
        self._by_p: dict[str, list[str]] = {}
        # context id -> ordered member ids (node or link ids)
        self._contexts: dict[str, list[str]] = {}

    # -- nodes ---------------------------------------------------------

    def add_node(self, node: Node, context: Optional[str] = None) -> str:
        """Add a node and return its id.

        Raises DuplicateId if the id is taken, UnknownContext if ``context``
        does not name an existing Context node.
        """
        _check_node_id(node.id)
        if not isinstance(node.kind, NodeKind):
            raise TypeError("node.kind must be a NodeKind")
        for key, value in node.properties.items():
            if not isinstance(key, str) or not key:
                raise ValueError("property keys must be non-empty strings")
            _check_scalar(value, f"property {key!r}")
        if node.id in self._nodes:
            raise DuplicateId(f"node {node.id!r} already exists")
        if context is not None:
            self._require_context(context)
        self._nodes[node.id] = node
        if node.kind is NodeKind.CONTEXT:
            self._contexts.setdefault(node.id, [])
        if context is not None:
            self._add_member(context, node.id)
        return node.id

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(f"no node {node_id!r}") from None

    def nodes(self, kind: Optional[NodeKind] = None) -> list[Node]:
        if kind is None:
            return list(self._nodes.values())
        return [n for n in self._nodes.values() if n.kind is kind]

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    # -- links ---------------------------------------------------------

    def add_link(
        self,
        subject: str,
        predicate: str,
        obj: Union[NodeRef, Scalar],
        context: Optional[str] = None,
    ) -> str:
        """Add a (subject, predicate, object) triple and return its link id.

        ``obj`` must be a :class:`NodeRef` for node-valued links; a plain
        string is stored as a string literal.
        """
        if subject not in self._nodes:
            raise UnknownNode(f"link subject {subject!r} does not exist")
        _check_token(predicate, "predicate")
        if isinstance(obj, NodeRef):
            if obj.id not in self._nodes:
                raise UnknownNode(f"link object {obj.id!r} does not exist")
        else:
            _check_scalar(obj, "link object")
        if context is not None:
            self._require_context(context)
        okey = typed_key(obj)
        tkey = (subject, predicate, okey)
        if tkey in self._triples:
            raise DuplicateTriple(
                f"triple ({subject!r}, {predicate!r}, {obj!r}) already exists"
            )
        link_id = compute_link_id(subject, predicate, obj)
        link = Link(subject, predicate, obj)
        self._links[link_id] = link
        self._triples[tkey] = link_id
        self._by_sp.setdefault((subject, predicate), []).append((obj, link_id))
        self._by_po.setdefault((predicate, okey), []).append((subject, link_id))
        self._by_p.setdefault(predicate, []).append(link_id)
        if context is not None:
            self._add_member(context, link_id)
        return link_id

    def links(self, predicate: Optional[str] = None) -> list[Link]:
        if predicate is None:
            return list(self._links.values())
        return [self._links[i] for i in self._by_p.get(predicate, ())]

    def has_link(self, link_id: str) -> bool:
        return link_id in self._links

    @property
    def link_count(self) -> int:
        return len(self._links)

    def objects(self, subject: str, predicate: str) -> tuple:
        """All objects of triples (subject, predicate, _), insertion ordered."""
        entries = self._by_sp.get((subject, predicate))
        if not entries:
            return ()
        return tuple(obj for obj, _ in entries)

    def subjects(self, predicate: str, obj: Union[NodeRef, Scalar]) -> tuple[str, ...]:
        """All subjects of triples (_, predicate, obj), insertion ordered."""
        entries = self._by_po.get((predicate, typed_key(obj)))
        if not entries:
            return ()
        return tuple(subj for subj, _ in entries)

    # -- contexts --------------------------------------------------------

    def _require_context(self, context: str) -> None:
        node = self._nodes.get(context)
        if node is None or node.kind is not NodeKind.CONTEXT:
            raise UnknownContext(f"no context {context!r}")

    def _add_member(self, context: str, member: str) -> None:
        members = self._contexts[context]
        if member not in members:
            members.append(member)

    def add_to_context(self, context: str, member: str) -> None:
        """Add an existing node or link to a context's membership."""
        self._require_context(context)
        if member not in self._nodes and member not in self._links:
            raise UnknownNode(f"no node or link {member!r} to add to context")
        member_node = self._nodes.get(member)
        if member_node is not None and member_node.kind is NodeKind.CONTEXT:
            if member == context or self._reaches(member, context):
                raise ContextCycle(
                    f"adding {member!r} to {context!r} would nest contexts cyclically"
                )
        self._add_member(context, member)

    def _reaches(self, start: str, target: str) -> bool:
        seen = set()
        stack = [start]
        while stack:
            current = stack.pop()
            if current == target:
                return True
            if current in seen:
                continue
            seen.add(current)
            stack.extend(m for m in self._contexts.get(current, ()) if m in self._contexts)
        return False

    def contexts(self) -> list[str]:
        return list(self._contexts)

    def context_members(self, context: str) -> tuple[str, ...]:
        self._require_context(context)
        return tuple(self._contexts[context])

    # -- pattern matching ---------------------------------------------------

    def match_pattern(
        self,
        pattern: Pattern,
        distinct: bool = False,
        order_by: Optional[Sequence[str]] = None,
        context: Optional[str] = None,
    ) -> list[Binding]:
        """Evaluate a conjunctive triple pattern.

        Returns one binding per solution. Results are ordered by the
        ``order_by`` variables when given, otherwise lexicographically by the
        bound values of all variables in order of first appearance, so output
        is deterministic. ``distinct=True`` removes duplicate bindings.
        ``context`` restricts matching to links that are direct members of
        that context.
        """
        if not pattern:
            raise ValueError("pattern must contain at least one template")
        allowed: Optional[frozenset[str]] = None
        if context is not None:
            self._require_context(context)
            allowed = frozenset(
                m for m in self._contexts[context] if m in self._links
            )

        var_order: list[str] = []
        for template in pattern:
            for position in (template.subject, template.object):
                if isinstance(position, Var) and position.name not in var_order:
                    var_order.append(position.name)
        if order_by is not None:
            unknown = [v for v in order_by if v not in var_order]
            if unknown:
                raise ValueError(f"order_by names unknown variables: {unknown}")

        solutions: list[Binding] = [{}]
        for template in pattern:
            extended: list[Binding] = []
            for binding in solutions:
                extended.extend(self._extend(template, binding, allowed))
            solutions = extended
            if not solutions:
                break

        if distinct:
            seen = set()
            unique = []
            for binding in solutions:
                key = tuple(typed_key(binding[v]) for v in var_order if v in binding)
                if key not in seen:
                    seen.add(key)
                    unique.append(binding)
            solutions = unique

        if order_by is not None:
            sort_vars = list(order_by) + [v for v in var_order if v not in order_by]
        else:
            sort_vars = var_order
        solutions.sort(
            key=lambda b: tuple(typed_key(b[v]) for v in sort_vars if v in b)
        )
        return solutions

    def _extend(
        self,
        template: Template,
        binding: Binding,
        allowed: Optional[frozenset[str]],
    ) -> list[Binding]:
        subject = template.subject
        if isinstance(subject, Var):
            bound = binding.get(subject.name)
            if bound is None:
                subject_id = None
            elif isinstance(bound, NodeRef):
                subject_id = bound.id
            else:
                return []  # a literal can never be a triple subject
        else:
            subject_id = subject

        obj = template.object
        if isinstance(obj, Var):
            obj_value = binding.get(obj.name)
        else:
            obj_value = obj

        extensions: dict[tuple, Binding] = {}
        for edge in template.edges:
            for s, o in self._edge_candidates(edge, subject_id, obj_value, allowed):
                new = dict(binding)
                if isinstance(subject, Var):
                    new[subject.name] = NodeRef(s)
                if isinstance(obj, Var):
                    new[obj.name] = o
                key = (s, typed_key(o))
                extensions.setdefault(key, new)
        return list(extensions.values())

    def _edge_candidates(
        self,
        edge: Edge,
        subject_id: Optional[str],
        obj_value,
        allowed: Optional[frozenset[str]],
    ) -> Iterable[tuple[str, Union[NodeRef, Scalar]]]:
        """Yield (pattern subject id, pattern object value) pairs for one edge."""
        if not edge.inverse:
            ts, to = subject_id, obj_value
        else:
            # Inverse: the stored triple runs object-to-subject.
            if obj_value is None:
                ts = None
            elif isinstance(obj_value, NodeRef):
                ts = obj_value.id
            else:
                return  # literal in a node position: no match possible
            to = NodeRef(subject_id) if subject_id is not None else None

        for s, o, link_id in self._triple_candidates(edge.predicate, ts, to):
            if allowed is not None and link_id not in allowed:
                continue
            if not edge.inverse:
                yield s, o
            else:
                if not isinstance(o, NodeRef):
                    continue  # pattern subject must be a node
                yield o.id, NodeRef(s)

    def _triple_candidates(self, predicate, ts, to):
        if ts is not None and to is not None:
            link_id = self._triples.get((ts, predicate, typed_key(to)))
            if link_id is not None:
                yield ts, to, link_id
        elif ts is not None:
            for o, link_id in self._by_sp.get((ts, predicate), ()):
                yield ts, o, link_id
        elif to is not None:
            for s, link_id in self._by_po.get((predicate, typed_key(to)), ()):
                yield s, to, link_id
        else:
            for link_id in self._by_p.get(predicate, ()):
                link = self._links[link_id]
                yield link.subject, link.object, link_id

    # -- persistence -----------------------------------------------------------

    def save(self, path) -> None:
        """Write the catalog to ``path`` in the line-oriented text format."""
        lines = []
        for node_id in sorted(self._nodes):
            node = self._nodes[node_id]
            props = json.dumps(
                node.properties, sort_keys=True, separators=(",", ":"), allow_nan=False
            )
            lines.append(f"N {node.id} {node.kind.value} {props}")
        for tkey in sorted(self._triples, key=lambda t: (t[0], t[1], t[2])):
            link = self._links[self._triples[tkey]]
            if isinstance(link.object, NodeRef):
                token = link.object.id
            else:
                token = json.dumps(link.object, allow_nan=False)
            lines.append(f"L {link.subject} {link.predicate} {token}")
        for context in sorted(self._contexts):
            for member in sorted(self._contexts[context]):
                lines.append(f"C {context} {member}")
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(lines))
                if lines:
                    fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Catalog":
        """Read a catalog saved by :meth:`save`.

        Raises ParseFailure with the 1-based line number of the first
        malformed record, IoFailure when the file cannot be read.
        """
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw_lines = fh.read().split("\n")
        except OSError as exc:
            raise IoFailure(f"cannot read {path}: {exc}") from exc

        catalog = cls()
        for line_no, line in enumerate(raw_lines, start=1):
            if not line.strip():
                continue
            record, _, rest = line.partition(" ")
            try:
                if record == "N":
                    catalog._load_node(rest)
                elif record == "L":
                    catalog._load_link(rest)
                elif record == "C":
                    catalog._load_member(rest)
                else:
                    raise ValueError(f"unknown record type {record!r}")
            except (DuplicateId, DuplicateTriple, UnknownNode, UnknownContext) as exc:
                raise ParseFailure(line_no, str(exc)) from exc
            except (ValueError, TypeError, json.JSONDecodeError) as exc:
                raise ParseFailure(line_no, str(exc)) from exc
        return catalog

    def _load_node(self, rest: str) -> None:
        parts = rest.split(maxsplit=2)
        if len(parts) != 3:
            raise ValueError("node record needs id, kind, and properties")
        node_id, kind_name, props_json = parts
        kind = _KIND_BY_NAME.get(kind_name)
        if kind is None:
            raise ValueError(f"unknown node kind {kind_name!r}")
        props = json.loads(props_json)
        if not isinstance(props, dict):
            raise ValueError("node properties must be a JSON object")
        self.add_node(Node(node_id, kind, props))

    def _load_link(self, rest: str) -> None:
        parts = rest.split(maxsplit=2)
        if len(parts) != 3:
            raise ValueError("link record needs subject, predicate, and object")
        subject, predicate, token = parts
        try:
            decoded = json.loads(token)
            is_literal = decoded is None or isinstance(decoded, (bool, int, float, str))
        except (json.JSONDecodeError, ValueError):
            is_literal = False
        if is_literal:
            if decoded is None:
                raise ValueError("link object literal must not be null")
            self.add_link(subject, predicate, decoded)
        else:
            self.add_link(subject, predicate, NodeRef(token))

    def _load_member(self, rest: str) -> None:
        parts = rest.split()
        if len(parts) != 2:
            raise ValueError("context record needs context id and member id")
        context, member = parts
        self.add_to_context(context, member)

    # -- snapshots -------------------------------------------------------------

    def clone(self) -> "Catalog":
        """Return an independent copy sharing no mutable state."""
        other = Catalog()
        for node in self._nodes.values():
            other._nodes[node.id] = Node(node.id, node.kind, dict(node.properties))
        other._links = dict(self._links)
        other._triples = dict(self._triples)
        other._by_sp = {k: list(v) for k, v in self._by_sp.items()}
        other._by_po = {k: list(v) for k, v in self._by_po.items()}
        other._by_p = {k: list(v) for k, v in self._by_p.items()}
        other._contexts = {k: list(v) for k, v in self._contexts.items()}
        return other
