"""Store adapters: uniform scan access to heterogeneous in-process stores.

Each adapter wraps one store kind behind the same contract:

    scan(dataset, projection, filters) -> list of row tuples

Rows come back projected in the requested order. An adapter that claims
filter pushdown applies the filters itself; one that does not simply ignores
them, and the executor filters after the scan. Results must be identical
either way.

Scalar comparison is type-strict: equality never coerces across value
families (``1`` matches neither ``"1"`` nor ``True``), ordering comparisons
work within the numeric family (int/float) and between strings, and any
cross-family ordering test is simply false rather than an error, mirroring
how a federated mediator treats incomparable remote values.

Fixture formats, one directory per store:

* relational tables: CSV with a typed header (``id:int,name:str,...``)
* document collections: JSON lines, flat objects
* triples: ``subject predicate object`` lines, where the object is a JSON
  scalar or a bare resource token; ``type`` predicates declare dataset
  membership
* file metadata: manifest lines ``dataset path size``
"""

from __future__ import annotations

import csv
import json
from abc import ABC, abstractmethod
from typing import Iterable, Sequence

from .catalog import Scalar, typed_key
from .errors import UnknownAttribute, UnknownDataset

__all__ = [
    "DocumentStore",
    "FileMetaStore",
    "RelationalStore",
    "StoreAdapter",
    "TripleStore",
    "matches",
]

Row = tuple


def matches(value: Scalar, op: str, literal: Scalar) -> bool:
    """Evaluate one comparison the way every adapter and the executor do."""
    if op == "=":
        return typed_key(value) == typed_key(literal)
    if op == "!=":
        return typed_key(value) != typed_key(literal)
    # ordering: numbers compare with numbers, strings with strings
    value_is_num = isinstance(value, (int, float)) and not isinstance(value, bool)
    literal_is_num = isinstance(literal, (int, float)) and not isinstance(literal, bool)
    if value_is_num and literal_is_num:
        pass
    elif isinstance(value, str) and isinstance(literal, str):
        pass
    else:
        return False
    if op == "<":
        return value < literal
    if op == "<=":
        return value <= literal
    if op == ">":
        return value > literal
    if op == ">=":
        return value >= literal
    raise ValueError(f"unknown operator {op!r}")


def _apply_filters(record: dict, filters) -> bool:
    return all(matches(record[f.attribute], f.op, f.value) for f in filters)


class StoreAdapter(ABC):
    """Base contract shared by all store kinds."""

    def __init__(self, name: str, supports_pushdown: bool):
        self.name = name
        self.supports_pushdown = supports_pushdown
        self._declared: dict[str, list[str]] = {}

    def declare_columns(self, dataset: str, columns: Sequence[str]) -> None:
        """Declare a dataset's schema up front.

        Lets an empty dataset scan as zero rows instead of being unknown,
        which is what a freshly provisioned store looks like.
        """
        self._declared[dataset] = list(columns)

    def _merge_declared(self, dataset: str, observed: Iterable[str]) -> list[str]:
        merged = list(self._declared.get(dataset, ()))
        for column in observed:
            if column not in merged:
                merged.append(column)
        return merged

    @abstractmethod
    def datasets(self) -> list[str]:
        ...

    @abstractmethod
    def columns(self, dataset: str) -> list[str]:
        ...

    @abstractmethod
    def _records(self, dataset: str) -> Iterable[dict]:
        """Yield complete records of the dataset as attribute -> value maps."""

    def _check(self, dataset: str, projection: Sequence[str]) -> None:
        if dataset not in self.datasets():
            raise UnknownDataset(f"store {self.name!r} has no dataset {dataset!r}")
        known = set(self.columns(dataset))
        for attr in projection:
            if attr not in known:
                raise UnknownAttribute(
                    f"dataset {dataset!r} in store {self.name!r} has no attribute {attr!r}"
                )

    def scan(self, dataset: str, projection: Sequence[str], filters=()) -> list[Row]:
        """Project rows of a dataset, applying filters when pushdown is supported."""
        self._check(dataset, projection)
        if filters and self.supports_pushdown:
            self._check(dataset, [f.attribute for f in filters])
        rows = []
        for record in self._records(dataset):
            if filters and self.supports_pushdown and not _apply_filters(record, filters):
                continue
            rows.append(tuple(record[attr] for attr in projection))
        return rows


class RelationalStore(StoreAdapter):
    """Tables of named, typed columns. Pushes filters down."""

    def __init__(self, name: str, pushdown: bool = True):
        super().__init__(name, pushdown)
        self._tables: dict[str, tuple[list[str], list[dict]]] = {}

    def add_table(self, dataset: str, columns: Sequence[str], rows: Iterable[Sequence[Scalar]]):
        columns = list(columns)
        records = []
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row arity {len(row)} != {len(columns)} in {dataset!r}")
            records.append(dict(zip(columns, row)))
        self._tables[dataset] = (columns, records)

    def load_csv(self, dataset: str, path) -> None:
        """Load a table from CSV with a ``name:type`` header."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            columns, kinds = [], []
            for cell in header:
                name, _, kind = cell.partition(":")
                columns.append(name)
                kinds.append(kind or "str")
            rows = []
            for raw in reader:
                if not raw:
                    continue
                rows.append([_coerce(v, k) for v, k in zip(raw, kinds)])
        self.add_table(dataset, columns, rows)

    def datasets(self) -> list[str]:
        return sorted(set(self._tables) | set(self._declared))

    def columns(self, dataset: str) -> list[str]:
        if dataset not in self._tables and dataset not in self._declared:
            raise UnknownDataset(f"store {self.name!r} has no dataset {dataset!r}")
        observed = self._tables[dataset][0] if dataset in self._tables else ()
        return self._merge_declared(dataset, observed)

    def _records(self, dataset: str) -> Iterable[dict]:
        return self._tables[dataset][1] if dataset in self._tables else ()


def _coerce(text: str, kind: str) -> Scalar:
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "bool":
        return text.strip().lower() in ("true", "1", "yes")
    if kind == "str":
        return text
    raise ValueError(f"unknown column type {kind!r}")


class DocumentStore(StoreAdapter):
    """Collections of flat documents. No pushdown: the mediator filters."""

    def __init__(self, name: str, pushdown: bool = False):
        super().__init__(name, pushdown)
        self._collections: dict[str, list[dict]] = {}

    def add_collection(self, dataset: str, documents: Iterable[dict]) -> None:
        self._collections[dataset] = [dict(d) for d in documents]

    def load_jsonl(self, dataset: str, path) -> None:
        documents = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    documents.append(json.loads(line))
        self.add_collection(dataset, documents)

    def datasets(self) -> list[str]:
        return sorted(set(self._collections) | set(self._declared))

    def columns(self, dataset: str) -> list[str]:
        if dataset not in self._collections and dataset not in self._declared:
            raise UnknownDataset(f"store {self.name!r} has no dataset {dataset!r}")
        keys: dict[str, None] = {}
        for doc in self._collections.get(dataset, ()):
            for key in doc:
                keys.setdefault(key)
        return self._merge_declared(dataset, keys)

    def _records(self, dataset: str) -> Iterable[dict]:
        # documents missing a projected field are simply not rows of that shape
        return self._collections.get(dataset, ())

    def scan(self, dataset: str, projection: Sequence[str], filters=()) -> list[Row]:
        self._check(dataset, projection)
        rows = []
        needed = set(projection) | ({f.attribute for f in filters} if self.supports_pushdown else set())
        for doc in self._records(dataset):
            if any(attr not in doc for attr in needed):
                continue
            if filters and self.supports_pushdown and not _apply_filters(doc, filters):
                continue
            rows.append(tuple(doc[attr] for attr in projection))
        return rows


class TripleStore(StoreAdapter):
    """Subject-predicate-object triples with class membership. Pushes down.

    A dataset is the set of subjects carrying ``(subject, type, dataset)``.
    Attribute values are the objects of ``(subject, attribute, value)``
    triples; the dataset's subject attribute (its identifier) is the subject
    token itself. A subject missing an attribute contributes no row; a
    multi-valued attribute multiplies rows.
    """

    def __init__(self, name: str, pushdown: bool = True):
        super().__init__(name, pushdown)
        self._triples: list[tuple[str, str, Scalar]] = []
        self._subject_attr: dict[str, str] = {}

    def declare_dataset(self, dataset: str, subject_attribute: str) -> None:
        self._subject_attr[dataset] = subject_attribute

    def add_triple(self, subject: str, predicate: str, obj: Scalar) -> None:
        self._triples.append((subject, predicate, obj))

    def load_triples(self, path) -> None:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split(maxsplit=2)
                if len(parts) != 3:
                    raise ValueError(f"malformed triple line: {line!r}")
                subject, predicate, token = parts
                try:
                    obj = json.loads(token)
                    if obj is None or not isinstance(obj, (bool, int, float, str)):
                        obj = token
                except (json.JSONDecodeError, ValueError):
                    obj = token
                self.add_triple(subject, predicate, obj)

    def datasets(self) -> list[str]:
        names = {o for _, p, o in self._triples if p == "type" and isinstance(o, str)}
        names.update(self._subject_attr)
        names.update(self._declared)
        return sorted(names)

    def _subjects(self, dataset: str) -> list[str]:
        seen: dict[str, None] = {}
        for s, p, o in self._triples:
            if p == "type" and o == dataset:
                seen.setdefault(s)
        return list(seen)

    def columns(self, dataset: str) -> list[str]:
        if dataset not in self.datasets():
            raise UnknownDataset(f"store {self.name!r} has no dataset {dataset!r}")
        subjects = set(self._subjects(dataset))
        preds: dict[str, None] = {}
        subject_attr = self._subject_attr.get(dataset)
        if subject_attr:
            preds.setdefault(subject_attr)
        for s, p, _ in self._triples:
            if s in subjects and p != "type":
                preds.setdefault(p)
        return self._merge_declared(dataset, preds)

    def _records(self, dataset: str) -> Iterable[dict]:
        subject_attr = self._subject_attr.get(dataset)
        for subject in self._subjects(dataset):
            values: dict[str, list[Scalar]] = {}
            if subject_attr:
                values[subject_attr] = [subject]
            for s, p, o in self._triples:
                if s == subject and p != "type":
                    values.setdefault(p, []).append(o)
            yield from _expand(values)

    def scan(self, dataset: str, projection: Sequence[str], filters=()) -> list[Row]:
        self._check(dataset, projection)
        rows = []
        for record in self._records(dataset):
            needed = set(projection) | ({f.attribute for f in filters} if self.supports_pushdown else set())
            if any(attr not in record for attr in needed):
                continue
            if filters and self.supports_pushdown and not _apply_filters(record, filters):
                continue
            rows.append(tuple(record[attr] for attr in projection))
        return rows


def _expand(values: dict[str, list[Scalar]]) -> Iterable[dict]:
    """Expand multi-valued attributes into one record per combination."""
    keys = list(values)
    def rec(i: int, acc: dict):
        if i == len(keys):
            yield dict(acc)
            return
        for v in values[keys[i]]:
            acc[keys[i]] = v
            yield from rec(i + 1, acc)
    yield from rec(0, {})


class FileMetaStore(StoreAdapter):
    """Path and size records per dataset, from a manifest. No pushdown."""

    COLUMNS = ("path", "size")

    def __init__(self, name: str, pushdown: bool = False):
        super().__init__(name, pushdown)
        self._records_by_dataset: dict[str, list[dict]] = {}

    def add_record(self, dataset: str, path: str, size: int) -> None:
        self._records_by_dataset.setdefault(dataset, []).append(
            {"path": path, "size": size}
        )

    def load_manifest(self, path) -> None:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 3:
                    raise ValueError(f"malformed manifest line: {line!r}")
                dataset, file_path, size = parts
                self.add_record(dataset, file_path, int(size))

    def datasets(self) -> list[str]:
        return sorted(set(self._records_by_dataset) | set(self._declared))

    def columns(self, dataset: str) -> list[str]:
        if dataset not in self._records_by_dataset and dataset not in self._declared:
            raise UnknownDataset(f"store {self.name!r} has no dataset {dataset!r}")
        return list(self.COLUMNS)

    def _records(self, dataset: str) -> Iterable[dict]:
        return self._records_by_dataset.get(dataset, ())
