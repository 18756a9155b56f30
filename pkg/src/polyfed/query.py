"""Global query language: parsing, rendering, validation.

The language is the minimal closure over what the mediator needs: a
projection list of entity-qualified attributes, one subject entity, the
workflow whose executions scope the data, and conjunctive comparison
filters::

    select Seismic.inline, Seismic.crossline,
    Seismic.hasWell, Seismic.hasHorizon, Seismic.epsg
    where Seismic from geological_data_ingestion_workflow
    and Seismic.name = "Netherlands"

Keywords (``select``, ``where``, ``from``, ``and``) are case-insensitive and
reserved; identifiers are case-sensitive. Literals are double-quoted strings
or numbers. Every qualified name must use the subject entity declared in the
``where`` clause.

``parse`` is total: any input either produces a :class:`GlobalQuery` or
raises exactly one :class:`~polyfed.errors.ParseError` carrying a 1-based
line/column position, the expected token set, and what was found instead.
``render`` emits the canonical single-space form, and ``parse(render(q))``
returns ``q``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

from .errors import ParseError, UnknownAttribute, UnknownEntity, UnknownWorkflow

__all__ = ["Filter", "GlobalQuery", "OPERATORS", "parse", "render", "validate"]

OPERATORS = ("=", "!=", "<", "<=", ">", ">=")

_KEYWORDS = frozenset({"select", "where", "from", "and"})

Literal = Union[str, int, float]


@dataclass(frozen=True)
class Filter:
    attribute: str
    op: str
    value: Literal

    def __post_init__(self):
        if self.op not in OPERATORS:
            raise ValueError(f"unknown operator {self.op!r}")
        if isinstance(self.value, bool) or not isinstance(self.value, (str, int, float)):
            raise TypeError("filter literals are strings or numbers")
        if isinstance(self.value, float) and not math.isfinite(self.value):
            raise ValueError("filter literals must be finite")


@dataclass(frozen=True)
class GlobalQuery:
    projections: tuple[str, ...]
    entity: str
    workflow: str
    filters: tuple[Filter, ...] = ()


# -- tokenizer -------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    type: str  # ident, number, string, op, comma, dot, eof
    value: object
    line: int
    column: int


def _describe(token: _Token) -> str:
    if token.type == "eof":
        return "end of input"
    if token.type == "ident":
        return f"{token.value!r}"
    if token.type == "number":
        return f"number {token.value}"
    if token.type == "string":
        return f"string {json.dumps(token.value)}"
    return f"{token.value!r}"


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            is_float = False
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            raw = text[i:j]
            value: Literal = float(raw) if is_float else int(raw)
            tokens.append(_Token("number", value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            out = []
            while j < n:
                c = text[j]
                if c == "\\" and j + 1 < n and text[j + 1] in ('"', "\\"):
                    out.append(text[j + 1])
                    j += 2
                    continue
                if c == '"':
                    break
                if c == "\n":
                    raise ParseError(
                        start_line, start_col, ("a closing '\"'",), "end of line"
                    )
                out.append(c)
                j += 1
            else:
                raise ParseError(
                    start_line, start_col, ("a closing '\"'",), "end of input"
                )
            tokens.append(_Token("string", "".join(out), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch == ",":
            tokens.append(_Token("comma", ",", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == ".":
            tokens.append(_Token("dot", ".", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch in "<>":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(_Token("op", ch + "=", start_line, start_col))
                i += 2
                col += 2
            else:
                tokens.append(_Token("op", ch, start_line, start_col))
                i += 1
                col += 1
            continue
        if ch == "=":
            tokens.append(_Token("op", "=", start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == "!":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(_Token("op", "!=", start_line, start_col))
                i += 2
                col += 2
                continue
            raise ParseError(start_line, start_col, ("'!='",), "'!'")
        raise ParseError(start_line, start_col, ("a token",), f"{ch!r}")
    tokens.append(_Token("eof", None, line, col))
    return tokens


# -- parser --------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> _Token:
        return self._tokens[self._pos]

    def _advance(self) -> _Token:
        token = self._tokens[self._pos]
        if token.type != "eof":
            self._pos += 1
        return token

    def _error(self, token: _Token, *expected: str) -> ParseError:
        return ParseError(token.line, token.column, expected, _describe(token))

    def _is_keyword(self, token: _Token, word: str) -> bool:
        return token.type == "ident" and str(token.value).lower() == word

    def _expect_keyword(self, word: str) -> None:
        token = self._peek()
        if not self._is_keyword(token, word):
            raise self._error(token, f"'{word}'")
        self._advance()

    def _ident(self, what: str) -> _Token:
        token = self._peek()
        if token.type != "ident":
            raise self._error(token, what)
        if str(token.value).lower() in _KEYWORDS:
            raise self._error(token, what)
        return self._advance()

    def _qualified(self) -> tuple[str, _Token]:
        head = self._ident("an identifier")
        token = self._peek()
        if token.type != "dot":
            raise self._error(token, "'.'")
        self._advance()
        tail = self._ident("an attribute name")
        return f"{head.value}.{tail.value}", head

    def query(self) -> GlobalQuery:
        self._expect_keyword("select")
        projections = [self._qualified()]
        while self._peek().type == "comma":
            self._advance()
            projections.append(self._qualified())
        self._expect_keyword("where")
        entity = self._ident("an entity name")
        for qualified, head in projections:
            if str(head.value) != entity.value:
                raise ParseError(
                    head.line,
                    head.column,
                    (f"an attribute of {entity.value!r}",),
                    repr(qualified),
                )
        self._expect_keyword("from")
        workflow = self._ident("a workflow name")
        filters = []
        while True:
            token = self._peek()
            if token.type == "eof":
                break
            if not self._is_keyword(token, "and"):
                raise self._error(token, "'and'", "end of input")
            self._advance()
            filters.append(self._filter(str(entity.value)))
        return GlobalQuery(
            projections=tuple(q for q, _ in projections),
            entity=str(entity.value),
            workflow=str(workflow.value),
            filters=tuple(filters),
        )

    def _filter(self, entity: str) -> Filter:
        qualified, head = self._qualified()
        if str(head.value) != entity:
            raise ParseError(
                head.line,
                head.column,
                (f"an attribute of {entity!r}",),
                repr(qualified),
            )
        token = self._peek()
        if token.type != "op":
            raise self._error(token, "a comparison operator")
        op = str(self._advance().value)
        literal = self._peek()
        if literal.type not in ("string", "number"):
            raise self._error(literal, "a string or number literal")
        self._advance()
        return Filter(qualified, op, literal.value)


def parse(text: str) -> GlobalQuery:
    """Parse query text into a :class:`GlobalQuery`.

    Raises ParseError with a 1-based position on any malformed input.
    """
    return _Parser(_tokenize(text)).query()


def _render_literal(value: Literal) -> str:
    if isinstance(value, str):
        # escape exactly what the tokenizer decodes, leaving every other
        # character raw, so rendering round-trips
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(query: GlobalQuery) -> str:
    """Render the canonical single-space text form of a query."""
    parts = [
        "select ",
        ", ".join(query.projections),
        f" where {query.entity} from {query.workflow}",
    ]
    for f in query.filters:
        parts.append(f" and {f.attribute} {f.op} {_render_literal(f.value)}")
    return "".join(parts)


def validate(query: GlobalQuery, registry, provenance) -> None:
    """Check a parsed query against the registered schemas and workflows.

    Raises UnknownEntity, UnknownAttribute, or UnknownWorkflow.
    """
    if not registry.has_gcs_entity(query.entity):
        raise UnknownEntity(f"entity {query.entity!r} is not in the global schema")
    seen = list(query.projections) + [f.attribute for f in query.filters]
    for qualified in seen:
        attr = qualified.partition(".")[2]
        if registry.gcs_attribute_node(query.entity, attr) is None:
            raise UnknownAttribute(
                f"attribute {qualified!r} is not in the global schema"
            )
    if not provenance.has_workflow(query.workflow):
        raise UnknownWorkflow(f"workflow {query.workflow!r} has no recorded provenance")
