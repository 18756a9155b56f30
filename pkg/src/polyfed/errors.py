"""Exception hierarchy shared across the package.

Every error raised by polyfed derives from :class:`PolyfedError` so callers
(the HTTP service, the CLI) can map failures to status codes / exit codes in
one place without enumerating module internals.
"""

from __future__ import annotations


class PolyfedError(Exception):
    """Base class for all polyfed errors."""


# --- catalog ---------------------------------------------------------------

class DuplicateId(PolyfedError):
    """A node with this id already exists."""


class UnknownNode(PolyfedError):
    """A link endpoint does not resolve to an existing node."""


class UnknownContext(PolyfedError):
    """The referenced context node does not exist or is not a Context."""


class ContextCycle(PolyfedError):
    """Adding this membership would make context nesting cyclic."""


class DuplicateTriple(PolyfedError):
    """The (subject, predicate, object) triple is already present."""


class IoFailure(PolyfedError):
    """Reading or writing a catalog file failed at the OS level."""


class ParseFailure(PolyfedError):
    """A persisted catalog file is malformed.

    Carries the 1-based line number of the offending record.
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


# --- schema registry --------------------------------------------------------

class DuplicateEntity(PolyfedError):
    """A global entity with this name is already registered."""


class DuplicateStore(PolyfedError):
    """A data store with this name is already registered."""


class UnknownReferredTarget(PolyfedError):
    """A referred declaration points at an unregistered global attribute."""


class UnknownAttribute(PolyfedError):
    """The named attribute is not registered."""


class UnknownDataset(PolyfedError):
    """The named dataset schema is not registered."""


class MissingIdentifier(PolyfedError):
    """The dataset has no identifier attribute."""


# --- provenance --------------------------------------------------------------

class UnknownWorkflow(PolyfedError):
    """The named workflow has never been registered or executed."""


class UnknownExecution(PolyfedError):
    """No workflow execution with this id exists."""


class ClosedExecution(PolyfedError):
    """The workflow execution has already ended."""


class UnresolvableAttribute(PolyfedError):
    """A captured attribute name does not resolve to a local attribute."""


class MissingReference(PolyfedError):
    """A requested store has no captured identifier value for an execution."""

    def __init__(self, store: str, execution: str):
        super().__init__(
            f"no data reference for store {store!r} in execution {execution!r}"
        )
        self.store = store
        self.execution = execution


class AmbiguousReference(PolyfedError):
    """An execution captured conflicting identifier values for one store."""


# --- query language -----------------------------------------------------------

class ParseError(PolyfedError):
    """Query text is not valid.

    Positions are 1-based. ``expected`` is the set of token descriptions the
    parser would have accepted; ``found`` describes what was actually there.
    """

    def __init__(self, line: int, column: int, expected: tuple[str, ...], found: str):
        exp = " or ".join(expected)
        super().__init__(f"{line}:{column}: expected {exp}, found {found}")
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found


class UnknownEntity(PolyfedError):
    """The queried entity is not part of the global schema."""


# --- planner -------------------------------------------------------------------

class UnmappedAttribute(PolyfedError):
    """A queried global attribute has no alias mapping to any store."""


class AmbiguousMapping(PolyfedError):
    """A projected global attribute maps to more than one local attribute."""


class ComplexAttributeProjection(PolyfedError):
    """Complex attributes are registered but cannot be projected."""


class NoExecutions(PolyfedError):
    """The workflow has no captured executions, so the constant table is empty."""


# --- federation ------------------------------------------------------------------

class MissingAdapter(PolyfedError):
    """No store adapter is registered for a store required by the plan."""
