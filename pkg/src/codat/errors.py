"""Exception types shared across the package."""

from __future__ import annotations


class CodatError(Exception):
    """Base class for all operational errors raised by this package."""


class ValidationError(CodatError):
    """A domain object was constructed with invalid field values."""


class ConfigError(CodatError):
    """The project config file is malformed or contains unknown keys."""


class NoMatchingFiles(CodatError):
    """No file under the project root matches the configured extensions."""


class SnapshotMissing(CodatError):
    """No snapshot has been taken for this project root yet."""


class SnapshotCorrupt(CodatError):
    """Neither the current nor the rotated snapshot could be decoded."""


class ProjectRootMismatch(CodatError):
    """A diff was attempted between states of two different project roots."""


class UnknownNode(CodatError):
    """A node id or node selector did not resolve to any known node."""


class AmbiguousSelector(CodatError):
    """A node selector matched more than one node."""

    def __init__(self, selector: str, candidates: list[str]):
        self.selector = selector
        self.candidates = candidates
        listing = "\n  ".join(candidates)
        super().__init__(
            f"selector {selector!r} is ambiguous; candidates:\n  {listing}"
        )


class NothingToAcknowledge(CodatError):
    """The node has no active staleness finding to acknowledge."""


class EmptyRegion(CodatError):
    """The node is sketch-only: it has no linked code region to check."""


class MissingFixture(CodatError):
    """The replay backend has no stored response for this prompt hash."""


class MissingApiKey(CodatError):
    """The environment variable holding the HTTP backend key is unset."""


class CheckTimeout(CodatError):
    """The HTTP backend did not answer within the configured timeout."""


class TransportFailure(CodatError):
    """The HTTP backend could not be reached or returned a bad payload."""
