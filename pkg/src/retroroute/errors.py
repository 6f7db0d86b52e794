"""Exception types shared across the toolkit."""

from __future__ import annotations


class SmilesSyntaxError(ValueError):
    """Malformed SMILES text: bad bracket, unknown element, unbalanced ring closure."""


class SchemaError(ValueError):
    """A data file does not match the expected schema."""


class CycleError(ValueError):
    """A route's molecule graph contains a cycle."""


class MissingRootError(KeyError):
    """A non-leaf product was rendered before its root was inherited."""


class ConfigError(ValueError):
    """A configuration violates its invariants."""


class DomainError(ValueError):
    """A numeric argument is outside its documented domain."""
