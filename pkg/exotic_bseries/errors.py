from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


class ExoticBSeriesError(Exception):
    """Base exception for exotic_bseries."""


class InputError(ExoticBSeriesError):
    """Bad user input: malformed trees, indices, spec files or settings."""


@dataclass(frozen=True)
class TreeSyntaxError(InputError):
    """Raised when a tree string does not conform to the tree grammar."""

    text: str
    position: int
    rule: str
    message: str

    def __str__(self) -> str:
        return f"invalid tree {self.text!r} at offset {self.position} (rule {self.rule}): {self.message}"


@dataclass(frozen=True)
class TreeStructureError(InputError):
    """Raised when a tree parses but violates the exotic decoration invariants."""

    message: str

    def __str__(self) -> str:
        return f"invalid exotic tree: {self.message}"


@dataclass(frozen=True)
class DegenerateTreeError(TreeStructureError):
    """Raised when paired beta-vertices share a root path or their identification closes a cycle."""

    def __str__(self) -> str:
        return f"degenerate exotic tree: {self.message}"


@dataclass(frozen=True)
class JetError(InputError):
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ModeError(JetError):
    """Raised when exact and floating scalars are mixed."""


@dataclass(frozen=True)
class MultiIndexError(InputError):
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class SizeGuardError(MultiIndexError):
    """Raised when the pairing oracle would exceed its leg budget."""


@dataclass(frozen=True)
class SpecFileError(InputError):
    """Raised when an SDE spec file cannot be read or does not match the schema."""

    path: Path | None
    message: str

    def __str__(self) -> str:
        where = str(self.path) if self.path is not None else "<inline>"
        return f"Invalid SDE spec in {where}: {self.message}"


@dataclass(frozen=True)
class McConfigError(InputError):
    message: str

    def __str__(self) -> str:
        return f"invalid Monte Carlo configuration: {self.message}"


class ConfigError(InputError):
    """Base exception for settings file parsing/validation errors."""


@dataclass(frozen=True)
class ConfigParseError(ConfigError):
    """Raised when a TOML file cannot be parsed."""

    path: Path
    message: str
    lineno: int | None = None
    colno: int | None = None

    def __str__(self) -> str:
        loc = ""
        if self.lineno is not None and self.colno is not None:
            loc = f" (line {self.lineno}, column {self.colno})"
        return f"Invalid TOML in {self.path}: {self.message}{loc}"


@dataclass(frozen=True)
class ConfigValidationError(ConfigError):
    """Raised when a parsed TOML file does not match the expected schema."""

    path: Path
    message: str

    def __str__(self) -> str:
        return f"Invalid config in {self.path}: {self.message}"


@dataclass(frozen=True)
class MethodDisagreement(ExoticBSeriesError):
    """Raised when two expansion methods produce different coefficients."""

    power: int
    left: str
    right: str
    methods: tuple[str, str]

    def __str__(self) -> str:
        a, b = self.methods
        return f"methods {a} and {b} disagree at t^{self.power}: {self.left} != {self.right}"
