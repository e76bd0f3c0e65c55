"""Errors surfaced to the command line as exit code 1."""


class PipelineError(Exception):
    """Base class for all user-facing pipeline failures."""


class IngestError(PipelineError):
    """Malformed or inconsistent input tables."""


class ConfigError(PipelineError):
    """Invalid run configuration."""


class GraphFormatError(PipelineError):
    """Unreadable or wrong-version graph file."""
