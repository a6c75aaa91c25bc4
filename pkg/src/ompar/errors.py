"""Exception types shared across the ompar pipeline.

Each stage raises a small, named set of errors so callers (and the CLI) can
map failures to exit codes without string matching.
"""

from __future__ import annotations


class CSyntaxError(SyntaxError):
    """Structurally broken source: unbalanced braces/parens or a malformed
    for-header.  Anything merely *outside the subset* does not raise — it
    degrades to an opaque statement instead."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class AnchorError(Exception):
    """An edit references a span that is not a node of the unit it edits."""


class RewriteConflict(Exception):
    """Two requested rewrites touch overlapping byte ranges."""


class NotScalarizable(Exception):
    """Accumulator scalarization preconditions do not hold for the cell."""


class MalformedPlan(Exception):
    """No well-formed plan object could be extracted from a response."""


class UnknownLoopId(KeyError):
    """A plan references a loop id absent from the analysis report."""

    def __str__(self) -> str:  # KeyError quotes its arg; keep messages readable
        return self.args[0] if self.args else ""


class ReasonerExhausted(Exception):
    """All retry attempts produced malformed plans."""


class EndpointError(Exception):
    """The HTTP backend could not be reached or returned garbage transport."""


class CompileError(Exception):
    """A build failed; carries the compiler diagnostics."""

    def __init__(self, message: str, diagnostics: str = ""):
        super().__init__(message)
        self.diagnostics = diagnostics


class ToolchainMissing(Exception):
    """No usable C compiler was found on the host."""


class RuntimeFailure(Exception):
    """A compiled binary crashed, timed out, or broke the output contract."""


class OracleOverflow(Exception):
    """The brute-force oracle's state space exceeds configured limits."""


class ConfigError(Exception):
    """Invalid configuration (CLI flags, config file, or reasoner settings)."""
