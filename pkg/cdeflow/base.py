"""Core utilities shared by the cdeflow modules.

Rapports de vérification, contexte d'exécution et hiérarchie d'erreurs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Protocol

import pandas as pd


class CdeError(Exception):
    """Base class of every error raised by cdeflow."""

    exit_code: int = 1


class ValidationError(CdeError, ValueError):
    """Invalid input: bad dimensions, unmet preconditions, malformed specs."""

    exit_code = 2


class DimensionError(ValidationError):
    """A point or a vector does not match the dimensions of its family."""


class PreconditionError(ValidationError):
    """An operation was called outside of its domain (e.g. start point on B)."""


class ChartError(ValidationError):
    """The family has no chart on S_V (NonCritical) or the chart is malformed."""


class JumpDomainError(ValidationError):
    """No finite jump exists from the requested singular point."""


class ConstructionError(ValidationError):
    """A normal form or a spec could not be assembled as polynomials."""


class NumericalError(CdeError, RuntimeError):
    """A numerical procedure failed to deliver its contract."""

    exit_code = 3


class IntegrationError(NumericalError):
    """Step failure or step budget exhaustion during an integration."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})


class EventLocalizationError(NumericalError):
    """The event indicator does not change sign across the given bracket."""


@dataclass(slots=True)
class CheckReport:
    """Outcome of the checks attached to a computation.

    Messages are prefixed with ``ok:``, ``warning:`` or ``error:``; an error
    message marks the whole report as failed.
    """

    passed: bool = True
    messages: List[str] = field(default_factory=list)

    def add(self, message: str) -> None:
        self.messages.append(message)
        if message.lower().startswith("error"):
            self.passed = False

    def extend(self, other: "CheckReport") -> None:
        for message in other.messages:
            self.add(message)

    @property
    def warnings(self) -> List[str]:
        return [m for m in self.messages if m.lower().startswith("warning")]

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "messages": list(self.messages)}


@dataclass(slots=True)
class RunContext:
    """Metadata injected into each command of a run."""

    command: str
    output_dir: Optional[Path] = None
    seed: int = 42
    extra: Dict[str, object] = field(default_factory=dict)


@dataclass(slots=True)
class RunResult:
    """Artefacts produced by one command: tables, JSON payloads and checks."""

    frames: Dict[str, pd.DataFrame]
    payloads: Dict[str, Any]
    report: CheckReport
    metadata: Dict[str, object]


class Compute(Protocol):
    """Callable protocol for the computational part of a command."""

    def __call__(self, context: RunContext) -> tuple[Dict[str, pd.DataFrame], Dict[str, Any]]:
        ...


def run_command(
    *,
    context: RunContext,
    compute: Compute,
    checks: Iterable[Callable[[Dict[str, pd.DataFrame], Dict[str, Any], CheckReport], None]] = (),
) -> RunResult:
    """Execute a command in the canonical order: compute, then checks.

    Parameters
    ----------
    context:
        Metadata describing the current run (command name, output folder, seed).
    compute:
        Function producing the tables and payloads of the command.
    checks:
        Validation functions. Each receives the tables, the payloads and the
        shared :class:`CheckReport` so it can append warnings or errors.
    """

    frames, payloads = compute(context)

    report = CheckReport()
    for check in checks:
        check(frames, payloads, report)

    metadata: Dict[str, object] = {
        "command": context.command,
        "output_dir": str(context.output_dir) if context.output_dir else None,
        "seed": context.seed,
    }
    metadata.update(context.extra)

    return RunResult(frames, payloads, report, metadata)
