"""Solve reports and the ambient diagnostics collector.

Low-level routines (pivoting, integration) call :func:`note_assumption` and
friends without knowing who asked.  A solver opens :func:`recording`; nested
``recording`` blocks share the outermost report so every assumption lands in
exactly one place.
"""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field
from typing import Any

from .expr import Expr


@dataclass
class SolveReport:
    result: Any = None
    genericity_assumptions: list[Expr] = field(default_factory=list)
    unresolved_integrals: list[Expr] = field(default_factory=list)
    iterations_run: int = 0
    residual_samples: list[tuple[float, float]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    iterates: list[Any] = field(default_factory=list)

    def assume_nonzero(self, e: Expr) -> None:
        if e not in self.genericity_assumptions:
            self.genericity_assumptions.append(e)

    def add_unresolved(self, e: Expr) -> None:
        if e not in self.unresolved_integrals:
            self.unresolved_integrals.append(e)

    def warn(self, message: str) -> None:
        if message not in self.warnings:
            self.warnings.append(message)

    def merge(self, other: SolveReport) -> None:
        for e in other.genericity_assumptions:
            self.assume_nonzero(e)
        for e in other.unresolved_integrals:
            self.add_unresolved(e)
        for w in other.warnings:
            self.warn(w)

    def to_dict(self) -> dict:
        from .render import render
        return {
            "result": _render_value(self.result),
            "genericity_assumptions": [render(e) + " != 0" for e in self.genericity_assumptions],
            "unresolved_integrals": [render(e) for e in self.unresolved_integrals],
            "iterations_run": self.iterations_run,
            "residual_samples": [list(map(float, p)) for p in self.residual_samples],
            "warnings": list(self.warnings),
            "iterates": [_render_value(v) for v in self.iterates],
        }


def _render_value(value: Any) -> Any:
    from .render import render
    if value is None:
        return None
    if isinstance(value, Expr):
        return render(value)
    if isinstance(value, dict):
        return {render(k) if isinstance(k, Expr) else str(k): _render_value(v)
                for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_render_value(v) for v in value]
    if isinstance(value, (int, float, str)):
        return value
    if hasattr(value, "to_expr"):
        return render(value.to_expr())
    return str(value)


_current: contextvars.ContextVar[SolveReport | None] = contextvars.ContextVar(
    "symapprox_report", default=None)


@contextlib.contextmanager
def recording(report: SolveReport | None = None):
    """Collect diagnostics into ``report`` (or the already active one)."""
    active = _current.get()
    if active is not None:
        if report is not None and report is not active:
            token = _current.set(report)
            try:
                yield report
            finally:
                _current.reset(token)
                active.merge(report)
            return
        yield active
        return
    report = report if report is not None else SolveReport()
    token = _current.set(report)
    try:
        yield report
    finally:
        _current.reset(token)


def current() -> SolveReport | None:
    return _current.get()


def note_assumption(e: Expr) -> None:
    """Record that the generic expression ``e`` was assumed nonzero."""
    from .ratfunc import nonzero_factors
    r = _current.get()
    if r is None:
        return
    for f in nonzero_factors(e):
        r.assume_nonzero(f)


def note_unresolved(e: Expr) -> None:
    r = _current.get()
    if r is not None:
        r.add_unresolved(e)


def note_warning(message: str) -> None:
    r = _current.get()
    if r is not None:
        r.warn(message)
