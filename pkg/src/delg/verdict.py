"""Solver results and certificate-check outcomes."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional


class Status(enum.Enum):
    YES = "yes"
    NO = "no"
    NO_WITHIN_BOUND = "no-within-bound"
    UNKNOWN = "unknown"

    @property
    def exit_code(self) -> int:
        return {Status.YES: 0, Status.NO: 1}.get(self, 2)


@dataclass
class Verdict:
    status: Status
    method: str
    strategy: Any = None
    plan: Optional[tuple] = None
    bound: Optional[int] = None
    stats: dict = field(default_factory=dict)

    @property
    def yes(self) -> bool:
        return self.status is Status.YES

    @property
    def no(self) -> bool:
        return self.status is Status.NO

    def __repr__(self):
        extra = f", bound={self.bound}" if self.bound is not None else ""
        return f"Verdict({self.status.value}, method={self.method}{extra})"


@dataclass
class Check:
    """Outcome of a certificate check; truthy iff the certificate is valid."""

    ok: bool
    reason: str = ""
    trace: tuple = ()
    exact: bool = True

    def __bool__(self):
        return self.ok
