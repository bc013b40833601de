"""Verdict record returned by every decision procedure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .numerics.scalars import Certainty


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Any = None
    certainty: Certainty = Certainty.EXACT
    mode: str | None = None
    detail: str = ""
    precision: int | None = None
    extra: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.holds)


class DeciderError(ValueError):
    """Base class for precondition failures of the decision procedures."""


class ImpureInput(DeciderError):
    pass


class NonOrthogonalInput(DeciderError):
    pass


class NonSpikyInput(DeciderError):
    pass


class NotNormalized(DeciderError):
    pass


class InputNotDistinguishable(DeciderError):
    pass


class PureOnly(DeciderError):
    pass


class FacetEnumerationRefused(DeciderError):
    pass


class LengthMismatch(DeciderError):
    pass
