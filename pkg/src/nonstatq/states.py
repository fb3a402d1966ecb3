"""Initial quantum states attached to the mode invariant."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["CoherentState", "FockState"]


@dataclass(frozen=True)
class CoherentState:
    """Eigenstate of the lowering invariant with complex eigenvalue ``alpha``."""

    alpha: complex

    @property
    def kind(self) -> str:
        return "coherent"


@dataclass(frozen=True)
class FockState:
    """Number state of the invariant pair, ``n`` quanta."""

    n: int

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise ValueError(f"occupation number must be a nonnegative integer, got {self.n}")

    @property
    def kind(self) -> str:
        return "fock"
