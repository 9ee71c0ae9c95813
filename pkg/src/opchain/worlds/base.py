"""World interface consumed by the execution engine."""

from __future__ import annotations

from abc import ABC, abstractmethod

from ..logic import Domain, LogicalState


class WorldModel(ABC):
    """A steppable environment whose logical state is derived from its
    continuous state.

    Implementations must keep logical_state a pure function of the current
    continuous state and make step deterministic given the seed.  One engine
    run owns one world instance for its duration.
    """

    domain: Domain

    @abstractmethod
    def observe(self):
        """Return the current continuous state."""

    @abstractmethod
    def logical_state(self) -> LogicalState:
        """Evaluate every ground predicate on the current continuous state."""

    @abstractmethod
    def step(self, policy_id: str | None, args: tuple[str, ...] = ()) -> None:
        """Advance one tick under the named policy (None = no policy, ambient
        events only)."""

    @abstractmethod
    def inject(self, event) -> None:
        """Apply an external perturbation."""

    @abstractmethod
    def reseed(self, seed: int) -> None:
        """Reset the world to its initial configuration with a fresh RNG."""
